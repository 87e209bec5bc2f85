/*
 Copyright 2026 The nmpc-lab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef NMPC_TRACE_IO_HPP
#define NMPC_TRACE_IO_HPP

#include "nmpc/mpc_loop.hpp"

#include <iosfwd>

namespace nmpc {

/// Version string heading every trace CSV.
inline constexpr const char* kTraceSchemaVersion = "nmpc-trace-v1";
inline constexpr const char* kSummarySchemaVersion = "nmpc-summary-v1";

/// Shortest round-trippable decimal representation ("%.17g").
std::string format_double(double value);

/**
 * @brief Writes a trace as CSV with fixed column order:
 * k, x1..xn, u1..um, J_star, stage, term_deriv_norm, term_stage, iters, cpu_s.
 *
 * The file starts with the schema version and a metadata comment line. All
 * content except the measured cpu_s column is reproducible bit-for-bit for
 * identical inputs.
 */
void write_trace_csv(std::ostream& os, const ClosedLoopTrace& trace);
void write_trace_csv(const std::string& path, const ClosedLoopTrace& trace);

/// Parses a file produced by write_trace_csv. Fields not present in the CSV
/// schema (warm-start cost, fallback flag) are left defaulted.
ClosedLoopTrace read_trace_csv(const std::string& path);

/// One sweep summary row.
struct SummaryRow {
    std::string variant;
    double gamma = 0.0;
    double d = 0.0;
    int steps = 0;
    std::string status = "ok";  // "ok" or a failure reason
    double final_stage = 0.0;
    double final_j_star = 0.0;
    double min_stage = 0.0;
    int decrease_violations = 0;
    int eq17_violations = 0;
    int dominance_violations = 0;
    double mean_cpu_s = 0.0;
    double p95_cpu_s = 0.0;
    std::string trace_file;
};

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace nmpc

#endif  // NMPC_TRACE_IO_HPP
