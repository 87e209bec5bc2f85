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
#include "nmpc/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nmpc {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return os;
}

}  // namespace

void write_trace_csv(std::ostream& os, const ClosedLoopTrace& trace) {
    const TraceMetadata& m = trace.meta;
    os << "# " << kTraceSchemaVersion << "\n";
    os << "# model=" << m.model << " variant=" << m.variant
       << " gamma=" << format_double(m.gamma) << " d=" << format_double(m.d)
       << " N=" << m.horizon << " tau=" << format_double(m.tau)
       << " steps=" << m.steps << " seed=" << m.seed << "\n";

    int n = 0, mdim = 0;
    if (!trace.records.empty()) {
        n = static_cast<int>(trace.records.front().z_cl.x.size());
        mdim = static_cast<int>(trace.records.front().z_cl.u.size());
    }
    os << "k";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= mdim; ++i) os << ",u" << i;
    os << ",J_star,stage,term_deriv_norm,term_stage,iters,cpu_s\n";

    for (const auto& rec : trace.records) {
        os << rec.k;
        for (int i = 0; i < n; ++i) os << "," << format_double(rec.z_cl.x[i]);
        for (int i = 0; i < mdim; ++i) os << "," << format_double(rec.z_cl.u[i]);
        os << "," << format_double(rec.j_star) << "," << format_double(rec.stage)
           << "," << format_double(rec.terminal_derivative_norm) << ","
           << format_double(rec.terminal_stage) << "," << rec.solver_iterations
           << "," << format_double(rec.cpu_seconds) << "\n";
    }
}

void write_trace_csv(const std::string& path, const ClosedLoopTrace& trace) {
    auto os = open_or_throw(path);
    write_trace_csv(os, trace);
}

ClosedLoopTrace read_trace_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open trace file '" + path + "'");
    }
    std::string line;
    if (!std::getline(is, line) || line.find(kTraceSchemaVersion) == std::string::npos) {
        throw std::runtime_error("'" + path + "' is not a " +
                                 std::string(kTraceSchemaVersion) + " file");
    }

    ClosedLoopTrace trace;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
        throw std::runtime_error("'" + path + "' is missing the metadata line");
    }
    for (const auto& token : split(line.substr(2), ' ')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "model") trace.meta.model = value;
        else if (key == "variant") trace.meta.variant = value;
        else if (key == "gamma") trace.meta.gamma = std::stod(value);
        else if (key == "d") trace.meta.d = std::stod(value);
        else if (key == "N") trace.meta.horizon = std::stoi(value);
        else if (key == "tau") trace.meta.tau = std::stod(value);
        else if (key == "steps") trace.meta.steps = std::stoi(value);
        else if (key == "seed") trace.meta.seed = std::stoull(value);
    }

    if (!std::getline(is, line)) {
        throw std::runtime_error("'" + path + "' is missing the header row");
    }
    const auto header = split(line, ',');
    int n = 0, m = 0;
    for (const auto& h : header) {
        if (h.size() >= 2 && h[0] == 'x') ++n;
        if (h.size() >= 2 && h[0] == 'u') ++m;
    }
    const std::size_t expected = 1 + n + m + 6;
    if (header.size() != expected) {
        throw std::runtime_error("'" + path + "' has an unexpected column count");
    }

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != expected) {
            throw std::runtime_error("'" + path + "' has a malformed row: " + line);
        }
        ClosedLoopRecord rec;
        std::size_t c = 0;
        rec.k = std::stoi(fields[c++]);
        rec.z_cl.x.resize(n);
        for (int i = 0; i < n; ++i) rec.z_cl.x[i] = std::stod(fields[c++]);
        rec.z_cl.u.resize(m);
        for (int i = 0; i < m; ++i) rec.z_cl.u[i] = std::stod(fields[c++]);
        rec.j_star = std::stod(fields[c++]);
        rec.stage = std::stod(fields[c++]);
        rec.terminal_derivative_norm = std::stod(fields[c++]);
        rec.terminal_stage = std::stod(fields[c++]);
        rec.solver_iterations = std::stoi(fields[c++]);
        rec.cpu_seconds = std::stod(fields[c++]);
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "# " << kSummarySchemaVersion << "\n";
    os << "variant,gamma,d,steps,status,final_stage,final_J_star,min_stage,"
          "decrease_violations,eq17_violations,dominance_violations,"
          "mean_cpu_s,p95_cpu_s,trace_file\n";
    for (const auto& r : rows) {
        os << r.variant << "," << format_double(r.gamma) << "," << format_double(r.d)
           << "," << r.steps << "," << r.status << "," << format_double(r.final_stage)
           << "," << format_double(r.final_j_star) << "," << format_double(r.min_stage)
           << "," << r.decrease_violations << "," << r.eq17_violations << ","
           << r.dominance_violations << "," << format_double(r.mean_cpu_s) << ","
           << format_double(r.p95_cpu_s) << "," << r.trace_file << "\n";
    }
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    auto os = open_or_throw(path);
    write_summary_csv(os, rows);
}

}  // namespace nmpc
