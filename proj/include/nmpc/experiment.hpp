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
#ifndef NMPC_EXPERIMENT_HPP
#define NMPC_EXPERIMENT_HPP

#include "nmpc/certificates.hpp"
#include "nmpc/pvtol.hpp"
#include "nmpc/trace_io.hpp"

#include <cstdint>
#include <iosfwd>

namespace nmpc {

/// Configuration problems map to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckConfig {
    double l_floor = kDefaultStageFloor;
    double tolerance = 1e-6;
    double beta_min = 0.0;
    double decrease_min_pass_rate = 0.95;
    double eq17_min_pass_rate = 0.90;
    double dominance_tolerance = 1e-9;
    int gradient_instances = 100;
    double gradient_h = 1e-6;
    double gradient_rel_tol = 1e-6;
    double kink_margin = 1e-5;
    int probes = 8;
    double mu_eq = 1e6;
    double stationary_tol = 1e-4;
    int probe_iterations = 400;
};

struct ExperimentConfig {
    pvtol::Params params;
    pvtol::Scenario scenario;   // scenario.steps < 0 means "rule by d"
    Variant variant = Variant::full;
    double gamma = 100.0;
    SolverConfig solver;
    CheckConfig check;

    // Sweep grid: nominal runs once per target (gamma = 0), the penalized
    // variants run over every gamma.
    std::vector<double> sweep_gammas = pvtol::paper_gammas();
    std::vector<double> sweep_targets = pvtol::paper_targets();
    std::vector<Variant> sweep_variants = {Variant::nominal, Variant::full,
                                           Variant::no_derivative};
    int steps_short = 300;  // targets with d <= 0.5
    int steps_long = 600;

    std::string output_dir = "out";
    int jobs = 0;  // 0: hardware concurrency
    std::uint64_t seed = 1;
    bool log_y = false;

    /// Steps for a target under the sweep rule, or the explicit override.
    int steps_for(double d) const;

    void validate() const;  // throws ConfigError
};

/// Parses the JSON config file; missing keys keep their defaults.
ExperimentConfig load_config(const std::string& path);

/// Canonical trace file name, e.g. "trace_full_1000_0.2.csv".
std::string trace_filename(Variant variant, double gamma, double d);

TraceMetadata make_metadata(const ExperimentConfig& config, Variant variant,
                            double gamma, double d, int steps);

/// Builds the model and cost for one grid cell and simulates it.
SimulationResult run_single(const ExperimentConfig& config, Variant variant,
                            double gamma, double d, int steps);

struct SweepOutputs {
    std::vector<SummaryRow> rows;
    std::vector<std::string> panel_files;
    std::string histogram_file;
    std::string summary_file;
    int failed_cells = 0;
};

/// Runs the variant x gamma x target grid, cells in parallel, and emits the
/// per-target panels, the solve-time histogram and the summary table.
SweepOutputs run_sweep(const ExperimentConfig& config, std::ostream& log);

struct GradientCheckResult {
    int instances = 0;
    double max_rel_error = 0.0;
    int resampled = 0;  // instances rejected for sitting near a penalty kink
};

/// Adjoint-vs-central-finite-difference comparison on random instances, away
/// from penalty kinks. `inject_fault` perturbs the adjoint to exercise the
/// failure path.
GradientCheckResult gradient_fd_check(const ModelSpec& model, const CostSpec& spec,
                                      int horizon, int instances, std::uint64_t seed,
                                      double h, double kink_margin,
                                      bool inject_fault = false);

/// Random extended states with stage cost above the floor, suitable as
/// contraction probes.
std::vector<ExtendedState> random_probes(const ModelSpec& model, const CostSpec& spec,
                                         int count, std::uint64_t seed, double l_floor);

/// Runs the certificate suite; returns 0 on success, 4 when a hard check
/// fails. Reports land in the output directory.
int run_check(const ExperimentConfig& config, std::ostream& log,
              bool inject_gradient_fault = false);

/// Rebuilds panels and the histogram from persisted traces in `dir`.
SweepOutputs replot_from_dir(const ExperimentConfig& config, std::ostream& log);

}  // namespace nmpc

#endif  // NMPC_EXPERIMENT_HPP
