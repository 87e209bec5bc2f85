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
#include "nmpc/experiment.hpp"
#include "nmpc/svg_plot.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCertificate = 4;

struct Overrides {
    std::string config_path;
    double gamma = 0.0;
    bool gamma_set = false;
    double d = 0.0;
    bool d_set = false;
    std::string variant;
    int steps = 0;
    bool steps_set = false;
    std::string out;
    bool log_y = false;
    int jobs = 0;
    bool jobs_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file");
    cmd->add_option("--gamma", ov.gamma, "terminal weight gamma")
        ->each([&ov](const std::string&) { ov.gamma_set = true; });
    cmd->add_option("--d", ov.d, "target offset d")
        ->each([&ov](const std::string&) { ov.d_set = true; });
    cmd->add_option("--variant", ov.variant, "cost variant: nominal|full|no-deriv");
    cmd->add_option("--steps", ov.steps, "closed-loop steps")
        ->each([&ov](const std::string&) { ov.steps_set = true; });
    cmd->add_option("--out", ov.out, "output directory");
    cmd->add_flag("--log-y", ov.log_y, "log-scaled y axis in panels");
    cmd->add_option("--jobs", ov.jobs, "parallel grid cells (sweep)")
        ->each([&ov](const std::string&) { ov.jobs_set = true; });
    cmd->add_option("--seed", ov.seed, "seed for randomized probes")
        ->each([&ov](const std::string&) { ov.seed_set = true; });
}

nmpc::ExperimentConfig build_config(const Overrides& ov) {
    nmpc::ExperimentConfig cfg;
    cfg.scenario.steps = -1;
    if (!ov.config_path.empty()) {
        cfg = nmpc::load_config(ov.config_path);
    }
    if (!ov.variant.empty()) {
        cfg.variant = nmpc::variant_from_name(ov.variant);
        if (cfg.variant == nmpc::Variant::nominal && !ov.gamma_set) {
            cfg.gamma = 0.0;
        }
    }
    if (ov.gamma_set) cfg.gamma = ov.gamma;
    if (ov.d_set) cfg.scenario.d = ov.d;
    if (ov.steps_set) cfg.scenario.steps = ov.steps;
    if (!ov.out.empty()) cfg.output_dir = ov.out;
    if (ov.log_y) cfg.log_y = true;
    if (ov.jobs_set) cfg.jobs = ov.jobs;
    if (ov.seed_set) cfg.seed = ov.seed;
    if (const char* env_out = std::getenv("NMPC_LAB_OUT")) {
        cfg.output_dir = env_out;  // environment overrides config and flags
    }
    cfg.validate();
    return cfg;
}

int cmd_run(const nmpc::ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    const int steps = cfg.steps_for(cfg.scenario.d);
    const nmpc::SimulationResult result =
        nmpc::run_single(cfg, cfg.variant, cfg.gamma, cfg.scenario.d, steps);

    const std::string file = nmpc::trace_filename(cfg.variant, cfg.gamma, cfg.scenario.d);
    const std::string path = (std::filesystem::path(cfg.output_dir) / file).string();
    nmpc::write_trace_csv(path, result.trace);

    if (result.failed) {
        std::cerr << "simulation failed at step " << result.failed_step << ": "
                  << result.error << " (partial trace in " << path << ")\n";
        return kExitRuntime;
    }
    const auto& last = result.trace.records.back();
    std::cout << "run: variant=" << nmpc::variant_name(cfg.variant)
              << " gamma=" << cfg.gamma << " d=" << cfg.scenario.d
              << " steps=" << steps << " final_stage=" << last.stage
              << " final_J_star=" << last.j_star << " trace=" << path << "\n";
    return kExitOk;
}

int cmd_sweep(const nmpc::ExperimentConfig& cfg) {
    const nmpc::SweepOutputs out = nmpc::run_sweep(cfg, std::cout);
    std::cout << "sweep: " << out.rows.size() << " cells ("
              << out.failed_cells << " failed), summary " << out.summary_file << "\n";
    for (const auto& f : out.panel_files) {
        std::cout << "panel: " << f << "\n";
    }
    std::cout << "histogram: " << out.histogram_file << "\n";
    return kExitOk;
}

int cmd_plot(const nmpc::ExperimentConfig& cfg) {
    const nmpc::SweepOutputs out = nmpc::replot_from_dir(cfg, std::cout);
    for (const auto& f : out.panel_files) {
        std::cout << "panel: " << f << "\n";
    }
    std::cout << "histogram: " << out.histogram_file << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nmpc_lab: closed-loop NMPC experiments with a derivative-penalized terminal cost"};
    app.require_subcommand(1);

    Overrides ov_run, ov_sweep, ov_check, ov_plot;
    bool inject_fault = false;

    CLI::App* run = app.add_subcommand("run", "one closed-loop simulation, trace CSV out");
    add_common_options(run, ov_run);
    CLI::App* sweep = app.add_subcommand("sweep", "variant x gamma x target grid with plots");
    add_common_options(sweep, ov_sweep);
    CLI::App* check = app.add_subcommand("check", "gradient, decrease and terminal-bound certificates");
    add_common_options(check, ov_check);
    check->add_flag("--inject-gradient-fault", inject_fault,
                    "test hook: corrupt the adjoint gradient before checking");
    CLI::App* plot = app.add_subcommand("plot", "rebuild panels and histogram from traces in --out");
    add_common_options(plot, ov_plot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(build_config(ov_run));
        if (sweep->parsed()) return cmd_sweep(build_config(ov_sweep));
        if (check->parsed()) {
            return nmpc::run_check(build_config(ov_check), std::cout, inject_fault) == 0
                       ? kExitOk
                       : kExitCertificate;
        }
        if (plot->parsed()) return cmd_plot(build_config(ov_plot));
    } catch (const nmpc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
