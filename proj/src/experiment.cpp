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

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace nmpc {

namespace fs = std::filesystem;
using nlohmann::json;

int ExperimentConfig::steps_for(double d) const {
    if (scenario.steps > 0) {
        return scenario.steps;
    }
    return d <= 0.5 ? steps_short : steps_long;
}

void ExperimentConfig::validate() const {
    if (scenario.steps == 0 || (scenario.steps < 0 && scenario.steps != -1)) {
        throw ConfigError("scenario.steps must be >= 1");
    }
    if (!(scenario.d > 0.0)) {
        throw ConfigError("scenario.d must be positive");
    }
    if (scenario.x0.size() != pvtol::kStateDim || scenario.u0.size() != pvtol::kControlDim) {
        throw ConfigError("scenario x0/u0 dimensions must be 6 and 2");
    }
    if (variant == Variant::nominal && gamma != 0.0) {
        throw ConfigError("variant nominal requires gamma = 0");
    }
    if (variant != Variant::nominal && !(gamma > 0.0)) {
        throw ConfigError("penalized variants require gamma > 0");
    }
    if (sweep_gammas.empty() || sweep_targets.empty() || sweep_variants.empty()) {
        throw ConfigError("sweep lists must be nonempty");
    }
    for (double g : sweep_gammas) {
        if (!(g > 0.0)) throw ConfigError("sweep gammas must be positive");
    }
    if (steps_short < 1 || steps_long < 1) {
        throw ConfigError("sweep step counts must be >= 1");
    }
    if (params.horizon < 1) {
        throw ConfigError("horizon N must be >= 1");
    }
    if (!(params.tau > 0.0)) {
        throw ConfigError("sampling period tau must be positive");
    }
    if (output_dir.empty()) {
        throw ConfigError("output_dir must not be empty");
    }
    try {
        solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace {

Vector to_vector(const json& arr, int expected, const char* what) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != expected) {
        throw ConfigError(std::string(what) + " must be an array of length " +
                          std::to_string(expected));
    }
    Vector v(expected);
    for (int i = 0; i < expected; ++i) {
        v[i] = arr[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }

    ExperimentConfig cfg;
    cfg.scenario.steps = -1;
    try {
        if (j.contains("model") && j.at("model").get<std::string>() != "pvtol") {
            throw ConfigError("unknown model '" + j.at("model").get<std::string>() +
                              "' (built-in: pvtol)");
        }
        if (j.contains("pvtol")) {
            const json& p = j.at("pvtol");
            maybe(p, "mu", cfg.params.mu);
            maybe(p, "velocity_limit", cfg.params.velocity_limit);
            maybe(p, "rate_limit", cfg.params.rate_limit);
            maybe(p, "penalty_rho", cfg.params.penalty_rho);
            maybe(p, "limit_y1dot", cfg.params.limit_y1dot);
            maybe(p, "limit_y2dot", cfg.params.limit_y2dot);
        }
        if (j.contains("horizon")) {
            const json& p = j.at("horizon");
            maybe(p, "N", cfg.params.horizon);
            maybe(p, "tau", cfg.params.tau);
        }
        if (j.contains("scenario")) {
            const json& p = j.at("scenario");
            maybe(p, "d", cfg.scenario.d);
            maybe(p, "steps", cfg.scenario.steps);
            if (p.contains("x0")) cfg.scenario.x0 = to_vector(p.at("x0"), pvtol::kStateDim, "scenario.x0");
            if (p.contains("u0")) cfg.scenario.u0 = to_vector(p.at("u0"), pvtol::kControlDim, "scenario.u0");
        }
        if (j.contains("cost")) {
            const json& p = j.at("cost");
            if (p.contains("variant")) {
                cfg.variant = variant_from_name(p.at("variant").get<std::string>());
                if (cfg.variant == Variant::nominal) {
                    cfg.gamma = 0.0;
                }
            }
            maybe(p, "gamma", cfg.gamma);
        }
        if (j.contains("solver")) {
            const json& p = j.at("solver");
            maybe(p, "max_iterations", cfg.solver.max_iterations);
            maybe(p, "memory_size", cfg.solver.memory_size);
            maybe(p, "armijo_c1", cfg.solver.armijo_c1);
            maybe(p, "backtrack_factor", cfg.solver.backtrack_factor);
            maybe(p, "gradient_tolerance", cfg.solver.gradient_tolerance);
            maybe(p, "max_linesearch_steps", cfg.solver.max_linesearch_steps);
        }
        if (j.contains("sweep")) {
            const json& p = j.at("sweep");
            if (p.contains("gammas")) {
                cfg.sweep_gammas = p.at("gammas").get<std::vector<double>>();
            }
            if (p.contains("targets")) {
                cfg.sweep_targets = p.at("targets").get<std::vector<double>>();
            }
            if (p.contains("variants")) {
                cfg.sweep_variants.clear();
                for (const auto& name : p.at("variants")) {
                    cfg.sweep_variants.push_back(variant_from_name(name.get<std::string>()));
                }
            }
            maybe(p, "steps_short", cfg.steps_short);
            maybe(p, "steps_long", cfg.steps_long);
        }
        if (j.contains("check")) {
            const json& p = j.at("check");
            maybe(p, "l_floor", cfg.check.l_floor);
            maybe(p, "tolerance", cfg.check.tolerance);
            maybe(p, "beta_min", cfg.check.beta_min);
            maybe(p, "decrease_min_pass_rate", cfg.check.decrease_min_pass_rate);
            maybe(p, "eq17_min_pass_rate", cfg.check.eq17_min_pass_rate);
            maybe(p, "dominance_tolerance", cfg.check.dominance_tolerance);
            maybe(p, "gradient_instances", cfg.check.gradient_instances);
            maybe(p, "gradient_h", cfg.check.gradient_h);
            maybe(p, "gradient_rel_tol", cfg.check.gradient_rel_tol);
            maybe(p, "kink_margin", cfg.check.kink_margin);
            maybe(p, "probes", cfg.check.probes);
            maybe(p, "mu_eq", cfg.check.mu_eq);
            maybe(p, "stationary_tol", cfg.check.stationary_tol);
            maybe(p, "probe_iterations", cfg.check.probe_iterations);
        }
        maybe(j, "output_dir", cfg.output_dir);
        maybe(j, "jobs", cfg.jobs);
        maybe(j, "seed", cfg.seed);
        maybe(j, "log_y", cfg.log_y);
    } catch (const json::exception& e) {
        throw ConfigError("config error in '" + path + "': " + e.what());
    }
    return cfg;
}

std::string trace_filename(Variant variant, double gamma, double d) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "trace_%s_%g_%g.csv", variant_name(variant), gamma, d);
    return buf;
}

TraceMetadata make_metadata(const ExperimentConfig& config, Variant variant,
                            double gamma, double d, int steps) {
    TraceMetadata meta;
    meta.model = "pvtol";
    meta.variant = variant_name(variant);
    meta.gamma = gamma;
    meta.d = d;
    meta.horizon = config.params.horizon;
    meta.tau = config.params.tau;
    meta.steps = steps;
    meta.seed = config.seed;
    return meta;
}

SimulationResult run_single(const ExperimentConfig& config, Variant variant,
                            double gamma, double d, int steps) {
    pvtol::Scenario scenario = config.scenario;
    scenario.d = d;
    scenario.steps = steps;

    const ModelSpec model = pvtol::model(config.params);
    const CostSpec spec = pvtol::cost(config.params, scenario, variant, gamma);
    const ExtendedState z0 = pvtol::initial_state(scenario);
    return simulate(model, spec, config.solver, config.params.horizon, z0, steps,
                    make_metadata(config, variant, gamma, d, steps));
}

namespace {

struct Cell {
    Variant variant;
    double gamma;
    double d;
    int steps;
};

std::vector<Cell> make_grid(const ExperimentConfig& config) {
    std::vector<Cell> cells;
    for (double d : config.sweep_targets) {
        const int steps = config.steps_for(d);
        for (Variant v : config.sweep_variants) {
            if (v == Variant::nominal) {
                cells.push_back({v, 0.0, d, steps});
            } else {
                for (double g : config.sweep_gammas) {
                    cells.push_back({v, g, d, steps});
                }
            }
        }
    }
    return cells;
}

struct CellOutcome {
    Cell cell{};
    SummaryRow row;
    ClosedLoopTrace trace;
    bool ok = false;
};

SummaryRow summarize(const ExperimentConfig& config, const Cell& cell,
                     const SimulationResult& result, const std::string& trace_file) {
    SummaryRow row;
    row.variant = variant_name(cell.variant);
    row.gamma = cell.gamma;
    row.d = cell.d;
    row.steps = cell.steps;
    row.trace_file = trace_file;
    row.status = result.failed
                     ? "failed_step_" + std::to_string(result.failed_step)
                     : "ok";

    const auto& records = result.trace.records;
    if (records.empty()) {
        return row;
    }
    row.final_stage = records.back().stage;
    row.final_j_star = records.back().j_star;
    row.min_stage = records.front().stage;
    std::vector<double> cpu;
    cpu.reserve(records.size());
    for (const auto& rec : records) {
        row.min_stage = std::min(row.min_stage, rec.stage);
        cpu.push_back(rec.cpu_seconds);
    }
    row.mean_cpu_s = 0.0;
    for (double c : cpu) row.mean_cpu_s += c;
    row.mean_cpu_s /= static_cast<double>(cpu.size());
    std::sort(cpu.begin(), cpu.end());
    row.p95_cpu_s = cpu[static_cast<std::size_t>(
        std::min<double>(std::ceil(0.95 * static_cast<double>(cpu.size())) - 1,
                         static_cast<double>(cpu.size() - 1)))];

    if (records.size() >= 2) {
        const auto decrease = check_decrease(result.trace, config.check.l_floor,
                                             config.check.tolerance, config.check.beta_min);
        row.decrease_violations = decrease.violations;
    }
    if (cell.gamma > 0.0) {
        const auto terminal = check_terminal_bounds(result.trace, cell.gamma,
                                                    config.check.l_floor);
        row.eq17_violations = terminal.violations;
    }
    row.dominance_violations =
        check_warm_start_dominance(result.trace, config.check.dominance_tolerance).violations;
    return row;
}

std::string panel_filename(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "panel_d%g.svg", d);
    return buf;
}

std::string series_label(const std::string& variant, double gamma) {
    if (variant == "nominal") {
        return "nominal";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s g=%g", variant.c_str(), gamma);
    return buf;
}

/// One Fig.-1-style panel: J* along the closed loop for every setting at one
/// target, plus the histogram across every solve of the sweep.
void emit_plots(const ExperimentConfig& config,
                const std::vector<const ClosedLoopTrace*>& traces,
                SweepOutputs& out) {
    std::vector<double> targets;
    for (const auto* t : traces) {
        if (std::find(targets.begin(), targets.end(), t->meta.d) == targets.end()) {
            targets.push_back(t->meta.d);
        }
    }

    for (double d : targets) {
        std::vector<Series> series;
        for (const auto* t : traces) {
            if (t->meta.d != d) continue;
            Series s;
            s.label = series_label(t->meta.variant, t->meta.gamma);
            s.x.reserve(t->records.size());
            s.y.reserve(t->records.size());
            for (const auto& rec : t->records) {
                s.x.push_back(static_cast<double>(rec.k));
                s.y.push_back(rec.j_star);
            }
            series.push_back(std::move(s));
        }
        PlotOptions opts;
        char title[64];
        std::snprintf(title, sizeof(title), "Closed-loop optimal cost, d = %g", d);
        opts.title = title;
        opts.x_label = "step k";
        opts.y_label = "J*";
        opts.log_y = config.log_y;
        const std::string file = (fs::path(config.output_dir) / panel_filename(d)).string();
        write_svg(file, render_line_plot(series, opts));
        out.panel_files.push_back(file);
    }

    std::vector<double> cpu;
    for (const auto* t : traces) {
        for (const auto& rec : t->records) {
            cpu.push_back(rec.cpu_seconds);
        }
    }
    PlotOptions hopts;
    hopts.title = "Per-solve wall time";
    hopts.x_label = "seconds";
    hopts.y_label = "count";
    const std::string hfile = (fs::path(config.output_dir) / "cpu_histogram.svg").string();
    write_svg(hfile, render_histogram(cpu, 30, hopts));
    out.histogram_file = hfile;
}

}  // namespace

SweepOutputs run_sweep(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    fs::create_directories(config.output_dir);

    const std::vector<Cell> cells = make_grid(config);
    std::vector<CellOutcome> outcomes(cells.size());

    unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                    : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            const Cell& cell = cells[i];
            CellOutcome& oc = outcomes[i];
            oc.cell = cell;
            const std::string file = trace_filename(cell.variant, cell.gamma, cell.d);
            const std::string path = (fs::path(config.output_dir) / file).string();
            try {
                SimulationResult result =
                    run_single(config, cell.variant, cell.gamma, cell.d, cell.steps);
                write_trace_csv(path, result.trace);
                oc.row = summarize(config, cell, result, file);
                oc.trace = std::move(result.trace);
                oc.ok = !result.failed;
                if (result.failed) {
                    oc.row.status += ": " + result.error;
                }
            } catch (const std::exception& e) {
                oc.row.variant = variant_name(cell.variant);
                oc.row.gamma = cell.gamma;
                oc.row.d = cell.d;
                oc.row.steps = cell.steps;
                oc.row.trace_file = file;
                oc.row.status = std::string("error: ") + e.what();
                oc.ok = false;
            }
            std::lock_guard<std::mutex> lock(log_mutex);
            log << "[" << (i + 1) << "/" << cells.size() << "] " << oc.row.variant
                << " gamma=" << cell.gamma << " d=" << cell.d << " -> " << oc.row.status
                << " (final stage " << oc.row.final_stage << ")\n";
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }

    SweepOutputs out;
    std::vector<const ClosedLoopTrace*> traces;
    for (const auto& oc : outcomes) {
        out.rows.push_back(oc.row);
        if (!oc.ok) {
            ++out.failed_cells;
        }
        if (!oc.trace.records.empty()) {
            traces.push_back(&oc.trace);
        }
    }
    out.summary_file = (fs::path(config.output_dir) / "summary.csv").string();
    write_summary_csv(out.summary_file, out.rows);
    emit_plots(config, traces, out);
    return out;
}

GradientCheckResult gradient_fd_check(const ModelSpec& model, const CostSpec& spec,
                                      int horizon, int instances, std::uint64_t seed,
                                      double h, double kink_margin, bool inject_fault) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto uniform_in = [&](double lo, double hi) {
        return lo + (unit(rng) + 1.0) * 0.5 * (hi - lo);
    };

    GradientCheckResult out;
    const int n = model.state_dim;
    const int m = model.control_dim;
    const int max_attempts = instances * 50;
    int attempts = 0;
    while (out.instances < instances && attempts < max_attempts) {
        ++attempts;
        ExtendedState z;
        z.x = Vector(n);
        for (int i = 0; i < n; ++i) {
            z.x[i] = 0.5 * unit(rng);
        }
        z.u = Vector(m);
        for (int i = 0; i < m; ++i) {
            z.u[i] = uniform_in(model.control_lower[i], model.control_upper[i]);
        }
        ControlSequence seq(static_cast<std::size_t>(horizon), Vector(m));
        for (auto& u : seq) {
            for (int i = 0; i < m; ++i) {
                u[i] = uniform_in(model.control_lower[i], model.control_upper[i]);
            }
        }

        const Trajectory traj = rollout(model, z, seq);
        if (penalty_kink_distance(spec, traj) < kink_margin) {
            ++out.resampled;
            continue;
        }

        std::vector<Vector> grad;
        cost_gradient(spec, model, z, seq, grad);
        if (inject_fault) {
            grad[0][0] = grad[0][0] * 1.001 + 1e-3;
        }

        for (int i = 0; i < horizon; ++i) {
            for (int c = 0; c < m; ++c) {
                ControlSequence plus = seq, minus = seq;
                plus[static_cast<std::size_t>(i)][c] += h;
                minus[static_cast<std::size_t>(i)][c] -= h;
                const double fd = (total_cost(spec, model, z, plus).total -
                                   total_cost(spec, model, z, minus).total) /
                                  (2.0 * h);
                const double rel = std::abs(grad[static_cast<std::size_t>(i)][c] - fd) /
                                   std::max(1.0, std::abs(fd));
                out.max_rel_error = std::max(out.max_rel_error, rel);
            }
        }
        ++out.instances;
    }
    return out;
}

std::vector<ExtendedState> random_probes(const ModelSpec& model, const CostSpec& spec,
                                         int count, std::uint64_t seed, double l_floor) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    std::vector<ExtendedState> probes;
    const int n = model.state_dim;
    const int m = model.control_dim;
    int guard = 0;
    while (static_cast<int>(probes.size()) < count && guard < count * 100) {
        ++guard;
        ExtendedState z;
        z.x = Vector(n);
        for (int i = 0; i < n; ++i) {
            // Positions and attitude wander, velocities stay moderate.
            z.x[i] = (i < n / 2 ? 0.6 : 0.2) * unit(rng);
        }
        z.u = Vector(m);
        for (int i = 0; i < m; ++i) {
            const double lo = model.control_lower[i], hi = model.control_upper[i];
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            z.u[i] = mid + 0.5 * half * unit(rng);
        }
        if (stage_cost(spec, z) > l_floor) {
            probes.push_back(std::move(z));
        }
    }
    return probes;
}

int run_check(const ExperimentConfig& config, std::ostream& log,
              bool inject_gradient_fault) {
    config.validate();
    fs::create_directories(config.output_dir);

    const ModelSpec model = pvtol::model(config.params);
    pvtol::Scenario scenario = config.scenario;
    scenario.steps = config.steps_for(scenario.d);
    const CostSpec spec =
        pvtol::cost(config.params, scenario, config.variant, config.gamma);

    struct Hard {
        std::string name;
        bool pass;
    };
    std::vector<Hard> hard;

    // Gradient vs central finite differences.
    const auto grad = gradient_fd_check(model, spec, config.params.horizon,
                                        config.check.gradient_instances, config.seed,
                                        config.check.gradient_h, config.check.kink_margin,
                                        inject_gradient_fault);
    const bool grad_pass = grad.instances >= config.check.gradient_instances &&
                           grad.max_rel_error <= config.check.gradient_rel_tol;
    hard.push_back({"gradient", grad_pass});
    log << "gradient: " << grad.instances << " instances, max rel error "
        << grad.max_rel_error << (grad_pass ? " [pass]\n" : " [FAIL]\n");

    // Closed-loop trace for the configured scenario.
    const SimulationResult sim = run_single(config, config.variant, config.gamma,
                                            scenario.d, scenario.steps);
    if (sim.failed) {
        log << "simulation failed at step " << sim.failed_step << ": " << sim.error << "\n";
        return 4;
    }

    DecreaseCheck decrease;
    if (sim.trace.records.size() >= 2) {
        decrease = check_decrease(sim.trace, config.check.l_floor, config.check.tolerance,
                                  config.check.beta_min);
    }
    const bool decrease_pass = decrease.pass_rate() >= config.check.decrease_min_pass_rate;
    hard.push_back({"decrease", decrease_pass});
    log << "decrease: " << decrease.violations << "/" << decrease.checked
        << " violations (pass rate " << decrease.pass_rate() << ")"
        << (decrease_pass ? " [pass]\n" : " [FAIL]\n");

    TerminalBoundCheck terminal;
    if (config.gamma > 0.0) {
        terminal = check_terminal_bounds(sim.trace, config.gamma, config.check.l_floor);
        log << "terminal bound: pass rate " << terminal.pass_rate << " (soft, want >= "
            << config.check.eq17_min_pass_rate << ")\n";
    } else {
        log << "terminal bound: skipped (gamma = 0)\n";
    }

    const DominanceCheck dominance =
        check_warm_start_dominance(sim.trace, config.check.dominance_tolerance);
    const bool dominance_pass = dominance.violations == 0;
    hard.push_back({"warm_start_dominance", dominance_pass});
    log << "warm-start dominance: " << dominance.violations << "/" << dominance.checked
        << " violations" << (dominance_pass ? " [pass]\n" : " [FAIL]\n");

    // Gamma-scaling probe on the full variant across the sweep gammas.
    GammaScalingReport scaling;
    std::vector<ClosedLoopTrace> scaling_traces;
    if (config.sweep_gammas.size() >= 3) {
        for (double g : config.sweep_gammas) {
            SimulationResult r =
                run_single(config, Variant::full, g, scenario.d, scenario.steps);
            if (!r.failed) {
                scaling_traces.push_back(std::move(r.trace));
            }
        }
        if (scaling_traces.size() >= 3) {
            scaling = gamma_scaling_probe(scaling_traces);
            log << "gamma scaling: exponent " << scaling.fitted_exponent
                << (scaling.nonincreasing ? " (nonincreasing)\n" : " (not monotone)\n");
        }
    }

    // Contraction constants on random probes.
    SolverConfig probe_solver = config.solver;
    probe_solver.max_iterations = config.check.probe_iterations;
    probe_solver.memory_size = std::max(config.solver.memory_size, 20);
    probe_solver.gradient_tolerance = 1e-10;
    const auto probes =
        random_probes(model, spec, config.check.probes, config.seed + 1, config.check.l_floor);
    const auto contraction =
        estimate_contraction(model, spec, probe_solver, config.params.horizon, probes,
                             config.check.mu_eq, config.check.stationary_tol,
                             config.check.l_floor);
    log << "contraction: alpha_hat " << contraction.alpha_hat << ", kappa1_hat "
        << contraction.kappa1_hat << " (" << contraction.probes_used << " probes, "
        << contraction.probes_skipped << " skipped)\n";

    // Persist the report and per-step residuals.
    {
        std::ofstream os(fs::path(config.output_dir) / "certificates.txt");
        os << "# nmpc-certificates-v1\n";
        os << "[gradient]\n";
        os << "instances: " << grad.instances << "\n";
        os << "max_rel_error: " << grad.max_rel_error << "\n";
        os << "tolerance: " << config.check.gradient_rel_tol << "\n";
        os << "pass: " << (grad_pass ? 1 : 0) << "\n\n";
        render_report(os, decrease, terminal, dominance);
        os << "\n";
        render_report(os, contraction);
        os << "\n";
        render_report(os, scaling);
        os << "\n[hard_summary]\n";
        for (const auto& h : hard) {
            os << h.name << ": " << (h.pass ? "pass" : "fail") << "\n";
        }
    }
    {
        std::ofstream os(fs::path(config.output_dir) / "residuals.csv");
        write_residuals_csv(os, decrease, terminal);
    }

    for (const auto& h : hard) {
        if (!h.pass) {
            log << "certificate suite FAILED (" << h.name << ")\n";
            return 4;
        }
    }
    log << "certificate suite passed\n";
    return 0;
}

SweepOutputs replot_from_dir(const ExperimentConfig& config, std::ostream& log) {
    fs::create_directories(config.output_dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(config.output_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw std::runtime_error("no trace_*.csv files in '" + config.output_dir + "'");
    }

    std::vector<ClosedLoopTrace> traces;
    traces.reserve(files.size());
    for (const auto& f : files) {
        traces.push_back(read_trace_csv(f));
        log << "loaded " << f << " (" << traces.back().records.size() << " records)\n";
    }
    // Panels follow target order, then variant/gamma order within a target.
    std::stable_sort(traces.begin(), traces.end(),
                     [](const ClosedLoopTrace& a, const ClosedLoopTrace& b) {
                         return a.meta.d < b.meta.d;
                     });

    SweepOutputs out;
    std::vector<const ClosedLoopTrace*> ptrs;
    ptrs.reserve(traces.size());
    for (const auto& t : traces) {
        ptrs.push_back(&t);
    }
    emit_plots(config, ptrs, out);
    return out;
}

}  // namespace nmpc
