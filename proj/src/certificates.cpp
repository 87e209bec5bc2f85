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
#include "nmpc/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace nmpc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double DecreaseCheck::pass_rate() const {
    return checked == 0 ? 1.0 : 1.0 - static_cast<double>(violations) / checked;
}

DecreaseCheck check_decrease(const ClosedLoopTrace& trace, double l_floor,
                             double tolerance, double beta_min) {
    if (trace.records.size() < 2) {
        throw std::invalid_argument("check_decrease: trace needs at least 2 records");
    }
    DecreaseCheck out;
    out.l_floor = l_floor;
    out.tolerance = tolerance;
    out.beta_min = beta_min;

    double max_ratio = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        const double stage = trace.records[k].stage;
        if (!(stage > l_floor)) {
            continue;
        }
        DecreaseCheck::Step step;
        step.k = trace.records[k].k;
        step.ratio = (trace.records[k + 1].j_star - trace.records[k].j_star) / stage;
        step.violation = step.ratio > -beta_min + tolerance;
        if (step.ratio > max_ratio) {
            max_ratio = step.ratio;
            out.worst_step = step.k;
        }
        out.violations += step.violation ? 1 : 0;
        ++out.checked;
        out.steps.push_back(step);
    }
    out.beta_hat = out.checked > 0 ? -max_ratio : kNaN;
    return out;
}

TerminalBoundCheck check_terminal_bounds(const ClosedLoopTrace& trace, double gamma,
                                         double l_floor, double abs_tolerance) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("check_terminal_bounds: gamma must be positive");
    }
    TerminalBoundCheck out;
    out.gamma = gamma;
    for (const auto& rec : trace.records) {
        TerminalBoundCheck::Step step;
        step.k = rec.k;
        step.lhs = rec.terminal_derivative_norm;
        step.rhs = std::sqrt(std::max(0.0, rec.terminal_stage) / gamma);
        step.slack = step.rhs - step.lhs;
        step.violation = step.slack < -abs_tolerance;
        step.implied_gamma_alpha_kappa =
            rec.stage > l_floor ? gamma * gamma * step.lhs * step.lhs / rec.stage : 0.0;
        out.violations += step.violation ? 1 : 0;
        out.steps.push_back(step);
    }
    out.pass_rate = out.steps.empty()
                        ? 1.0
                        : 1.0 - static_cast<double>(out.violations) / out.steps.size();
    return out;
}

DominanceCheck check_warm_start_dominance(const ClosedLoopTrace& trace,
                                          double tolerance) {
    DominanceCheck out;
    for (const auto& rec : trace.records) {
        const double excess = rec.j_star - rec.warm_start_cost;
        out.worst_excess = std::max(out.worst_excess, excess);
        out.violations += excess > tolerance ? 1 : 0;
        ++out.checked;
    }
    return out;
}

ContractionEstimate estimate_contraction(const ModelSpec& model, const CostSpec& spec,
                                         const SolverConfig& solver, int horizon,
                                         const std::vector<ExtendedState>& probes,
                                         double mu_eq, double stationary_tol,
                                         double l_floor) {
    if (horizon < 1) {
        throw std::invalid_argument("estimate_contraction: horizon must be >= 1");
    }
    CostSpec surrogate = spec;
    surrogate.variant = Variant::steady_surrogate;
    surrogate.surrogate_mu = mu_eq;

    ContractionEstimate out;
    double alpha_max = -std::numeric_limits<double>::infinity();
    double kappa_max = -std::numeric_limits<double>::infinity();
    for (const auto& z : probes) {
        const double stage0 = stage_cost(spec, z);
        if (!(stage0 > l_floor)) {
            throw std::invalid_argument(
                "estimate_contraction: probe stage cost must exceed the floor");
        }
        ContractionEstimate::Probe probe;
        probe.stage0 = stage0;

        ControlSequence cold(static_cast<std::size_t>(horizon), z.u);
        try {
            const OcpSolution sol = solve(surrogate, model, solver, z, cold);
            probe.terminal_fc_norm = std::sqrt(sol.breakdown.terminal_derivative_sq);
            probe.alpha_ratio = sol.breakdown.terminal_stage / stage0;
            probe.kappa_ratio = sol.breakdown.cumulated_stage / stage0;
            probe.accepted = probe.terminal_fc_norm <= stationary_tol;
        } catch (const std::exception&) {
            probe.accepted = false;
        }

        if (probe.accepted) {
            alpha_max = std::max(alpha_max, probe.alpha_ratio);
            kappa_max = std::max(kappa_max, probe.kappa_ratio);
            ++out.probes_used;
        } else {
            ++out.probes_skipped;
        }
        out.probes.push_back(probe);
    }
    out.alpha_hat = out.probes_used > 0 ? alpha_max : kNaN;
    out.kappa1_hat = out.probes_used > 0 ? kappa_max : kNaN;
    return out;
}

GammaScalingReport gamma_scaling_probe(const std::vector<ClosedLoopTrace>& traces) {
    if (traces.size() < 3) {
        throw std::invalid_argument("gamma_scaling_probe: need at least 3 traces");
    }
    const TraceMetadata& ref = traces.front().meta;
    for (const auto& t : traces) {
        const TraceMetadata& m = t.meta;
        if (m.model != ref.model || m.variant != ref.variant || m.d != ref.d ||
            m.steps != ref.steps || m.horizon != ref.horizon || m.tau != ref.tau) {
            throw std::invalid_argument(
                "gamma_scaling_probe: traces must share the scenario and differ only in gamma");
        }
    }

    GammaScalingReport out;
    for (const auto& t : traces) {
        double max_fc = 0.0;
        for (const auto& rec : t.records) {
            max_fc = std::max(max_fc, rec.terminal_derivative_norm);
        }
        out.points.push_back({t.meta.gamma, max_fc});
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const auto& a, const auto& b) { return a.gamma < b.gamma; });

    out.nonincreasing = true;
    for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
        if (out.points[i + 1].max_terminal_derivative >
            out.points[i].max_terminal_derivative + 1e-9) {
            out.nonincreasing = false;
            break;
        }
    }

    // Log-log least squares over usable points; a degenerate gamma spread
    // (repeated values) reports a flat trend.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& p : out.points) {
        if (p.gamma > 0.0 && p.max_terminal_derivative > 0.0) {
            const double lx = std::log(p.gamma);
            const double ly = std::log(p.max_terminal_derivative);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++count;
        }
    }
    const double denom = count > 0 ? sxx - sx * sx / count : 0.0;
    out.fitted_exponent = denom > 1e-12 ? (sxy - sx * sy / count) / denom : 0.0;
    return out;
}

namespace {

void kv(std::ostream& os, const char* key, double value) {
    os << key << ": " << value << "\n";
}
void kv(std::ostream& os, const char* key, int value) {
    os << key << ": " << value << "\n";
}

}  // namespace

void render_report(std::ostream& os, const DecreaseCheck& decrease,
                   const TerminalBoundCheck& terminal, const DominanceCheck& dominance) {
    os << "[decrease]\n";
    kv(os, "checked", decrease.checked);
    kv(os, "violations", decrease.violations);
    kv(os, "pass_rate", decrease.pass_rate());
    kv(os, "beta_hat", decrease.beta_hat);
    kv(os, "worst_step", decrease.worst_step);
    kv(os, "l_floor", decrease.l_floor);
    kv(os, "tolerance", decrease.tolerance);
    kv(os, "beta_min", decrease.beta_min);
    os << "\n[terminal_bound]\n";
    kv(os, "gamma", terminal.gamma);
    kv(os, "steps", static_cast<int>(terminal.steps.size()));
    kv(os, "violations", terminal.violations);
    kv(os, "pass_rate", terminal.pass_rate);
    os << "\n[warm_start_dominance]\n";
    kv(os, "checked", dominance.checked);
    kv(os, "violations", dominance.violations);
    kv(os, "worst_excess", dominance.worst_excess);
}

void render_report(std::ostream& os, const ContractionEstimate& contraction) {
    os << "[contraction]\n";
    kv(os, "probes_used", contraction.probes_used);
    kv(os, "probes_skipped", contraction.probes_skipped);
    kv(os, "alpha_hat", contraction.alpha_hat);
    kv(os, "kappa1_hat", contraction.kappa1_hat);
}

void render_report(std::ostream& os, const GammaScalingReport& scaling) {
    os << "[gamma_scaling]\n";
    kv(os, "points", static_cast<int>(scaling.points.size()));
    kv(os, "nonincreasing", scaling.nonincreasing ? 1 : 0);
    kv(os, "fitted_exponent", scaling.fitted_exponent);
    for (const auto& p : scaling.points) {
        os << "max_fc[gamma=" << p.gamma << "]: " << p.max_terminal_derivative << "\n";
    }
}

void write_residuals_csv(std::ostream& os, const DecreaseCheck& decrease,
                         const TerminalBoundCheck& terminal) {
    os << "k,decrease_ratio,decrease_violation,eq17_lhs,eq17_rhs,eq17_slack,eq17_violation\n";
    std::size_t di = 0;
    for (const auto& step : terminal.steps) {
        os << step.k << ",";
        if (di < decrease.steps.size() && decrease.steps[di].k == step.k) {
            os << decrease.steps[di].ratio << "," << (decrease.steps[di].violation ? 1 : 0);
            ++di;
        } else {
            os << ",";
        }
        os << "," << step.lhs << "," << step.rhs << "," << step.slack << ","
           << (step.violation ? 1 : 0) << "\n";
    }
}

}  // namespace nmpc
