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
#ifndef NMPC_CERTIFICATES_HPP
#define NMPC_CERTIFICATES_HPP

#include "nmpc/mpc_loop.hpp"

#include <iosfwd>

namespace nmpc {

/// Default "sufficiently small neighbourhood": stage costs below this floor
/// are excluded from ratio checks.
inline constexpr double kDefaultStageFloor = 1e-3;

/// Per-step optimal-cost decrease check: r_k = (J*_{k+1} - J*_k) / l(z_k)
/// must stay below -beta_min (+ tolerance) wherever l(z_k) > l_floor.
struct DecreaseCheck {
    struct Step {
        int k = 0;
        double ratio = 0.0;
        bool violation = false;
    };
    std::vector<Step> steps;
    int checked = 0;
    int violations = 0;
    int worst_step = -1;     // step with the largest ratio
    double beta_hat = 0.0;   // -max ratio over checked steps; NaN when none
    double l_floor = kDefaultStageFloor;
    double tolerance = 1e-6;
    double beta_min = 0.0;

    double pass_rate() const;
};

DecreaseCheck check_decrease(const ClosedLoopTrace& trace,
                             double l_floor = kDefaultStageFloor,
                             double tolerance = 1e-6, double beta_min = 0.0);

/// Terminal-derivative bound: ||f_c(z*_N)|| <= sqrt(l(z*_N) / gamma) per step
/// (self-contained, no unknown constants), plus the per-step lower bound on
/// gamma*alpha + kappa_1 implied by the squared-norm inequality (diagnostic).
struct TerminalBoundCheck {
    struct Step {
        int k = 0;
        double lhs = 0.0;    // ||f_c(z*_N)||
        double rhs = 0.0;    // sqrt(l(z*_N) / gamma)
        double slack = 0.0;  // rhs - lhs; negative means flagged
        bool violation = false;
        double implied_gamma_alpha_kappa = 0.0;  // gamma^2 lhs^2 / l(z_k), 0 below floor
    };
    std::vector<Step> steps;
    int violations = 0;
    double pass_rate = 1.0;
    double gamma = 0.0;
};

TerminalBoundCheck check_terminal_bounds(const ClosedLoopTrace& trace, double gamma,
                                         double l_floor = kDefaultStageFloor,
                                         double abs_tolerance = 1e-12);

/// Warm-start dominance J*(z_k) <= J(candidate | z_k) + tolerance, using the
/// shifted-candidate cost recorded per step.
struct DominanceCheck {
    int checked = 0;
    int violations = 0;
    double worst_excess = 0.0;  // max of j_star - warm_start_cost
};

DominanceCheck check_warm_start_dominance(const ClosedLoopTrace& trace,
                                          double tolerance = 1e-9);

/// Empirical estimates of the contraction and cumulated-cost constants from
/// steady-terminal surrogate solves.
struct ContractionEstimate {
    struct Probe {
        double stage0 = 0.0;            // l(z) at the probe
        double alpha_ratio = 0.0;       // l(z_N) / l(z)
        double kappa_ratio = 0.0;       // S / l(z)
        double terminal_fc_norm = 0.0;  // achieved ||f_c(z_N)||
        bool accepted = false;
    };
    std::vector<Probe> probes;
    int probes_used = 0;
    int probes_skipped = 0;
    double alpha_hat = 0.0;   // max accepted alpha_ratio; NaN when none
    double kappa1_hat = 0.0;  // max accepted kappa_ratio; NaN when none
};

/**
 * @brief Solves min_u S(u|z) + mu_eq * ||f_c(z_N)||^2 per probe and records
 * the contraction ratios.
 *
 * Probes with l(z) <= l_floor violate the precondition and throw. Probes
 * whose surrogate solution misses the stationarity threshold are skipped and
 * counted. Pass a generous iteration budget in `solver`: the surrogate is an
 * offline analysis, not a real-time solve.
 */
ContractionEstimate estimate_contraction(const ModelSpec& model, const CostSpec& spec,
                                         const SolverConfig& solver, int horizon,
                                         const std::vector<ExtendedState>& probes,
                                         double mu_eq = 1e6,
                                         double stationary_tol = 1e-4,
                                         double l_floor = kDefaultStageFloor);

/// Trend of max ||f_c(z*_N)|| across traces that differ only in gamma.
struct GammaScalingReport {
    struct Point {
        double gamma = 0.0;
        double max_terminal_derivative = 0.0;
    };
    std::vector<Point> points;  // sorted by gamma
    bool nonincreasing = false;
    double fitted_exponent = 0.0;  // slope of log(max fc) vs log(gamma)
};

GammaScalingReport gamma_scaling_probe(const std::vector<ClosedLoopTrace>& traces);

/// Key: value text blocks, one per check.
void render_report(std::ostream& os, const DecreaseCheck& decrease,
                   const TerminalBoundCheck& terminal, const DominanceCheck& dominance);
void render_report(std::ostream& os, const ContractionEstimate& contraction);
void render_report(std::ostream& os, const GammaScalingReport& scaling);

/// Per-step residual CSV: k, decrease_ratio, decrease_violation, eq17_lhs,
/// eq17_rhs, eq17_slack, eq17_violation.
void write_residuals_csv(std::ostream& os, const DecreaseCheck& decrease,
                         const TerminalBoundCheck& terminal);

}  // namespace nmpc

#endif  // NMPC_CERTIFICATES_HPP
