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
#ifndef NMPC_COST_HPP
#define NMPC_COST_HPP

#include "nmpc/dynamics.hpp"

#include <cstdint>

namespace nmpc {

/// One soft state constraint g(x, u) <= 0, charged as rho * max(0, g).
struct SoftConstraint {
    std::string label;
    double rho = 1e3;
    std::function<double(const Vector&, const Vector&)> g;
    /// Fills d g/dx and d g/du (one-sided at nonsmooth points).
    std::function<void(const Vector&, const Vector&, Vector&, Vector&)> gradient;
};

/// Builds the penalty |x[index]| <= limit on a single state channel.
SoftConstraint abs_state_limit(std::string label, int index, double limit, double rho);

/**
 * @brief Terminal-cost selector.
 *
 * nominal:          conventional quadratic terminal penalty, gamma == 0.
 * full:             gamma^2 ||f_c(z_N)||^2 + gamma * l(z_N).
 * no_derivative:    gamma * l(z_N) only.
 * steady_surrogate: mu * ||f_c(z_N)||^2; internal variant used by the
 *                   contraction probes, not reachable from configs.
 */
enum class Variant { nominal, full, no_derivative, steady_surrogate };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);  // throws on unknown names

struct CostSpec {
    Variant variant = Variant::full;
    double gamma = 0.0;         // terminal weight; 0 iff variant == nominal
    double surrogate_mu = 1e6;  // read only by Variant::steady_surrogate
    Vector q;                   // diagonal of Q
    Vector r;                   // diagonal of R
    Vector qf;                  // diagonal of Q_f (conventional terminal)
    Vector x_ref;
    Vector u_d;
    std::vector<SoftConstraint> soft_constraints;

    void validate(const ModelSpec& model) const;
};

struct CostBreakdown {
    double total = 0.0;
    double terminal_phi = 0.0;           // active-variant terminal value
    double cumulated_stage = 0.0;        // S = sum_{i=0..N} l(z_i)
    double terminal_derivative_sq = 0.0; // ||f_c(z_N)||^2
    double terminal_stage = 0.0;         // l(z_N)
    double conventional_terminal = 0.0;  // Psi_f(x_N), reported for every variant
};

/// Quadratic tracking term plus exact penalties; nonnegative, zero only at
/// the reference pair with every soft constraint satisfied.
double stage_cost(const CostSpec& spec, const ExtendedState& z);

/// Subgradient of the stage cost. Penalties contribute only where g > 0.
void stage_cost_gradient(const CostSpec& spec, const ExtendedState& z,
                         Vector& gx, Vector& gu);

/// Terminal value of the active variant at z_N.
double terminal_phi(const CostSpec& spec, const ModelSpec& model, const ExtendedState& z_N);

/**
 * @brief Rolls out seq from z and evaluates the full cost.
 *
 * The stage sum runs over all N+1 trajectory points, including the fixed
 * initial one. If active_signature is non-null it receives a hash of the set
 * of active penalties along the trajectory.
 */
CostBreakdown total_cost(const CostSpec& spec, const ModelSpec& model,
                         const ExtendedState& z, const ControlSequence& seq,
                         std::uint64_t* active_signature = nullptr);

/**
 * @brief dJ/dseq by reverse accumulation through the RK4 steps.
 *
 * grad is resized to N entries of length m. Returns the same breakdown as
 * total_cost for the rolled-out trajectory.
 */
CostBreakdown cost_gradient(const CostSpec& spec, const ModelSpec& model,
                            const ExtendedState& z, const ControlSequence& seq,
                            std::vector<Vector>& grad,
                            std::uint64_t* active_signature = nullptr);

/// Distance of a trajectory to the nearest penalty kink: min_{i,j} |g_j(z_i)|.
/// Returns +inf when the spec has no soft constraints.
double penalty_kink_distance(const CostSpec& spec, const Trajectory& traj);

/// Breakdown of an already rolled-out trajectory (no re-simulation).
CostBreakdown cost_of_trajectory(const CostSpec& spec, const ModelSpec& model,
                                 const Trajectory& traj);

/// Hash of the set of active penalties along a trajectory; the solver resets
/// curvature information when it changes.
std::uint64_t active_penalty_signature(const CostSpec& spec, const Trajectory& traj);

}  // namespace nmpc

#endif  // NMPC_COST_HPP
