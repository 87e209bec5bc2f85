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
#ifndef NMPC_DYNAMICS_HPP
#define NMPC_DYNAMICS_HPP

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a state propagation produces a non-finite value.
class IntegrationOverflowError : public std::runtime_error {
public:
    explicit IntegrationOverflowError(const std::string& what, int step = -1)
        : std::runtime_error(what), step_(step) {}

    /// Rollout index at which the overflow occurred; -1 outside a rollout.
    int step() const noexcept { return step_; }

private:
    int step_;
};

/**
 * @brief Continuous-time model with box-constrained inputs and a fixed
 * sampling period.
 *
 * `fc` maps (x, u) to dx/dt. `fc_jacobians` fills the partial derivatives of
 * fc with respect to x and u; it is hand-derived per model (no automatic
 * differentiation of black-box dynamics).
 */
struct ModelSpec {
    std::string name;
    int state_dim = 0;
    int control_dim = 0;
    double tau = 0.0;
    /// Internal RK4 sub-steps per sampling interval. Two keep the one-step
    /// map within 1e-8 of the flow for the benchmark scales at tau = 0.1.
    int substeps = 2;
    std::function<Vector(const Vector&, const Vector&)> fc;
    std::function<void(const Vector&, const Vector&, Matrix&, Matrix&)> fc_jacobians;
    Vector control_lower;
    Vector control_upper;

    /// Throws std::invalid_argument if the spec is inconsistent.
    void validate() const;
};

/// Plant state paired with the control currently being applied.
struct ExtendedState {
    Vector x;
    Vector u;
};

/// Decision variable of the optimal control problem: N future controls.
using ControlSequence = std::vector<Vector>;

/// N+1 extended states produced by rollout().
using Trajectory = std::vector<ExtendedState>;

/// Advances x by one sampling period under constant control: model.substeps
/// classical RK4 sub-steps of size tau/substeps. Throws
/// IntegrationOverflowError if the result is not finite.
Vector rk4_step(const ModelSpec& model, const Vector& x, const Vector& u);

/// RK4 step with an explicit step size (order studies, reference solutions).
Vector rk4_step_h(const ModelSpec& model, const Vector& x, const Vector& u, double h);

/// Integrate over a window of length `horizon` with `substeps` equal RK4
/// steps, holding u constant.
Vector integrate_zoh(const ModelSpec& model, Vector x, const Vector& u,
                     double horizon, int substeps);

/// Jacobians of one rk4_step with respect to x and u, chained through the
/// four stages. dx_next_dx is n-by-n, dx_next_du is n-by-m.
void rk4_step_jacobians(const ModelSpec& model, const Vector& x, const Vector& u,
                        Matrix& dx_next_dx, Matrix& dx_next_du);

/// z+ = (f(z), u_next): the state advances under the *stored* control and the
/// new extended state carries the control that drives the next interval.
ExtendedState extended_step(const ModelSpec& model, const ExtendedState& z,
                            const Vector& u_next);

/// Open-loop rollout. Element 0 is z; element i+1 = extended_step(element i,
/// seq[i]). Overflow errors are rethrown with the failing index attached.
Trajectory rollout(const ModelSpec& model, const ExtendedState& z,
                   const ControlSequence& seq);

}  // namespace nmpc

#endif  // NMPC_DYNAMICS_HPP
