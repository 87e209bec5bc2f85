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
#ifndef NMPC_OCP_SOLVER_HPP
#define NMPC_OCP_SOLVER_HPP

#include "nmpc/cost.hpp"

namespace nmpc {

/// Thrown when the warm-start sequence evaluates to a non-finite cost.
class InvalidWarmStartError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iteration flavor. gauss_newton assembles the positive-semidefinite
/// Gauss-Newton model of the cost through forward sensitivities and takes
/// damped two-metric projected steps; its per-iteration quality is comparable
/// with an interior-point iteration, which the real-time cap presumes. lbfgs
/// is the cheaper projected limited-memory quasi-Newton fallback.
enum class SolverMethod { gauss_newton, lbfgs };

struct SolverConfig {
    SolverMethod method = SolverMethod::gauss_newton;
    int max_iterations = 15;     // real-time iteration cap
    int memory_size = 8;         // quasi-Newton pair memory (lbfgs)
    double armijo_c1 = 1e-4;     // sufficient-decrease coefficient
    double backtrack_factor = 0.5;
    double gradient_tolerance = 1e-8;  // on the projected-gradient inf norm
    int max_linesearch_steps = 40;

    void validate() const;
};

struct OcpSolution {
    ControlSequence sequence;
    double value = 0.0;  // J* at the returned sequence
    CostBreakdown breakdown;
    int iterations_used = 0;
    bool converged = false;          // projected-gradient tolerance reached
    bool line_search_failed = false; // stopped because no step gave decrease
    double wall_time = 0.0;          // seconds spent inside solve()
};

/// Per-channel clamp of every element into the model's control box.
ControlSequence project_box(ControlSequence seq, const ModelSpec& model);

/// (u_1, ..., u_N) -> (u_2, ..., u_N, u_N): drop the head, duplicate the tail.
ControlSequence shift_warm_start(const ControlSequence& prev);

/**
 * @brief Iteration-capped box-constrained minimization of the cost over the
 * control sequence.
 *
 * Projected limited-memory quasi-Newton with Armijo backtracking. Every
 * iterate is box-projected; accepted objective values are nonincreasing, so
 * the returned value never exceeds the warm start's cost. Quasi-Newton memory
 * is reset whenever the set of active penalties changes. Deterministic for
 * identical inputs.
 */
OcpSolution solve(const CostSpec& spec, const ModelSpec& model,
                  const SolverConfig& solver, const ExtendedState& z,
                  const ControlSequence& warm_start);

}  // namespace nmpc

#endif  // NMPC_OCP_SOLVER_HPP
