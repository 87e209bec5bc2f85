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
#ifndef NMPC_MPC_LOOP_HPP
#define NMPC_MPC_LOOP_HPP

#include "nmpc/ocp_solver.hpp"

#include <cstdint>
#include <optional>

namespace nmpc {

struct ClosedLoopRecord {
    int k = 0;
    ExtendedState z_cl;
    double j_star = 0.0;
    double stage = 0.0;                    // l(z_cl)
    double terminal_derivative_norm = 0.0; // ||f_c(z*_N)||
    double terminal_stage = 0.0;           // l(z*_N)
    int solver_iterations = 0;
    double cpu_seconds = 0.0;              // wall time of the solve only
    /// Cost of the shifted previous sequence at this state (the Eq.-(19)
    /// candidate); the dominance certificate compares j_star against it.
    double warm_start_cost = 0.0;
    /// True when the line search made no progress and the warm start was
    /// applied open-loop for this step.
    bool used_fallback = false;
};

struct TraceMetadata {
    std::string model = "pvtol";
    std::string variant = "full";
    double gamma = 0.0;
    double d = 0.0;
    int horizon = 0;
    double tau = 0.0;
    int steps = 0;
    std::uint64_t seed = 0;
};

struct ClosedLoopTrace {
    TraceMetadata meta;
    std::vector<ClosedLoopRecord> records;
};

/**
 * @brief Stateful receding-horizon controller.
 *
 * step(z_now) solves P(z_now) and returns the first optimal move, to be
 * applied over the NEXT sampling interval per the delayed scheme. The first
 * call cold-starts from a constant sequence filled with z_now.u; later calls
 * warm-start from the shifted previous solution (last element duplicated).
 * The unshifted previous sequence is also evaluated and the cheaper of the
 * two candidates seeds the solver, so re-solving a frozen state never gets
 * worse.
 */
class MpcController {
public:
    MpcController(CostSpec spec, ModelSpec model, SolverConfig solver, int horizon);

    std::pair<Vector, ClosedLoopRecord> step(const ExtendedState& z_now);

    const CostSpec& cost_spec() const { return spec_; }
    const ModelSpec& model() const { return model_; }
    int horizon() const { return horizon_; }

private:
    CostSpec spec_;
    ModelSpec model_;
    SolverConfig solver_;
    int horizon_;
    std::optional<ControlSequence> previous_;
    int k_ = 0;
};

struct SimulationResult {
    ClosedLoopTrace trace;  // on failure: the trace up to the failing step
    bool failed = false;
    int failed_step = -1;
    std::string error;
};

/**
 * @brief Closed-loop simulation with a one-step computational delay.
 *
 * The plant advances under the currently applied control while the controller
 * computes the move for the following interval: z_{k+1} = F(z_k, u*_1(z_k)).
 * The trace holds `steps` records, z_cl of record k being the pre-update
 * state z_k.
 */
SimulationResult simulate(const ModelSpec& model, const CostSpec& spec,
                          const SolverConfig& solver, int horizon,
                          const ExtendedState& z0, int steps,
                          TraceMetadata meta = {});

}  // namespace nmpc

#endif  // NMPC_MPC_LOOP_HPP
