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
#include "nmpc/mpc_loop.hpp"

#include <cmath>

namespace nmpc {

MpcController::MpcController(CostSpec spec, ModelSpec model, SolverConfig solver,
                             int horizon)
    : spec_(std::move(spec)), model_(std::move(model)), solver_(std::move(solver)),
      horizon_(horizon) {
    if (horizon_ < 1) {
        throw std::invalid_argument("MpcController: horizon must be >= 1");
    }
    model_.validate();
    spec_.validate(model_);
    solver_.validate();
}

std::pair<Vector, ClosedLoopRecord> MpcController::step(const ExtendedState& z_now) {
    ControlSequence warm;
    double warm_cost;
    ControlSequence start;
    if (previous_) {
        warm = project_box(shift_warm_start(*previous_), model_);
        warm_cost = total_cost(spec_, model_, z_now, warm).total;
        const double prev_cost = total_cost(spec_, model_, z_now, *previous_).total;
        start = (prev_cost < warm_cost) ? *previous_ : warm;
    } else {
        warm.assign(static_cast<std::size_t>(horizon_), z_now.u);
        warm = project_box(std::move(warm), model_);
        warm_cost = total_cost(spec_, model_, z_now, warm).total;
        start = warm;
    }

    OcpSolution sol = solve(spec_, model_, solver_, z_now, start);

    ClosedLoopRecord rec;
    rec.k = k_;
    rec.z_cl = z_now;
    rec.j_star = sol.value;
    rec.stage = stage_cost(spec_, z_now);
    rec.terminal_derivative_norm = std::sqrt(sol.breakdown.terminal_derivative_sq);
    rec.terminal_stage = sol.breakdown.terminal_stage;
    rec.solver_iterations = sol.iterations_used;
    rec.cpu_seconds = sol.wall_time;
    rec.warm_start_cost = warm_cost;
    rec.used_fallback = sol.line_search_failed && sol.iterations_used == 0;

    previous_ = sol.sequence;
    ++k_;
    return {sol.sequence.front(), rec};
}

SimulationResult simulate(const ModelSpec& model, const CostSpec& spec,
                          const SolverConfig& solver, int horizon,
                          const ExtendedState& z0, int steps, TraceMetadata meta) {
    if (steps < 1) {
        throw std::invalid_argument("simulate: steps must be >= 1");
    }
    SimulationResult result;
    result.trace.meta = std::move(meta);
    result.trace.records.reserve(static_cast<std::size_t>(steps));

    MpcController controller(spec, model, solver, horizon);
    ExtendedState z = z0;
    for (int k = 0; k < steps; ++k) {
        try {
            auto [u_next, rec] = controller.step(z);
            result.trace.records.push_back(std::move(rec));
            z = extended_step(model, z, u_next);
        } catch (const std::exception& e) {
            result.failed = true;
            result.failed_step = k;
            result.error = e.what();
            break;
        }
    }
    return result;
}

}  // namespace nmpc
