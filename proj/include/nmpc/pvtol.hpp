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
#ifndef NMPC_PVTOL_HPP
#define NMPC_PVTOL_HPP

#include "nmpc/cost.hpp"

namespace nmpc {
namespace pvtol {

// State ordering: x = (y1, y2, theta, y1dot, y2dot, thetadot).
inline constexpr int kY1 = 0;
inline constexpr int kY2 = 1;
inline constexpr int kTheta = 2;
inline constexpr int kY1Dot = 3;
inline constexpr int kY2Dot = 4;
inline constexpr int kThetaDot = 5;

inline constexpr int kStateDim = 6;
inline constexpr int kControlDim = 2;

/// Normalized planar VTOL aircraft parameters and published constraint data.
struct Params {
    double mu = 0.4;  // roll/translation coupling coefficient

    double u1_min = -1.5, u1_max = 1.5;
    double u2_min = -0.5, u2_max = 0.5;

    double velocity_limit = 0.3;  // soft |y1dot|, |y2dot| bound
    bool limit_y1dot = true;      // which translational channels carry the bound
    bool limit_y2dot = true;
    double rate_limit = 0.2;      // soft |thetadot| bound
    double penalty_rho = 1e3;

    double tau = 0.1;
    int horizon = 15;  // N
};

/// One regulation task: drive x from x0 to (d, d, 0, 0, 0, 0).
struct Scenario {
    double d = 0.2;
    int steps = 300;
    Vector x0 = Vector::Zero(kStateDim);
    Vector u0 = hover_control();  // control applied over the first interval

    static Vector hover_control();  // (1, 0): the unique steady control at theta = 0
};

/// Continuous dynamics (y1dot, y2dot, thetadot, y1ddot, y2ddot, thetaddot).
Vector fc(const Params& params, const Vector& x, const Vector& u);

/// Hand-derived partials of fc.
void fc_jacobians(const Params& params, const Vector& x, const Vector& u,
                  Matrix& jx, Matrix& ju);

ModelSpec model(const Params& params = {});

/// Published weights: Q = diag(100, 10, 10, 1, 1, 1), R = I, Q_f = 100 Q,
/// soft velocity/rate penalties with the configured rho.
CostSpec cost(const Params& params, const Scenario& scenario, Variant variant,
              double gamma);

ExtendedState initial_state(const Scenario& scenario);

/// Target offsets and terminal-weight sweep values of the published study.
const std::vector<double>& paper_targets();
const std::vector<double>& paper_gammas();

/// With |y_dot| <= limit over a horizon of N*tau seconds, the position can
/// change by at most limit * N * tau (0.45 for the published settings), so
/// d = 0.2 is horizon-reachable while d in {1.0, 2.0} is not.
double max_position_increment_per_horizon(const Params& params);

}  // namespace pvtol
}  // namespace nmpc

#endif  // NMPC_PVTOL_HPP
