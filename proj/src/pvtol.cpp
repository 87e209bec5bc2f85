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
#include "nmpc/pvtol.hpp"

#include <cmath>

namespace nmpc {
namespace pvtol {

Vector Scenario::hover_control() {
    Vector u(kControlDim);
    u << 1.0, 0.0;
    return u;
}

Vector fc(const Params& params, const Vector& x, const Vector& u) {
    const double theta = x[kTheta];
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    Vector dx(kStateDim);
    dx[kY1] = x[kY1Dot];
    dx[kY2] = x[kY2Dot];
    dx[kTheta] = x[kThetaDot];
    dx[kY1Dot] = -u[0] * s + params.mu * u[1] * c;
    dx[kY2Dot] = u[0] * c + params.mu * u[1] * s - 1.0;
    dx[kThetaDot] = u[1];
    return dx;
}

void fc_jacobians(const Params& params, const Vector& x, const Vector& u,
                  Matrix& jx, Matrix& ju) {
    const double theta = x[kTheta];
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    jx.setZero(kStateDim, kStateDim);
    ju.setZero(kStateDim, kControlDim);

    jx(kY1, kY1Dot) = 1.0;
    jx(kY2, kY2Dot) = 1.0;
    jx(kTheta, kThetaDot) = 1.0;
    jx(kY1Dot, kTheta) = -u[0] * c - params.mu * u[1] * s;
    jx(kY2Dot, kTheta) = -u[0] * s + params.mu * u[1] * c;

    ju(kY1Dot, 0) = -s;
    ju(kY1Dot, 1) = params.mu * c;
    ju(kY2Dot, 0) = c;
    ju(kY2Dot, 1) = params.mu * s;
    ju(kThetaDot, 1) = 1.0;
}

ModelSpec model(const Params& params) {
    ModelSpec m;
    m.name = "pvtol";
    m.state_dim = kStateDim;
    m.control_dim = kControlDim;
    m.tau = params.tau;
    m.fc = [params](const Vector& x, const Vector& u) { return fc(params, x, u); };
    m.fc_jacobians = [params](const Vector& x, const Vector& u, Matrix& jx, Matrix& ju) {
        fc_jacobians(params, x, u, jx, ju);
    };
    m.control_lower = Vector(kControlDim);
    m.control_lower << params.u1_min, params.u2_min;
    m.control_upper = Vector(kControlDim);
    m.control_upper << params.u1_max, params.u2_max;
    m.validate();
    return m;
}

CostSpec cost(const Params& params, const Scenario& scenario, Variant variant,
              double gamma) {
    CostSpec spec;
    spec.variant = variant;
    spec.gamma = gamma;
    spec.q = Vector(kStateDim);
    spec.q << 100.0, 10.0, 10.0, 1.0, 1.0, 1.0;
    spec.r = Vector::Ones(kControlDim);
    spec.qf = 100.0 * spec.q;
    spec.x_ref = Vector::Zero(kStateDim);
    spec.x_ref[kY1] = scenario.d;
    spec.x_ref[kY2] = scenario.d;
    spec.u_d = Scenario::hover_control();

    if (params.limit_y1dot) {
        spec.soft_constraints.push_back(
            abs_state_limit("y1dot", kY1Dot, params.velocity_limit, params.penalty_rho));
    }
    if (params.limit_y2dot) {
        spec.soft_constraints.push_back(
            abs_state_limit("y2dot", kY2Dot, params.velocity_limit, params.penalty_rho));
    }
    spec.soft_constraints.push_back(
        abs_state_limit("thetadot", kThetaDot, params.rate_limit, params.penalty_rho));
    return spec;
}

ExtendedState initial_state(const Scenario& scenario) {
    return ExtendedState{scenario.x0, scenario.u0};
}

const std::vector<double>& paper_targets() {
    static const std::vector<double> targets = {0.2, 0.5, 1.0, 2.0};
    return targets;
}

const std::vector<double>& paper_gammas() {
    static const std::vector<double> gammas = {1.0, 5.0, 50.0, 100.0, 1000.0, 5000.0};
    return gammas;
}

double max_position_increment_per_horizon(const Params& params) {
    return params.velocity_limit * params.horizon * params.tau;
}

}  // namespace pvtol
}  // namespace nmpc
