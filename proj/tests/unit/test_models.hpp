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
#ifndef NMPC_TESTS_TEST_MODELS_HPP
#define NMPC_TESTS_TEST_MODELS_HPP

#include "nmpc/dynamics.hpp"

namespace nmpc_tests {

/// xdot = 0: every state is a fixed point.
inline nmpc::ModelSpec zero_field_model(int n = 2, int m = 1, double tau = 0.1) {
    nmpc::ModelSpec model;
    model.name = "zero_field";
    model.state_dim = n;
    model.control_dim = m;
    model.tau = tau;
    model.fc = [n](const nmpc::Vector&, const nmpc::Vector&) {
        return nmpc::Vector::Zero(n).eval();
    };
    model.fc_jacobians = [n, m](const nmpc::Vector&, const nmpc::Vector&,
                                nmpc::Matrix& jx, nmpc::Matrix& ju) {
        jx.setZero(n, n);
        ju.setZero(n, m);
    };
    model.control_lower = nmpc::Vector::Constant(m, -10.0);
    model.control_upper = nmpc::Vector::Constant(m, 10.0);
    return model;
}

/// Scalar exponential decay xdot = -x (closed-form oracle exp(-t)).
inline nmpc::ModelSpec decay_model(double tau = 0.1) {
    nmpc::ModelSpec model;
    model.name = "decay";
    model.state_dim = 1;
    model.control_dim = 1;
    model.tau = tau;
    model.fc = [](const nmpc::Vector& x, const nmpc::Vector&) {
        return (-x).eval();
    };
    model.fc_jacobians = [](const nmpc::Vector&, const nmpc::Vector&,
                            nmpc::Matrix& jx, nmpc::Matrix& ju) {
        jx = -nmpc::Matrix::Identity(1, 1);
        ju.setZero(1, 1);
    };
    model.control_lower = nmpc::Vector::Constant(1, -1.0);
    model.control_upper = nmpc::Vector::Constant(1, 1.0);
    return model;
}

/// Double integrator xdot = (x2, u); RK4 reproduces the exact discrete map.
inline nmpc::ModelSpec double_integrator_model(double tau = 0.1,
                                               double u_max = 5.0) {
    nmpc::ModelSpec model;
    model.name = "double_integrator";
    model.state_dim = 2;
    model.control_dim = 1;
    model.tau = tau;
    model.fc = [](const nmpc::Vector& x, const nmpc::Vector& u) {
        nmpc::Vector dx(2);
        dx << x[1], u[0];
        return dx;
    };
    model.fc_jacobians = [](const nmpc::Vector&, const nmpc::Vector&,
                            nmpc::Matrix& jx, nmpc::Matrix& ju) {
        jx.setZero(2, 2);
        jx(0, 1) = 1.0;
        ju.setZero(2, 1);
        ju(1, 0) = 1.0;
    };
    model.control_lower = nmpc::Vector::Constant(1, -u_max);
    model.control_upper = nmpc::Vector::Constant(1, u_max);
    return model;
}

/// Quadratic cost with no soft constraints around the origin.
inline nmpc::CostSpec double_integrator_cost();

}  // namespace nmpc_tests

#include "nmpc/cost.hpp"

namespace nmpc_tests {

inline nmpc::CostSpec double_integrator_cost() {
    nmpc::CostSpec spec;
    spec.variant = nmpc::Variant::nominal;
    spec.gamma = 0.0;
    spec.q = nmpc::Vector(2);
    spec.q << 1.0, 0.5;
    spec.r = nmpc::Vector::Constant(1, 0.1);
    spec.qf = nmpc::Vector(2);
    spec.qf << 4.0, 2.0;
    spec.x_ref = nmpc::Vector::Zero(2);
    spec.u_d = nmpc::Vector::Zero(1);
    return spec;
}

}  // namespace nmpc_tests

#endif  // NMPC_TESTS_TEST_MODELS_HPP
