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
#include "nmpc/dynamics.hpp"

#include <sstream>

namespace nmpc {

void ModelSpec::validate() const {
    if (state_dim < 1 || control_dim < 1) {
        throw std::invalid_argument("ModelSpec: state_dim and control_dim must be >= 1");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("ModelSpec: sampling period tau must be positive");
    }
    if (!fc) {
        throw std::invalid_argument("ModelSpec: continuous dynamics fc is not set");
    }
    if (control_lower.size() != control_dim || control_upper.size() != control_dim) {
        throw std::invalid_argument("ModelSpec: control box dimensions do not match control_dim");
    }
    for (int j = 0; j < control_dim; ++j) {
        if (!(control_lower[j] < control_upper[j])) {
            throw std::invalid_argument("ModelSpec: control box must satisfy lower < upper per channel");
        }
    }
    if (substeps < 1) {
        throw std::invalid_argument("ModelSpec: substeps must be >= 1");
    }
}

namespace {

void throw_overflow(const ModelSpec& model, const Vector& x, const Vector& u) {
    std::ostringstream msg;
    msg << "integration overflow in model '" << model.name
        << "': non-finite state after RK4 step (|x|=" << x.norm()
        << ", |u|=" << u.norm() << ")";
    throw IntegrationOverflowError(msg.str());
}

}  // namespace

Vector rk4_step_h(const ModelSpec& model, const Vector& x, const Vector& u, double h) {
    const Vector k1 = model.fc(x, u);
    const Vector k2 = model.fc(x + 0.5 * h * k1, u);
    const Vector k3 = model.fc(x + 0.5 * h * k2, u);
    const Vector k4 = model.fc(x + h * k3, u);
    Vector next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw_overflow(model, x, u);
    }
    return next;
}

Vector rk4_step(const ModelSpec& model, const Vector& x, const Vector& u) {
    const double h = model.tau / model.substeps;
    Vector next = x;
    for (int s = 0; s < model.substeps; ++s) {
        next = rk4_step_h(model, next, u, h);
    }
    return next;
}

Vector integrate_zoh(const ModelSpec& model, Vector x, const Vector& u,
                     double horizon, int substeps) {
    if (substeps < 1) {
        throw std::invalid_argument("integrate_zoh: substeps must be >= 1");
    }
    const double h = horizon / static_cast<double>(substeps);
    for (int i = 0; i < substeps; ++i) {
        x = rk4_step_h(model, x, u, h);
    }
    return x;
}

namespace {

void rk4_substep_jacobians(const ModelSpec& model, const Vector& x, const Vector& u,
                           double h, Matrix& dx_next_dx, Matrix& dx_next_du) {
    const int n = model.state_dim;
    const int m = model.control_dim;

    Matrix A(n, n), B(n, m);
    const Matrix eye = Matrix::Identity(n, n);

    // Stage values and their sensitivities, chained in evaluation order.
    const Vector k1 = model.fc(x, u);
    model.fc_jacobians(x, u, A, B);
    Matrix dk1_dx = A;
    Matrix dk1_du = B;

    const Vector x2 = x + 0.5 * h * k1;
    const Vector k2 = model.fc(x2, u);
    model.fc_jacobians(x2, u, A, B);
    Matrix dk2_dx = A * (eye + 0.5 * h * dk1_dx);
    Matrix dk2_du = A * (0.5 * h * dk1_du) + B;

    const Vector x3 = x + 0.5 * h * k2;
    model.fc_jacobians(x3, u, A, B);
    Matrix dk3_dx = A * (eye + 0.5 * h * dk2_dx);
    Matrix dk3_du = A * (0.5 * h * dk2_du) + B;

    const Vector k3 = model.fc(x3, u);
    const Vector x4 = x + h * k3;
    model.fc_jacobians(x4, u, A, B);
    Matrix dk4_dx = A * (eye + h * dk3_dx);
    Matrix dk4_du = A * (h * dk3_du) + B;

    dx_next_dx = eye + (h / 6.0) * (dk1_dx + 2.0 * dk2_dx + 2.0 * dk3_dx + dk4_dx);
    dx_next_du = (h / 6.0) * (dk1_du + 2.0 * dk2_du + 2.0 * dk3_du + dk4_du);
}

}  // namespace

void rk4_step_jacobians(const ModelSpec& model, const Vector& x, const Vector& u,
                        Matrix& dx_next_dx, Matrix& dx_next_du) {
    if (!model.fc_jacobians) {
        throw std::invalid_argument("rk4_step_jacobians: model has no fc_jacobians");
    }
    const int n = model.state_dim;
    const int m = model.control_dim;
    const double h = model.tau / model.substeps;

    dx_next_dx = Matrix::Identity(n, n);
    dx_next_du = Matrix::Zero(n, m);
    Matrix A(n, n), B(n, m);
    Vector x_cur = x;
    for (int s = 0; s < model.substeps; ++s) {
        rk4_substep_jacobians(model, x_cur, u, h, A, B);
        dx_next_du = A * dx_next_du + B;
        dx_next_dx = A * dx_next_dx;
        if (s + 1 < model.substeps) {
            x_cur = rk4_step_h(model, x_cur, u, h);
        }
    }
}

ExtendedState extended_step(const ModelSpec& model, const ExtendedState& z,
                            const Vector& u_next) {
    return ExtendedState{rk4_step(model, z.x, z.u), u_next};
}

Trajectory rollout(const ModelSpec& model, const ExtendedState& z,
                   const ControlSequence& seq) {
    Trajectory traj;
    traj.reserve(seq.size() + 1);
    traj.push_back(z);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        try {
            traj.push_back(extended_step(model, traj.back(), seq[i]));
        } catch (const IntegrationOverflowError& e) {
            throw IntegrationOverflowError(
                std::string(e.what()) + " at rollout step " + std::to_string(i),
                static_cast<int>(i));
        }
    }
    return traj;
}

}  // namespace nmpc
