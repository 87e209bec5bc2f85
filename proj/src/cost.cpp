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
#include "nmpc/cost.hpp"

#include <cmath>
#include <limits>

namespace nmpc {

SoftConstraint abs_state_limit(std::string label, int index, double limit, double rho) {
    SoftConstraint c;
    c.label = std::move(label);
    c.rho = rho;
    c.g = [index, limit](const Vector& x, const Vector&) {
        return std::abs(x[index]) - limit;
    };
    c.gradient = [index](const Vector& x, const Vector& u, Vector& gx, Vector& gu) {
        gx.setZero(x.size());
        gu.setZero(u.size());
        gx[index] = (x[index] >= 0.0) ? 1.0 : -1.0;
    };
    return c;
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::nominal: return "nominal";
        case Variant::full: return "full";
        case Variant::no_derivative: return "no_derivative";
        case Variant::steady_surrogate: return "steady_surrogate";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "nominal") return Variant::nominal;
    if (name == "full") return Variant::full;
    if (name == "no_derivative" || name == "no-deriv" || name == "no_deriv") {
        return Variant::no_derivative;
    }
    throw std::invalid_argument("unknown cost variant '" + name + "'");
}

void CostSpec::validate(const ModelSpec& model) const {
    if (gamma < 0.0) {
        throw std::invalid_argument("CostSpec: gamma must be nonnegative");
    }
    const bool zero_gamma = (gamma == 0.0);
    if (variant == Variant::nominal && !zero_gamma) {
        throw std::invalid_argument("CostSpec: variant nominal requires gamma == 0");
    }
    if (variant != Variant::nominal && variant != Variant::steady_surrogate && zero_gamma) {
        throw std::invalid_argument("CostSpec: gamma == 0 requires variant nominal");
    }
    if (q.size() != model.state_dim || qf.size() != model.state_dim ||
        x_ref.size() != model.state_dim) {
        throw std::invalid_argument("CostSpec: state-weight/reference dimensions do not match model");
    }
    if (r.size() != model.control_dim || u_d.size() != model.control_dim) {
        throw std::invalid_argument("CostSpec: control-weight/reference dimensions do not match model");
    }
    if ((q.array() < 0.0).any() || (r.array() < 0.0).any() || (qf.array() < 0.0).any()) {
        throw std::invalid_argument("CostSpec: Q, R, Q_f entries must be nonnegative");
    }
    for (const auto& c : soft_constraints) {
        if (!(c.rho > 0.0)) {
            throw std::invalid_argument("CostSpec: penalty weight rho must be positive");
        }
        if (!c.g || !c.gradient) {
            throw std::invalid_argument("CostSpec: soft constraint '" + c.label + "' is incomplete");
        }
    }
}

double stage_cost(const CostSpec& spec, const ExtendedState& z) {
    const Vector dx = z.x - spec.x_ref;
    const Vector du = z.u - spec.u_d;
    double value = dx.dot(spec.q.asDiagonal() * dx) + du.dot(spec.r.asDiagonal() * du);
    for (const auto& c : spec.soft_constraints) {
        const double violation = c.g(z.x, z.u);
        if (violation > 0.0) {
            value += c.rho * violation;
        }
    }
    return value;
}

void stage_cost_gradient(const CostSpec& spec, const ExtendedState& z,
                         Vector& gx, Vector& gu) {
    gx = 2.0 * (spec.q.asDiagonal() * (z.x - spec.x_ref));
    gu = 2.0 * (spec.r.asDiagonal() * (z.u - spec.u_d));
    Vector cgx, cgu;
    for (const auto& c : spec.soft_constraints) {
        if (c.g(z.x, z.u) > 0.0) {
            c.gradient(z.x, z.u, cgx, cgu);
            gx += c.rho * cgx;
            gu += c.rho * cgu;
        }
    }
}

namespace {

double conventional_terminal(const CostSpec& spec, const Vector& x_N) {
    const Vector dx = x_N - spec.x_ref;
    return dx.dot(spec.qf.asDiagonal() * dx);
}

double terminal_value(const CostSpec& spec, double deriv_sq, double term_stage,
                      double psi_f) {
    switch (spec.variant) {
        case Variant::full:
            return spec.gamma * spec.gamma * deriv_sq + spec.gamma * term_stage;
        case Variant::no_derivative:
            return spec.gamma * term_stage;
        case Variant::nominal:
            return psi_f;
        case Variant::steady_surrogate:
            return spec.surrogate_mu * deriv_sq;
    }
    return 0.0;
}

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull;
    return h * 0x100000001b3ull;
}

}  // namespace

std::uint64_t active_penalty_signature(const CostSpec& spec, const Trajectory& traj) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        for (std::size_t j = 0; j < spec.soft_constraints.size(); ++j) {
            if (spec.soft_constraints[j].g(traj[i].x, traj[i].u) > 0.0) {
                h = fnv_mix(h, (static_cast<std::uint64_t>(i) << 16) | j);
            }
        }
    }
    return h;
}

CostBreakdown cost_of_trajectory(const CostSpec& spec, const ModelSpec& model,
                                 const Trajectory& traj) {
    CostBreakdown b;
    for (const auto& z : traj) {
        b.cumulated_stage += stage_cost(spec, z);
    }
    const ExtendedState& z_N = traj.back();
    b.terminal_stage = stage_cost(spec, z_N);
    b.terminal_derivative_sq = model.fc(z_N.x, z_N.u).squaredNorm();
    b.conventional_terminal = conventional_terminal(spec, z_N.x);
    b.terminal_phi = terminal_value(spec, b.terminal_derivative_sq,
                                    b.terminal_stage, b.conventional_terminal);
    b.total = b.terminal_phi + b.cumulated_stage;
    return b;
}

double terminal_phi(const CostSpec& spec, const ModelSpec& model, const ExtendedState& z_N) {
    return terminal_value(spec, model.fc(z_N.x, z_N.u).squaredNorm(),
                          stage_cost(spec, z_N), conventional_terminal(spec, z_N.x));
}

CostBreakdown total_cost(const CostSpec& spec, const ModelSpec& model,
                         const ExtendedState& z, const ControlSequence& seq,
                         std::uint64_t* active_signature) {
    if (seq.empty()) {
        throw std::invalid_argument("total_cost: control sequence must have N >= 1");
    }
    const Trajectory traj = rollout(model, z, seq);
    if (active_signature) {
        *active_signature = active_penalty_signature(spec, traj);
    }
    return cost_of_trajectory(spec, model, traj);
}

CostBreakdown cost_gradient(const CostSpec& spec, const ModelSpec& model,
                            const ExtendedState& z, const ControlSequence& seq,
                            std::vector<Vector>& grad,
                            std::uint64_t* active_signature) {
    if (seq.empty()) {
        throw std::invalid_argument("cost_gradient: control sequence must have N >= 1");
    }
    if (!model.fc_jacobians) {
        throw std::invalid_argument("cost_gradient: model '" + model.name +
                                    "' provides no fc_jacobians");
    }
    const int n = model.state_dim;
    const int m = model.control_dim;
    const std::size_t N = seq.size();

    const Trajectory traj = rollout(model, z, seq);
    if (active_signature) {
        *active_signature = active_penalty_signature(spec, traj);
    }
    CostBreakdown b = cost_of_trajectory(spec, model, traj);

    grad.assign(N, Vector::Zero(m));

    // Terminal adjoint: d(terminal_phi + l(z_N))/d z_N.
    const ExtendedState& z_N = traj.back();
    Vector lam(n), g_uN(m);
    stage_cost_gradient(spec, z_N, lam, g_uN);

    Matrix Jx(n, n), Ju(n, m);
    switch (spec.variant) {
        case Variant::full: {
            const Vector fc_N = model.fc(z_N.x, z_N.u);
            model.fc_jacobians(z_N.x, z_N.u, Jx, Ju);
            const double g2 = spec.gamma * spec.gamma;
            lam = spec.gamma * lam + 2.0 * g2 * (Jx.transpose() * fc_N);
            g_uN = spec.gamma * g_uN + 2.0 * g2 * (Ju.transpose() * fc_N);
            break;
        }
        case Variant::no_derivative:
            lam *= spec.gamma;
            g_uN *= spec.gamma;
            break;
        case Variant::nominal:
            lam = 2.0 * (spec.qf.asDiagonal() * (z_N.x - spec.x_ref));
            g_uN.setZero();
            break;
        case Variant::steady_surrogate: {
            const Vector fc_N = model.fc(z_N.x, z_N.u);
            model.fc_jacobians(z_N.x, z_N.u, Jx, Ju);
            lam = 2.0 * spec.surrogate_mu * (Jx.transpose() * fc_N);
            g_uN = 2.0 * spec.surrogate_mu * (Ju.transpose() * fc_N);
            break;
        }
    }

    // The terminal stage term l(z_N) enters S as well as (for the gamma
    // variants) the terminal value; add the S copy.
    {
        Vector sx(n), su(m);
        stage_cost_gradient(spec, z_N, sx, su);
        lam += sx;
        g_uN += su;
    }
    grad[N - 1] += g_uN;

    // Backward sweep over x_{i+1} = rk4(x_i, u_i), u_i = seq[i-1] for i >= 1.
    Matrix Ai(n, n), Bi(n, m);
    for (std::size_t i = N - 1; i >= 1; --i) {
        const ExtendedState& z_i = traj[i];
        rk4_step_jacobians(model, z_i.x, z_i.u, Ai, Bi);
        grad[i - 1] += Bi.transpose() * lam;
        Vector sx(n), su(m);
        stage_cost_gradient(spec, z_i, sx, su);
        grad[i - 1] += su;
        lam = Ai.transpose() * lam + sx;
    }
    // i == 0: the step x_1 = rk4(x_0, u_0) uses the fixed applied control, and
    // l(z_0) is constant in the decision variable; nothing to accumulate.

    return b;
}

double penalty_kink_distance(const CostSpec& spec, const Trajectory& traj) {
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& z : traj) {
        for (const auto& c : spec.soft_constraints) {
            dist = std::min(dist, std::abs(c.g(z.x, z.u)));
        }
    }
    return dist;
}

}  // namespace nmpc
