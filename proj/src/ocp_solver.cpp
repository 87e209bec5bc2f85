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
#include "nmpc/ocp_solver.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace nmpc {

void SolverConfig::validate() const {
    if (max_iterations < 1) {
        throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    }
    if (memory_size < 1) {
        throw std::invalid_argument("SolverConfig: memory_size must be >= 1");
    }
    if (!(gradient_tolerance > 0.0)) {
        throw std::invalid_argument("SolverConfig: gradient_tolerance must be positive");
    }
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
        throw std::invalid_argument("SolverConfig: backtrack_factor must lie in (0,1)");
    }
    if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) {
        throw std::invalid_argument("SolverConfig: armijo_c1 must lie in (0,1)");
    }
    if (max_linesearch_steps < 1) {
        throw std::invalid_argument("SolverConfig: max_linesearch_steps must be >= 1");
    }
}

ControlSequence project_box(ControlSequence seq, const ModelSpec& model) {
    for (auto& u : seq) {
        u = u.cwiseMax(model.control_lower).cwiseMin(model.control_upper);
    }
    return seq;
}

ControlSequence shift_warm_start(const ControlSequence& prev) {
    if (prev.empty()) {
        return prev;
    }
    ControlSequence next(prev.begin() + 1, prev.end());
    next.push_back(prev.back());
    return next;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector flatten(const ControlSequence& seq) {
    const int m = static_cast<int>(seq.front().size());
    Vector v(static_cast<int>(seq.size()) * m);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        v.segment(static_cast<int>(i) * m, m) = seq[i];
    }
    return v;
}

ControlSequence unflatten(const Vector& v, int m) {
    ControlSequence seq(static_cast<std::size_t>(v.size() / m));
    for (std::size_t i = 0; i < seq.size(); ++i) {
        seq[i] = v.segment(static_cast<int>(i) * m, m);
    }
    return seq;
}

/// Active-set mask: components clamped at a bound with the gradient pointing
/// outward are frozen.
Eigen::ArrayXd free_mask(const Vector& u, const Vector& g,
                         const Vector& lo, const Vector& hi) {
    Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(u.size());
    for (int i = 0; i < u.size(); ++i) {
        if ((u[i] <= lo[i] && g[i] > 0.0) || (u[i] >= hi[i] && g[i] < 0.0)) {
            mask[i] = 0.0;
        }
    }
    return mask;
}

/// Two-loop recursion computing H*q with the stored curvature pairs.
Vector lbfgs_apply(const std::deque<Vector>& S, const std::deque<Vector>& Y, Vector q) {
    const int k = static_cast<int>(S.size());
    std::vector<double> alpha(k), rho(k);
    for (int i = k - 1; i >= 0; --i) {
        rho[i] = 1.0 / Y[i].dot(S[i]);
        alpha[i] = rho[i] * S[i].dot(q);
        q -= alpha[i] * Y[i];
    }
    if (k > 0) {
        q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    }
    for (int i = 0; i < k; ++i) {
        const double beta = rho[i] * Y[i].dot(q);
        q += (alpha[i] - beta) * S[i];
    }
    return q;
}

struct Evaluator {
    const CostSpec& spec;
    const ModelSpec& model;
    const ExtendedState& z;
    int m;

    double cost(const Vector& flat) const {
        try {
            return total_cost(spec, model, z, unflatten(flat, m)).total;
        } catch (const IntegrationOverflowError&) {
            return kInf;  // the line search treats this as a rejected trial
        }
    }
};

/// Value, gradient and Gauss-Newton Hessian of the cost in the flattened
/// control space, assembled from forward state sensitivities. The hinge
/// penalties contribute their one-sided slopes and no curvature.
struct GnModel {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
    CostBreakdown breakdown;
    std::uint64_t signature = 0;
};

GnModel build_gn_model(const CostSpec& spec, const ModelSpec& model,
                       const ExtendedState& z, const ControlSequence& seq) {
    const int n = model.state_dim;
    const int m = model.control_dim;
    const int N = static_cast<int>(seq.size());
    const int dim = N * m;

    const Trajectory traj = rollout(model, z, seq);

    GnModel out;
    out.breakdown = cost_of_trajectory(spec, model, traj);
    out.signature = active_penalty_signature(spec, traj);
    out.value = out.breakdown.total;
    out.gradient = Vector::Zero(dim);
    out.hessian = Matrix::Zero(dim, dim);

    // Extra weight multiplying the stage terms at i == N for the gamma
    // variants, and the coefficient of the ||f_c(z_N)||^2 Gauss-Newton block.
    double terminal_stage_weight = 0.0;
    double fc_coefficient = 0.0;
    switch (spec.variant) {
        case Variant::full:
            terminal_stage_weight = spec.gamma;
            fc_coefficient = spec.gamma * spec.gamma;
            break;
        case Variant::no_derivative:
            terminal_stage_weight = spec.gamma;
            break;
        case Variant::nominal:
            break;
        case Variant::steady_surrogate:
            fc_coefficient = spec.surrogate_mu;
            break;
    }

    // S = dx_i/dseq, built forward. x_{i+1} = rk4(x_i, u_i) with u_i = seq[i-1]
    // for i >= 1; x_1 depends only on the fixed applied control.
    Matrix S = Matrix::Zero(n, dim);
    Matrix A(n, n), B(n, m);
    Vector gx(n), gu(m);

    for (int i = 1; i <= N; ++i) {
        rk4_step_jacobians(model, traj[i - 1].x, traj[i - 1].u, A, B);
        S = (A * S).eval();
        if (i >= 2) {
            S.block(0, (i - 2) * m, n, m) += B;
        }
        const int ucol = (i - 1) * m;  // block of u_i = seq[i-1]
        const ExtendedState& zi = traj[static_cast<std::size_t>(i)];
        const double w = 1.0 + (i == N ? terminal_stage_weight : 0.0);

        // Quadratic tracking terms.
        const Vector rx = zi.x - spec.x_ref;
        const Vector ru = zi.u - spec.u_d;
        out.gradient.noalias() += S.transpose() * (2.0 * w * (spec.q.asDiagonal() * rx));
        out.gradient.segment(ucol, m) += 2.0 * w * (spec.r.asDiagonal() * ru);
        const Matrix qs = spec.q.asDiagonal() * S;
        out.hessian.noalias() += 2.0 * w * (S.transpose() * qs);
        out.hessian.block(ucol, ucol, m, m) += (2.0 * w * spec.r).asDiagonal();

        // Active hinge slopes (no curvature).
        for (const auto& c : spec.soft_constraints) {
            if (c.g(zi.x, zi.u) > 0.0) {
                c.gradient(zi.x, zi.u, gx, gu);
                out.gradient.noalias() += S.transpose() * (w * c.rho * gx);
                out.gradient.segment(ucol, m) += w * c.rho * gu;
            }
        }

        if (i == N) {
            if (spec.variant == Variant::nominal) {
                out.gradient.noalias() +=
                    S.transpose() * (2.0 * (spec.qf.asDiagonal() * rx));
                const Matrix qfs = spec.qf.asDiagonal() * S;
                out.hessian.noalias() += 2.0 * (S.transpose() * qfs);
            }
            if (fc_coefficient > 0.0) {
                const Vector fc_N = model.fc(zi.x, zi.u);
                Matrix jx(n, n), ju(n, m);
                model.fc_jacobians(zi.x, zi.u, jx, ju);
                Matrix jr = jx * S;  // n x dim
                jr.block(0, ucol, n, m) += ju;
                out.gradient.noalias() += jr.transpose() * (2.0 * fc_coefficient * fc_N);
                out.hessian.noalias() += 2.0 * fc_coefficient * (jr.transpose() * jr);
            }
        }
    }
    return out;
}

struct LineSearchResult {
    bool accepted = false;
    Vector point;
    double value = 0.0;
};

LineSearchResult armijo_projected(const Evaluator& eval, const Vector& u, double J,
                                  const Vector& g, const Vector& d, const Vector& lo,
                                  const Vector& hi, const SolverConfig& solver,
                                  double t0) {
    LineSearchResult res;
    double t = t0;
    for (int ls = 0; ls < solver.max_linesearch_steps; ++ls) {
        const Vector trial = (u + t * d).cwiseMax(lo).cwiseMin(hi);
        const double predicted = g.dot(trial - u);
        if (predicted < 0.0) {
            const double J_trial = eval.cost(trial);
            if (J_trial <= J + solver.armijo_c1 * predicted) {
                res.accepted = true;
                res.point = trial;
                res.value = J_trial;
                return res;
            }
        }
        t *= solver.backtrack_factor;
    }
    return res;
}

}  // namespace

OcpSolution solve(const CostSpec& spec, const ModelSpec& model,
                  const SolverConfig& solver, const ExtendedState& z,
                  const ControlSequence& warm_start) {
    const auto t_start = std::chrono::steady_clock::now();
    solver.validate();
    if (warm_start.empty()) {
        throw std::invalid_argument("solve: warm start must have N >= 1 controls");
    }

    const int m = model.control_dim;
    const int N = static_cast<int>(warm_start.size());
    Vector lo(N * m), hi(N * m);
    for (int i = 0; i < N; ++i) {
        lo.segment(i * m, m) = model.control_lower;
        hi.segment(i * m, m) = model.control_upper;
    }

    const Evaluator eval{spec, model, z, m};
    Vector u = flatten(project_box(warm_start, model));

    GnModel cur;
    try {
        cur = build_gn_model(spec, model, z, unflatten(u, m));
    } catch (const IntegrationOverflowError& e) {
        throw InvalidWarmStartError(std::string("warm-start rollout overflowed: ") + e.what());
    }
    if (!std::isfinite(cur.value)) {
        throw InvalidWarmStartError("warm-start cost is not finite");
    }

    std::deque<Vector> mem_s, mem_y;  // lbfgs curvature pairs
    double damping = 0.0;             // gauss_newton Levenberg parameter

    OcpSolution out;
    while (out.iterations_used < solver.max_iterations) {
        const Vector& g = cur.gradient;
        const Eigen::ArrayXd mask = free_mask(u, g, lo, hi);
        const Vector pg = (g.array() * mask).matrix();
        const double pg_norm = pg.lpNorm<Eigen::Infinity>();
        if (pg_norm <= solver.gradient_tolerance) {
            out.converged = true;
            break;
        }

        LineSearchResult step;
        if (solver.method == SolverMethod::gauss_newton) {
            // Two-metric projected step: damped Newton on the free block,
            // steepest descent on the active one, escalating the damping when
            // the line search rejects the direction.
            std::vector<int> free_idx;
            free_idx.reserve(static_cast<std::size_t>(mask.size()));
            for (int i = 0; i < mask.size(); ++i) {
                if (mask[i] > 0.0) free_idx.push_back(i);
            }
            const int nf = static_cast<int>(free_idx.size());
            Matrix hff(nf, nf);
            Vector gf(nf);
            for (int a = 0; a < nf; ++a) {
                gf[a] = g[free_idx[static_cast<std::size_t>(a)]];
                for (int b = 0; b < nf; ++b) {
                    hff(a, b) = cur.hessian(free_idx[static_cast<std::size_t>(a)],
                                            free_idx[static_cast<std::size_t>(b)]);
                }
            }
            const double scale = std::max(1.0, hff.diagonal().maxCoeff());
            if (damping <= 0.0) {
                damping = 1e-8 * scale;
            }

            double lambda = damping;
            for (int attempt = 0; attempt < 4 && !step.accepted; ++attempt, lambda *= 100.0) {
                Matrix damped = hff;
                damped.diagonal().array() += lambda;
                const Vector df = damped.ldlt().solve(-gf);
                Vector d = -pg;  // active components follow the projected gradient
                for (int a = 0; a < nf; ++a) {
                    d[free_idx[static_cast<std::size_t>(a)]] = df[a];
                }
                if (d.dot(g) >= 0.0) {
                    continue;
                }
                step = armijo_projected(eval, u, cur.value, g, d, lo, hi, solver, 1.0);
                if (step.accepted) {
                    damping = std::max(1e-10 * scale, lambda * 0.25);
                }
            }
            if (!step.accepted) {
                const double t0 = 1.0 / std::max(1.0, pg_norm);
                step = armijo_projected(eval, u, cur.value, g, -pg, lo, hi, solver, t0);
            }
        } else {
            Vector d;
            double t0 = 1.0;
            if (mem_s.empty()) {
                d = -pg;
                t0 = 1.0 / std::max(1.0, pg_norm);
            } else {
                d = -lbfgs_apply(mem_s, mem_y, pg);
                d = (d.array() * mask).matrix();
                if (d.dot(g) >= 0.0) {
                    d = -pg;
                    t0 = 1.0 / std::max(1.0, pg_norm);
                }
            }
            step = armijo_projected(eval, u, cur.value, g, d, lo, hi, solver, t0);
            if (!step.accepted) {
                const double t0_sd = 1.0 / std::max(1.0, pg_norm);
                step = armijo_projected(eval, u, cur.value, g, -pg, lo, hi, solver, t0_sd);
            }
        }

        if (!step.accepted) {
            out.line_search_failed = true;
            break;
        }

        GnModel next;
        try {
            next = build_gn_model(spec, model, z, unflatten(step.point, m));
        } catch (const IntegrationOverflowError&) {
            out.line_search_failed = true;  // the accepted cost stays in `cur`
            break;
        }

        if (solver.method == SolverMethod::lbfgs) {
            if (next.signature != cur.signature) {
                mem_s.clear();  // the active penalty set changed; curvature is stale
                mem_y.clear();
            } else {
                const Vector s = step.point - u;
                const Vector y = next.gradient - cur.gradient;
                const double sy = s.dot(y);
                if (sy > 1e-12 * s.norm() * y.norm()) {
                    mem_s.push_back(s);
                    mem_y.push_back(y);
                    if (static_cast<int>(mem_s.size()) > solver.memory_size) {
                        mem_s.pop_front();
                        mem_y.pop_front();
                    }
                }
            }
        }

        u = step.point;
        cur = std::move(next);
        ++out.iterations_used;
    }

    out.sequence = unflatten(u, m);
    out.value = cur.value;
    out.breakdown = cur.breakdown;
    out.wall_time = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t_start).count();
    return out;
}

}  // namespace nmpc
