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
#include "nmpc/experiment.hpp"
#include "nmpc/pvtol.hpp"

#include "test_models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nmpc;

namespace {

CostSpec pvtol_spec(Variant variant, double gamma, double d = 0.5) {
    pvtol::Scenario scenario;
    scenario.d = d;
    return pvtol::cost(pvtol::Params{}, scenario, variant, gamma);
}

ExtendedState pvtol_reference(const CostSpec& spec) {
    return ExtendedState{spec.x_ref, spec.u_d};
}

}  // namespace

TEST_CASE("stage cost vanishes exactly at the reference pair") {
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    CHECK(stage_cost(spec, pvtol_reference(spec)) == 0.0);
}

TEST_CASE("stage cost reproduces the hand-evaluated quadratic") {
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    ExtendedState z = pvtol_reference(spec);
    z.x[0] += 0.1;  // first coordinate, Q11 = 100
    CHECK(stage_cost(spec, z) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact penalty adds rho times the violation") {
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    ExtendedState z = pvtol_reference(spec);
    z.x[pvtol::kY1Dot] = 0.4;  // |y1dot| <= 0.3 violated by 0.1, rho = 1000
    const double quadratic = 1.0 * 0.4 * 0.4;  // Q44 = 1
    CHECK(stage_cost(spec, z) == doctest::Approx(quadratic + 100.0).epsilon(1e-12));
}

TEST_CASE("stage cost is nonnegative and positive away from the reference") {
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        ExtendedState z;
        z.x = Vector::NullaryExpr(6, [&](Eigen::Index) { return unit(rng); });
        z.u = Vector::NullaryExpr(2, [&](Eigen::Index) { return unit(rng); });
        const double value = stage_cost(spec, z);
        CHECK(value >= 0.0);
        if ((z.x - spec.x_ref).norm() + (z.u - spec.u_d).norm() > 1e-6) {
            CHECK(value > 0.0);
        }
    }
}

TEST_CASE("terminal phi variants") {
    SUBCASE("steady reference pair gives zero for the full variant") {
        for (double gamma : {1.0, 100.0, 5000.0}) {
            const CostSpec spec = pvtol_spec(Variant::full, gamma);
            const auto model = pvtol::model();
            CHECK(terminal_phi(spec, model, pvtol_reference(spec)) == 0.0);
        }
    }

    SUBCASE("nominal terminal vanishes at the reference state") {
        const CostSpec spec = pvtol_spec(Variant::nominal, 0.0);
        const auto model = pvtol::model();
        CHECK(terminal_phi(spec, model, pvtol_reference(spec)) == 0.0);
    }

    SUBCASE("hand-evaluated derivative-penalized terminal") {
        // Constant drift 0.2 (squared norm 0.04) and stage cost 0.5.
        ModelSpec model;
        model.name = "drift";
        model.state_dim = 1;
        model.control_dim = 1;
        model.tau = 0.1;
        model.fc = [](const Vector&, const Vector&) {
            return Vector::Constant(1, 0.2).eval();
        };
        model.control_lower = Vector::Constant(1, -1.0);
        model.control_upper = Vector::Constant(1, 1.0);

        CostSpec spec;
        spec.variant = Variant::full;
        spec.gamma = 5.0;
        spec.q = Vector::Constant(1, 1.0);
        spec.r = Vector::Constant(1, 0.0);
        spec.qf = Vector::Constant(1, 1.0);
        spec.x_ref = Vector::Zero(1);
        spec.u_d = Vector::Zero(1);

        ExtendedState z_N{Vector::Constant(1, std::sqrt(0.5)), Vector::Zero(1)};
        CHECK(stage_cost(spec, z_N) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(terminal_phi(spec, model, z_N) == doctest::Approx(3.5).epsilon(1e-12));

        spec.variant = Variant::no_derivative;
        CHECK(terminal_phi(spec, model, z_N) == doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("total cost on the steady reference pair is identically zero") {
    const CostSpec spec = pvtol_spec(Variant::full, 1000.0);
    const auto model = pvtol::model();
    const ExtendedState z = pvtol_reference(spec);
    const ControlSequence seq(15, spec.u_d);
    const CostBreakdown b = total_cost(spec, model, z, seq);
    CHECK(b.total == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(b.terminal_phi == doctest::Approx(0.0));
    CHECK(b.cumulated_stage == doctest::Approx(0.0));
    CHECK(b.terminal_derivative_sq == doctest::Approx(0.0));
}

TEST_CASE("empty sequences are rejected") {
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    const auto model = pvtol::model();
    CHECK_THROWS_AS(total_cost(spec, model, pvtol_reference(spec), {}),
                    std::invalid_argument);
}

TEST_CASE("breakdown components recompose the total per variant") {
    const auto model = pvtol::model();
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> unit(-0.4, 0.4);
    for (Variant variant : {Variant::nominal, Variant::full, Variant::no_derivative}) {
        const double gamma = variant == Variant::nominal ? 0.0 : 50.0;
        const CostSpec spec = pvtol_spec(variant, gamma);
        ExtendedState z;
        z.x = Vector::NullaryExpr(6, [&](Eigen::Index) { return unit(rng); });
        z.u = Vector(2);
        z.u << 1.0 + unit(rng), 0.5 * unit(rng);
        ControlSequence seq(10, Vector(2));
        for (auto& u : seq) {
            u << 1.0 + unit(rng), 0.5 * unit(rng);
        }
        const CostBreakdown b = total_cost(spec, model, z, seq);

        double expected_phi = 0.0;
        switch (variant) {
            case Variant::full:
                expected_phi = gamma * gamma * b.terminal_derivative_sq +
                               gamma * b.terminal_stage;
                break;
            case Variant::no_derivative:
                expected_phi = gamma * b.terminal_stage;
                break;
            case Variant::nominal:
                expected_phi = b.conventional_terminal;
                break;
            case Variant::steady_surrogate:
                break;
        }
        CHECK(b.terminal_phi == doctest::Approx(expected_phi).epsilon(1e-12));
        CHECK(b.total ==
              doctest::Approx(b.terminal_phi + b.cumulated_stage).epsilon(1e-12));
        CHECK(b.cumulated_stage >= 0.0);
    }
}

TEST_CASE("adjoint gradient vanishes at the unconstrained minimum") {
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    const auto model = pvtol::model();
    const ExtendedState z = pvtol_reference(spec);
    const ControlSequence seq(15, spec.u_d);
    std::vector<Vector> grad;
    cost_gradient(spec, model, z, seq, grad);
    for (const auto& g : grad) {
        CHECK(g.lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("adjoint gradient matches central finite differences") {
    const auto model = pvtol::model();
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    const auto result = gradient_fd_check(model, spec, 15, 20, 12345u, 1e-6, 1e-5);
    CHECK(result.instances == 20);
    CHECK(result.max_rel_error < 1e-6);
}

TEST_CASE("gradient check notices an injected fault") {
    const auto model = pvtol::model();
    const CostSpec spec = pvtol_spec(Variant::full, 100.0);
    const auto result = gradient_fd_check(model, spec, 15, 3, 99u, 1e-6, 1e-5, true);
    CHECK(result.max_rel_error > 1e-6);
}

TEST_CASE("the derivative-term gradient scales exactly with gamma squared") {
    const auto model = pvtol::model();
    // Zero weights isolate the gamma^2 ||f_c(z_N)||^2 term.
    CostSpec spec = pvtol_spec(Variant::full, 5.0);
    spec.q.setZero();
    spec.r.setZero();
    spec.qf.setZero();
    spec.soft_constraints.clear();

    std::mt19937 rng(41);
    std::uniform_real_distribution<double> unit(-0.3, 0.3);
    ExtendedState z;
    z.x = Vector::NullaryExpr(6, [&](Eigen::Index) { return unit(rng); });
    z.u = Vector(2);
    z.u << 0.7, 0.2;
    ControlSequence seq(8, Vector(2));
    for (auto& u : seq) {
        u << 1.0 + unit(rng), 0.5 * unit(rng);
    }

    std::vector<Vector> g5, g10;
    const CostBreakdown b = cost_gradient(spec, model, z, seq, g5);
    REQUIRE(b.terminal_derivative_sq > 0.0);
    spec.gamma = 10.0;
    cost_gradient(spec, model, z, seq, g10);
    for (std::size_t i = 0; i < g5.size(); ++i) {
        for (int c = 0; c < 2; ++c) {
            CHECK(g10[i][c] == 4.0 * g5[i][c]);
        }
    }
}

TEST_CASE("total cost is strictly increasing in gamma when the terminal drifts") {
    const auto model = pvtol::model();
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> unit(-0.3, 0.3);
    ExtendedState z;
    z.x = Vector::NullaryExpr(6, [&](Eigen::Index) { return unit(rng); });
    z.u = Vector(2);
    z.u << 1.2, 0.3;
    ControlSequence seq(10, Vector(2));
    for (auto& u : seq) {
        u << 1.0 + unit(rng), 0.5 * unit(rng);
    }

    double previous = -1.0;
    for (double gamma : {1.0, 5.0, 50.0, 100.0, 1000.0}) {
        const CostSpec spec = pvtol_spec(Variant::full, gamma);
        const CostBreakdown b = total_cost(spec, model, z, seq);
        REQUIRE(b.terminal_derivative_sq > 0.0);
        CHECK(b.total > previous);
        previous = b.total;
    }
}

TEST_CASE("no_derivative ignores the terminal derivative magnitude") {
    const auto model = pvtol::model();
    const CostSpec spec = pvtol_spec(Variant::no_derivative, 100.0);
    ExtendedState z;
    z.x = Vector::Zero(6);
    z.x[pvtol::kTheta] = 0.4;
    z.u = Vector(2);
    z.u << 1.3, 0.2;
    const ControlSequence seq(10, z.u);
    const CostBreakdown b = total_cost(spec, model, z, seq);
    CHECK(b.terminal_derivative_sq > 0.0);
    CHECK(b.total == doctest::Approx(spec.gamma * b.terminal_stage +
                                     b.cumulated_stage).epsilon(1e-12));
}

TEST_CASE("cost spec validation enforces the gamma/variant coupling") {
    const auto model = pvtol::model();
    CostSpec spec = pvtol_spec(Variant::full, 100.0);
    CHECK_NOTHROW(spec.validate(model));

    spec.variant = Variant::nominal;
    CHECK_THROWS_AS(spec.validate(model), std::invalid_argument);

    spec = pvtol_spec(Variant::full, 0.0);
    CHECK_THROWS_AS(spec.validate(model), std::invalid_argument);

    spec = pvtol_spec(Variant::nominal, 0.0);
    CHECK_NOTHROW(spec.validate(model));

    spec.soft_constraints.push_back(abs_state_limit("bad", 0, 1.0, -1.0));
    CHECK_THROWS_AS(spec.validate(model), std::invalid_argument);
}
