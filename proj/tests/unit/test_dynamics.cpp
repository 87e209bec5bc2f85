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
#include "nmpc/pvtol.hpp"

#include "test_models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nmpc;

namespace {

ControlSequence random_sequence(const ModelSpec& model, int length, std::mt19937& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    ControlSequence seq(static_cast<std::size_t>(length), Vector(model.control_dim));
    for (auto& u : seq) {
        for (int i = 0; i < model.control_dim; ++i) {
            const double lo = model.control_lower[i], hi = model.control_upper[i];
            u[i] = lo + (unit(rng) + 1.0) * 0.5 * (hi - lo);
        }
    }
    return seq;
}

}  // namespace

TEST_CASE("rk4_step leaves the state unchanged under a zero vector field") {
    const auto model = nmpc_tests::zero_field_model(3, 2);
    Vector x(3);
    x << 0.7, -1.3, 4.2;
    Vector u(2);
    u << 0.5, -0.5;
    CHECK((rk4_step(model, x, u) - x).norm() == 0.0);
}

TEST_CASE("rk4_step holds the PVTOL hover fixed point") {
    const auto model = pvtol::model();
    const Vector x = Vector::Zero(6);
    const Vector u = pvtol::Scenario::hover_control();
    CHECK((rk4_step(model, x, u) - x).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rk4_step matches the closed-form exponential to 1e-8") {
    const auto model = nmpc_tests::decay_model(0.1);
    const Vector x = Vector::Constant(1, 1.0);
    const Vector u = Vector::Zero(1);
    const double expected = std::exp(-0.1);
    CHECK(std::abs(rk4_step(model, x, u)[0] - expected) < 1e-8);
}

TEST_CASE("rk4 global error on PVTOL decays at fourth order") {
    const auto params = pvtol::Params{};
    auto model = pvtol::model(params);
    Vector x0(6);
    x0 << 0.1, -0.2, 0.4, 0.1, -0.1, 0.3;
    Vector u(2);
    u << 1.2, 0.4;

    std::vector<double> taus = {0.25, 0.125, 0.0625, 0.03125};
    std::vector<double> errors;
    for (double tau : taus) {
        const int steps = static_cast<int>(std::lround(1.0 / tau));
        const Vector coarse = integrate_zoh(model, x0, u, 1.0, steps);
        const Vector fine = integrate_zoh(model, x0, u, 1.0, steps * 100);
        errors.push_back((coarse - fine).norm());
    }
    // Least-squares slope of log(err) vs log(tau).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double lx = std::log(taus[i]), ly = std::log(errors[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double n = static_cast<double>(taus.size());
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    CHECK(slope == doctest::Approx(4.0).epsilon(0.075));
}

TEST_CASE("halving the substep count grows the one-step error ~16x") {
    auto fine = pvtol::model();
    fine.substeps = 2;
    auto coarse = fine;
    coarse.substeps = 1;
    auto reference = fine;
    reference.substeps = 200;

    Vector x(6);
    x << 0.0, 0.0, 0.6, 0.2, -0.2, 0.4;
    Vector u(2);
    u << 1.3, 0.45;
    const Vector x_ref = rk4_step(reference, x, u);
    const double err_fine = (rk4_step(fine, x, u) - x_ref).norm();
    const double err_coarse = (rk4_step(coarse, x, u) - x_ref).norm();
    CHECK(err_coarse / err_fine == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("extended_step semantics") {
    const auto model = pvtol::model();
    pvtol::Scenario scenario;
    scenario.d = 0.3;
    Vector x_hover = Vector::Zero(6);
    x_hover[pvtol::kY1] = scenario.d;
    x_hover[pvtol::kY2] = scenario.d;
    const Vector u_d = pvtol::Scenario::hover_control();
    const ExtendedState steady{x_hover, u_d};

    SUBCASE("steady pair with u_next = u_d is a fixed point") {
        const ExtendedState next = extended_step(model, steady, u_d);
        CHECK((next.x - steady.x).lpNorm<Eigen::Infinity>() < 1e-15);
        CHECK((next.u - steady.u).lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("only the control slot changes under a new control") {
        Vector u_new(2);
        u_new << 0.8, -0.1;
        const ExtendedState next = extended_step(model, steady, u_new);
        CHECK((next.x - steady.x).lpNorm<Eigen::Infinity>() < 1e-15);
        CHECK(next.u == u_new);
    }

    SUBCASE("the stored control is carried bitwise") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unit(-0.4, 0.4);
        ExtendedState z;
        z.x = Vector::NullaryExpr(6, [&](Eigen::Index) { return unit(rng); });
        z.u = Vector(2);
        z.u << 1.0 + unit(rng), unit(rng);
        Vector u_next(2);
        u_next << 0.123456789, -0.3;
        const ExtendedState next = extended_step(model, z, u_next);
        CHECK(next.u[0] == u_next[0]);
        CHECK(next.u[1] == u_next[1]);
    }
}

TEST_CASE("rollout properties") {
    const auto model = pvtol::model();
    const Vector u_d = pvtol::Scenario::hover_control();

    SUBCASE("steady pair stays put for all 16 entries") {
        const ExtendedState steady{Vector::Zero(6), u_d};
        const ControlSequence seq(15, u_d);
        const Trajectory traj = rollout(model, steady, seq);
        REQUIRE(traj.size() == 16);
        for (const auto& z : traj) {
            CHECK((z.x - steady.x).lpNorm<Eigen::Infinity>() < 1e-14);
            CHECK((z.u - u_d).lpNorm<Eigen::Infinity>() == 0.0);
        }
    }

    SUBCASE("single step unrolls to [z, extended_step(z, seq[0])]") {
        std::mt19937 rng(11);
        ExtendedState z{Vector::Zero(6), u_d};
        z.x[pvtol::kTheta] = 0.2;
        const ControlSequence seq = random_sequence(model, 1, rng);
        const Trajectory traj = rollout(model, z, seq);
        REQUIRE(traj.size() == 2);
        const ExtendedState direct = extended_step(model, z, seq[0]);
        CHECK((traj[1].x - direct.x).norm() == 0.0);
        CHECK(traj[1].u == seq[0]);
    }

    SUBCASE("truncated sequences reproduce trajectory prefixes") {
        std::mt19937 rng(13);
        ExtendedState z{Vector::Zero(6), u_d};
        z.x[pvtol::kY1Dot] = 0.15;
        const ControlSequence seq = random_sequence(model, 10, rng);
        const Trajectory full = rollout(model, z, seq);
        for (std::size_t cut = 1; cut <= seq.size(); ++cut) {
            const ControlSequence head(seq.begin(), seq.begin() + static_cast<long>(cut));
            const Trajectory part = rollout(model, z, head);
            REQUIRE(part.size() == cut + 1);
            for (std::size_t i = 0; i < part.size(); ++i) {
                CHECK((part[i].x - full[i].x).lpNorm<Eigen::Infinity>() == 0.0);
                CHECK((part[i].u - full[i].u).lpNorm<Eigen::Infinity>() == 0.0);
            }
        }
    }

    SUBCASE("semigroup concatenation to 1e-12") {
        std::mt19937 rng(17);
        ExtendedState z{Vector::Zero(6), u_d};
        z.x[pvtol::kTheta] = -0.1;
        const ControlSequence s1 = random_sequence(model, 6, rng);
        const ControlSequence s2 = random_sequence(model, 5, rng);
        ControlSequence joined = s1;
        joined.insert(joined.end(), s2.begin(), s2.end());

        const Trajectory whole = rollout(model, z, joined);
        const Trajectory first = rollout(model, z, s1);
        const Trajectory second = rollout(model, first.back(), s2);
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK((whole[i].x - first[i].x).lpNorm<Eigen::Infinity>() < 1e-12);
        }
        for (std::size_t i = 0; i < second.size(); ++i) {
            CHECK((whole[s1.size() + i].x - second[i].x).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }

    SUBCASE("controls pass through exactly") {
        std::mt19937 rng(19);
        const ExtendedState z{Vector::Zero(6), u_d};
        const ControlSequence seq = random_sequence(model, 8, rng);
        const Trajectory traj = rollout(model, z, seq);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            CHECK(traj[i + 1].u == seq[i]);
        }
    }
}

TEST_CASE("integration overflow reports the failing rollout index") {
    ModelSpec model;
    model.name = "cubic_blowup";
    model.state_dim = 1;
    model.control_dim = 1;
    model.tau = 0.1;
    model.fc = [](const Vector& x, const Vector&) {
        return (x.array() * x.array() * x.array()).matrix().eval();
    };
    model.control_lower = Vector::Constant(1, -1.0);
    model.control_upper = Vector::Constant(1, 1.0);

    const ExtendedState z{Vector::Constant(1, 1e120), Vector::Zero(1)};
    const ControlSequence seq(3, Vector::Zero(1));
    CHECK_THROWS_AS(rollout(model, z, seq), IntegrationOverflowError);
    try {
        rollout(model, z, seq);
    } catch (const IntegrationOverflowError& e) {
        CHECK(e.step() == 0);
    }
}

TEST_CASE("ModelSpec validation rejects bad boxes and dimensions") {
    auto model = nmpc_tests::zero_field_model();
    CHECK_NOTHROW(model.validate());
    model.control_lower[0] = model.control_upper[0];
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);
    model = nmpc_tests::zero_field_model();
    model.tau = 0.0;
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);
}
