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

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nmpc;

TEST_CASE("hover is an equilibrium of the continuous dynamics") {
    const pvtol::Params params;
    const Vector x = Vector::Zero(6);
    Vector u(2);
    u << 1.0, 0.0;
    CHECK(pvtol::fc(params, x, u).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("zero thrust free-falls at unit normalized gravity") {
    const pvtol::Params params;
    const Vector x = Vector::Zero(6);
    const Vector u = Vector::Zero(2);
    const Vector dx = pvtol::fc(params, x, u);
    Vector expected(6);
    expected << 0, 0, 0, 0, -1.0, 0;
    CHECK((dx - expected).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("horizontal thrust at theta = pi/2") {
    const pvtol::Params params;
    Vector x = Vector::Zero(6);
    x[pvtol::kTheta] = M_PI / 2.0;
    Vector u(2);
    u << 1.0, 0.0;
    const Vector dx = pvtol::fc(params, x, u);
    CHECK(dx[pvtol::kY1Dot] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(dx[pvtol::kY2Dot] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(dx[pvtol::kThetaDot] == 0.0);
}

TEST_CASE("published weights are assembled exactly") {
    pvtol::Scenario scenario;
    scenario.d = 1.0;
    const CostSpec spec = pvtol::cost(pvtol::Params{}, scenario, Variant::full, 100.0);

    Vector q_expected(6);
    q_expected << 100.0, 10.0, 10.0, 1.0, 1.0, 1.0;
    CHECK(spec.q == q_expected);
    CHECK(spec.r == Vector::Ones(2));
    Vector qf_expected(6);
    qf_expected << 1e4, 1e3, 1e3, 100.0, 100.0, 100.0;
    CHECK(spec.qf == qf_expected);

    Vector ref_expected = Vector::Zero(6);
    ref_expected[0] = 1.0;
    ref_expected[1] = 1.0;
    CHECK(spec.x_ref == ref_expected);
    Vector ud(2);
    ud << 1.0, 0.0;
    CHECK(spec.u_d == ud);

    REQUIRE(spec.soft_constraints.size() == 3);
    for (const auto& c : spec.soft_constraints) {
        CHECK(c.rho == 1000.0);
    }
    // Violation magnitudes at the soft limits.
    ExtendedState z{Vector::Zero(6), ud};
    z.x[pvtol::kY1Dot] = 0.31;
    CHECK(spec.soft_constraints[0].g(z.x, z.u) == doctest::Approx(0.01));
    z.x[pvtol::kY1Dot] = 0.0;
    z.x[pvtol::kThetaDot] = -0.25;
    CHECK(spec.soft_constraints[2].g(z.x, z.u) == doctest::Approx(0.05));
}

TEST_CASE("the control box matches the published bounds") {
    const auto model = pvtol::model();
    Vector lo(2), hi(2);
    lo << -1.5, -0.5;
    hi << 1.5, 0.5;
    CHECK(model.control_lower == lo);
    CHECK(model.control_upper == hi);
}

TEST_CASE("hover fixed points are translation invariant") {
    const auto model = pvtol::model();
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    const Vector u_d = pvtol::Scenario::hover_control();
    for (int trial = 0; trial < 20; ++trial) {
        Vector x = Vector::Zero(6);
        x[pvtol::kY1] = unit(rng);
        x[pvtol::kY2] = unit(rng);
        const ExtendedState z{x, u_d};
        const ExtendedState next = extended_step(model, z, u_d);
        CHECK((next.x - x).lpNorm<Eigen::Infinity>() < 1e-14);
    }
}

TEST_CASE("horizon reachability arithmetic") {
    const pvtol::Params params;
    const double increment = pvtol::max_position_increment_per_horizon(params);
    CHECK(increment == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(0.2 < increment);   // horizon-reachable target
    CHECK(1.0 > increment);   // increasingly violated targets
    CHECK(2.0 > increment);
}

TEST_CASE("hand-derived jacobians match central finite differences") {
    const pvtol::Params params;
    std::mt19937 rng(67);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double h = 1e-7;
    for (int trial = 0; trial < 10; ++trial) {
        Vector x = Vector::NullaryExpr(6, [&](Eigen::Index) { return unit(rng); });
        Vector u(2);
        u << 1.5 * unit(rng), 0.5 * unit(rng);

        Matrix jx, ju;
        pvtol::fc_jacobians(params, x, u, jx, ju);

        for (int j = 0; j < 6; ++j) {
            Vector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Vector col = (pvtol::fc(params, xp, u) - pvtol::fc(params, xm, u)) / (2 * h);
            CHECK((jx.col(j) - col).lpNorm<Eigen::Infinity>() < 1e-6);
        }
        for (int j = 0; j < 2; ++j) {
            Vector up = u, um = u;
            up[j] += h;
            um[j] -= h;
            const Vector col = (pvtol::fc(params, x, up) - pvtol::fc(params, x, um)) / (2 * h);
            CHECK((ju.col(j) - col).lpNorm<Eigen::Infinity>() < 1e-6);
        }
    }
}

TEST_CASE("paper sweep presets") {
    CHECK(pvtol::paper_targets() == std::vector<double>{0.2, 0.5, 1.0, 2.0});
    CHECK(pvtol::paper_gammas() ==
          std::vector<double>{1.0, 5.0, 50.0, 100.0, 1000.0, 5000.0});
}
