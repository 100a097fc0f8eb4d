#include <doctest.h>

#include <cmath>
#include <random>

#include "firewater/model.hpp"
#include "firewater/numerics.hpp"
#include "firewater/steady_state.hpp"
#include "helpers.hpp"

using namespace firewater;
using fwtest::base_params;

TEST_CASE("water feedback zeroes the drift") {
    const ModelParams p = base_params();
    auto gen = fwtest::rng(23);
    std::uniform_real_distribution<double> ux(1e-3, 1.0), uv(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double x = ux(gen), v = uv(gen);
        const auto fb = steady::feedback_water(p, x, v);
        if (!fb.clamped)
            CHECK(std::abs(drift(p, x, fb.value, v)) <= 1e-10);
    }
    CHECK(steady::feedback_water(p, 0.61773, 0.14605).value ==
          doctest::Approx(0.06834).epsilon(1e-3 / 0.06834));
}

TEST_CASE("water feedback vanishes with its bracket") {
    const ModelParams p = base_params();
    // Pick v so the zero-water drift vanishes at x = 1; then no water is
    // needed and the rule returns zero exactly.
    const double v = numerics::bisection(
        [&](double v_) { return drift(p, 1.0, 0.0, v_); }, 0.0, 1.0, 1e-15);
    CHECK(std::abs(steady::feedback_water(p, 1.0, v).value) <= 1e-10);
}

TEST_CASE("fire feedback zeroes the drift via the Lambert branch") {
    const ModelParams p = base_params();
    auto gen = fwtest::rng(29);
    std::uniform_real_distribution<double> ux(0.1, 1.0), uu(0.0, 0.5);
    for (int i = 0; i < 100; ++i) {
        const double x = ux(gen), u = uu(gen);
        try {
            const auto fb = steady::feedback_fire(p, x, u);
            if (!fb.clamped)
                CHECK(std::abs(drift(p, x, u, fb.value)) <= 1e-9);
        } catch (const std::domain_error&) {
            // no real solution at this pair; nothing to check
        }
    }
    CHECK(steady::feedback_fire(p, 0.61773, 0.06834).value ==
          doctest::Approx(0.14605).epsilon(1e-3 / 0.14605));

    ModelParams q = p;
    q.rho = 0.0;
    CHECK_THROWS_AS(steady::feedback_fire(q, 0.5, 0.0), std::domain_error);
}

TEST_CASE("evolution function shape on the low range") {
    const ModelParams p = base_params();
    auto L = [&](double x) {
        return steady::evolution_function(p, x, Control::water, 0.0).L;
    };
    // One sign change in each of the two sub-ranges.
    CHECK(L(1e-8) * L(1e-3) < 0.0);
    CHECK(L(1e-3) * L(0.0625) < 0.0);
}

TEST_CASE("evolution function r-scaling identity") {
    // W carries 1/r, so r * dW/dx is r-free and the whole r-dependence sits
    // in the stationarity term: L(2r) - L(r) = r * G_w / f_w.
    const ModelParams p = base_params();
    ModelParams p2 = p;
    p2.r *= 2.0;
    for (double x : {2e-3, 0.2, 0.5, 0.8}) {
        const auto s1 = steady::evolution_function(p, x, Control::water, 0.0);
        const auto s2 = steady::evolution_function(p2, x, Control::water, 0.0);
        const Partials d = partials(p, 0.0, x, s1.R, 0.0);
        const double expected = p.r * (2.0 * s1.R) / d.f_u;
        CHECK(s2.L - s1.L == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("low-range steady states and their stability") {
    const ModelParams p = base_params();
    const auto roots =
        steady::find_steady_states(p, Control::water, 0.0, 1e-8, 0.0625);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0].x_s == doctest::Approx(7.94549e-7).epsilon(1e-3));
    CHECK(roots[0].stability == steady::Stability::stable);
    CHECK(roots[0].u_s == doctest::Approx(0.0046106).epsilon(1e-2));
    CHECK(roots[1].x_s == doctest::Approx(0.0206096).epsilon(1e-3));
    CHECK(roots[1].stability == steady::Stability::unstable);
    CHECK(roots[1].u_s == doctest::Approx(0.284695).epsilon(1e-2));
    for (const auto& s : roots) {
        CHECK(s.drift_residual <= 1e-8);
        CHECK(s.L_residual <= 1e-8);
        CHECK(s.branch == steady::BranchTag::low);
    }
}

TEST_CASE("bisection reproduces the low roots directly") {
    const ModelParams p = base_params();
    auto L = [&](double x) {
        return steady::evolution_function(p, x, Control::water, 0.0).L;
    };
    const double r1 = numerics::bisection(L, 1e-8, 1e-3, 1e-9);
    CHECK(r1 == doctest::Approx(7.94549e-7).epsilon(1e-9 / 7.94549e-7));
    const double r2 = numerics::bisection(L, 1e-3, 0.0625, 1e-10);
    CHECK(r2 == doctest::Approx(0.0206096).epsilon(1e-6 / 0.0206096));
}

TEST_CASE("raising the inflow lifts the low steady state") {
    ModelParams p = base_params();
    const auto before =
        steady::find_steady_states(p, Control::water, 0.0, 1e-8, 0.0625);
    p.tau *= 10.0;
    const auto after =
        steady::find_steady_states(p, Control::water, 0.0, 1e-8, 0.0625);
    REQUIRE(!before.empty());
    REQUIRE(!after.empty());
    CHECK(after[0].x_s > before[0].x_s);
}

TEST_CASE("coordinate descent reaches the reference high steady state") {
    const ModelParams p = base_params();
    const auto s = steady::steady_ccd(p);
    CHECK(s.x_s == doctest::Approx(0.61773).epsilon(1e-3 / 0.61773));
    CHECK(s.u_s == doctest::Approx(0.06834).epsilon(1e-3 / 0.06834));
    CHECK(s.v_s == doctest::Approx(0.14605).epsilon(1e-3 / 0.14605));
    CHECK(s.drift_residual <= 1e-8);
    CHECK(s.L_residual <= 1e-8);
    CHECK(s.stability == steady::Stability::stable);
    CHECK(s.branch == steady::BranchTag::high);

    // Stage consistency: re-running either single stage from the converged
    // triple barely moves the root.
    const auto rerun_fire = steady::find_steady_states(
        p, Control::fire, s.u_s, switching_point(p) * (1 + 1e-9), 10.0);
    REQUIRE(rerun_fire.size() == 1);
    CHECK(std::abs(rerun_fire[0].x_s - s.x_s) < 1e-8);
    const auto rerun_water = steady::find_steady_states(
        p, Control::water, s.v_s, switching_point(p) * (1 + 1e-9), 10.0);
    REQUIRE(rerun_water.size() == 1);
    CHECK(std::abs(rerun_water[0].x_s - s.x_s) < 1e-7);
}

TEST_CASE("quadratic cost variant") {
    const auto s = steady::steady_ccd(fwtest::quadratic_params());
    CHECK(s.x_s == doctest::Approx(0.605).epsilon(1e-2 / 0.605));
    CHECK(s.u_s == doctest::Approx(0.081).epsilon(1e-2 / 0.081));
    CHECK(s.v_s == doctest::Approx(0.163).epsilon(1e-2 / 0.163));
}

TEST_CASE("contour-point calibration") {
    ModelParams p = base_params();
    p.gamma = 0.141;
    p.beta = 0.010;
    const auto s = steady::steady_ccd(p);
    CHECK(s.x_s == doctest::Approx(0.399).epsilon(1e-2 / 0.399));
    CHECK(s.u_s == doctest::Approx(0.0638).epsilon(1e-2 / 0.0638));
    CHECK(s.v_s == doctest::Approx(0.1710).epsilon(1e-2 / 0.1710));
}
