#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "firewater/model.hpp"
#include "helpers.hpp"

using namespace firewater;
using fwtest::base_params;

TEST_CASE("drift pins") {
    const ModelParams p = base_params();
    // k = mu normalization: the recruitment and natural outflow cancel at
    // the uncontrolled steady state, leaving only the constant inflow.
    CHECK(drift(p, 1.0, 0.0, 0.0) == doctest::Approx(p.tau).epsilon(1e-14));
    CHECK(drift(p, 0.0, 0.0, 0.0) == doctest::Approx(p.tau));
    // Published steady-state triple zeroes the drift.
    CHECK(std::abs(drift(p, 0.61773, 0.06834, 0.14605)) < 1e-4);
    CHECK_THROWS_AS(drift(p, -0.1, 0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(drift(p, 0.1, -1.0, 0.0), std::domain_error);
}

TEST_CASE("running cost pins") {
    ModelParams p = base_params();
    CHECK(running_cost(p, 0.0, 0.399, 0.0638, 0.1710) ==
          doctest::Approx(0.432).epsilon(1e-3 / 0.432));
    CHECK(running_cost(p, 0.0, 0.0, 0.0, 0.0) == 0.0);
    CHECK(running_cost(p, std::log(2.0) / p.r, 1.0, 0.0, 0.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
    p.cost_exponent = 2;
    CHECK(running_cost(p, 0.0, 0.5, 0.0, 0.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(running_cost(p, -1.0, 0.1, 0.0, 0.0), std::domain_error);
}

TEST_CASE("running cost decreases in t and stays non-negative") {
    const ModelParams p = base_params();
    auto gen = fwtest::rng();
    std::uniform_real_distribution<double> ux(0.0, 2.0), ut(0.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const double x = ux(gen), u = ux(gen), v = ux(gen), t = ut(gen);
        const double now = running_cost(p, t, x, u, v);
        CHECK(now >= 0.0);
        if (x + u + v > 0.0) CHECK(running_cost(p, t + 1.0, x, u, v) < now);
    }
}

TEST_CASE("analytic partials match finite differences") {
    for (const ModelParams& p : {base_params(), fwtest::quadratic_params()}) {
        auto gen = fwtest::rng(7);
        std::uniform_real_distribution<double> ux(1e-3, 1.0), uc(1e-3, 1.0),
            ut(0.0, 50.0);
        for (int i = 0; i < 100; ++i) {
            const double x = ux(gen), u = uc(gen), v = uc(gen), t = ut(gen);
            const Partials d = partials(p, t, x, u, v);
            const double h = 1e-6;
            auto check = [&](double analytic, double numeric) {
                CHECK(std::abs(analytic - numeric) <=
                      1e-5 * std::max(1.0, std::abs(analytic)));
            };
            check(d.f_x, fwtest::central_diff(
                             [&](double xx) { return drift(p, xx, u, v); }, x, h));
            check(d.f_u, fwtest::central_diff(
                             [&](double uu) { return drift(p, x, uu, v); }, u, h));
            check(d.f_v, fwtest::central_diff(
                             [&](double vv) { return drift(p, x, u, vv); }, v, h));
            check(d.F_x,
                  fwtest::central_diff(
                      [&](double xx) { return running_cost(p, t, xx, u, v); }, x, h));
            check(d.F_u,
                  fwtest::central_diff(
                      [&](double uu) { return running_cost(p, t, x, uu, v); }, u, h));
            check(d.F_v,
                  fwtest::central_diff(
                      [&](double vv) { return running_cost(p, t, x, u, vv); }, v, h));
        }
    }
}

TEST_CASE("partials edge behaviour") {
    const ModelParams p = base_params();
    CHECK(partials(p, 0.0, 1.0, 0.0, 0.0).f_u == doctest::Approx(-p.beta));
    const Partials d = partials(p, 3.0, 0.5, 0.0, 0.0);
    CHECK(d.F_u == 0.0);
    CHECK(d.F_v == 0.0);
    CHECK_THROWS_AS(partials(p, 0.0, 0.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("switching point") {
    ModelParams p = base_params();
    CHECK(switching_point(p) == 0.0625);  // closed form is exact here
    CHECK(uncontrolled_steady_state(p) == 1.0);

    p.rho = 0.0;
    CHECK(switching_point(p) == 0.0);
    p.rho = 1.0;
    p.alpha = 1.0;
    CHECK_THROWS_AS(switching_point(p), std::domain_error);

    // Scale consistency: x_S(rho*s) = s^{1/(1-alpha)} * x_S(rho).
    auto gen = fwtest::rng(11);
    std::uniform_real_distribution<double> us(0.25, 4.0);
    for (int i = 0; i < 50; ++i) {
        ModelParams q = base_params();
        const double base = switching_point(q);
        const double s = us(gen);
        q.rho *= s;
        CHECK(switching_point(q) ==
              doctest::Approx(std::pow(s, 1.0 / (1.0 - q.alpha)) * base)
                  .epsilon(1e-12));
    }
}

TEST_CASE("fire control minimizer") {
    const ModelParams p = base_params();
    const double xs = switching_point(p);
    auto gen = fwtest::rng(13);
    std::uniform_real_distribution<double> ul(1e-3, 100.0), uf(0.0, 1.0),
        ut(0.0, 50.0);

    // Below the switching point the unconstrained minimizer is negative, so
    // the returned control is zero for any positive costate.
    for (int i = 0; i < 200; ++i) {
        const double x = xs * uf(gen);
        const double lam = ul(gen);
        const double t = ut(gen);
        CHECK(v_star(p, x, lam * std::exp(-p.r * t), t) == 0.0);
    }
    CHECK(v_star(p, 0.5, 0.0, 3.0) == 0.0);

    // Above it the sign flips exactly at the threshold.
    for (int i = 0; i < 200; ++i) {
        const double lam = ul(gen);
        CHECK(v_star(p, xs * (1.0 + uf(gen)) + 1e-9, lam, 0.0) > 0.0);
    }

    // Back-solved steady costate reproduces the reference fire level.
    const double lam_c = fwtest::steady_costate(p, 0.61773, 0.06834, 0.14605);
    CHECK(v_star(p, 0.61773, lam_c, 0.0) ==
          doctest::Approx(0.14605).epsilon(1e-3 / 0.14605));
}

TEST_CASE("closed-form control pair") {
    const ModelParams p = base_params();
    CHECK(optimal_controls(p, 0.5, 0.0, 1.0).u == 0.0);
    CHECK(optimal_controls(p, 0.5, 0.0, 1.0).v == 0.0);

    // Stationarity of the Hamiltonian at the returned pair.
    auto gen = fwtest::rng(17);
    std::uniform_real_distribution<double> ux(0.05, 1.0), ul(0.0, 40.0),
        ut(0.0, 60.0);
    for (int i = 0; i < 100; ++i) {
        const double x = ux(gen), t = ut(gen);
        const double lam = ul(gen) * std::exp(-p.r * t);
        const ControlPair w = optimal_controls(p, x, lam, t);
        const double disc = std::exp(-p.r * t);
        if (w.u > 0.0) {
            const double H_u = 2.0 * w.u * disc -
                               p.beta * lam * std::pow(x, p.theta) / (1.0 + w.u);
            CHECK(std::abs(H_u) <= 1e-10);
        }
        if (w.v > 0.0) {
            const double H_v =
                2.0 * w.v * disc +
                lam * (p.k * p.rho * std::pow(x, p.alpha) -
                       p.gamma * x / (1.0 + w.v));
            CHECK(std::abs(H_v) <= 1e-10);
        }
    }

    // Quadratic-cost steady state: costate back-solved from the stationary
    // costate equation reproduces the reference controls.
    const ModelParams q = fwtest::quadratic_params();
    const double lam_c = fwtest::steady_costate(q, 0.605, 0.081, 0.163);
    const ControlPair w = optimal_controls(q, 0.605, lam_c, 0.0);
    CHECK(w.u == doctest::Approx(0.081).epsilon(1e-2 / 0.081));
    CHECK(w.v == doctest::Approx(0.163).epsilon(1e-2 / 0.163));
}

TEST_CASE("grid and trajectory plumbing") {
    const Grid g = make_grid(100.0, 250);
    CHECK(g.t.size() == 251);
    CHECK(g.t.front() == 0.0);
    CHECK(g.t.back() == 100.0);
    for (std::size_t i = 1; i < g.t.size(); ++i) CHECK(g.t[i] > g.t[i - 1]);
    CHECK_THROWS_AS(make_grid(-1.0, 10), std::domain_error);
    CHECK_THROWS_AS(make_grid(1.0, 1), std::domain_error);
}

TEST_CASE("parameter file round trip and validation") {
    const char* path = "test_params_roundtrip.cfg";
    {
        std::ofstream out(path);
        out << "# comment line\n"
               "r = 0.05\nc = 1\ntau = 1e-5\nrho = 1\nk = 0.05\n"
               "alpha = 0.75  # inline comment\nmu = 0.05\nbeta = 0.01\n"
               "theta = 0.1\ngamma = 0.1\ncost_exponent = 1\n";
    }
    const ModelParams p = load_params(path);
    CHECK(p.alpha == 0.75);
    CHECK(p.tau == 1e-5);
    CHECK(p.cost_exponent == 1);

    {
        std::ofstream out(path);
        out << "r = 0.05\nwhat = 1\n";
    }
    CHECK_THROWS(load_params(path));
    {
        std::ofstream out(path);
        out << "r = 0.05\n";  // missing keys
    }
    CHECK_THROWS(load_params(path));
    CHECK_THROWS(load_params("does_not_exist.cfg"));
    std::remove(path);

    ModelParams bad = base_params();
    bad.mu = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = base_params();
    bad.cost_exponent = 3;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
