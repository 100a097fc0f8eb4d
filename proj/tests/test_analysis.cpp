#include <doctest.h>

#include <cmath>
#include <random>

#include "firewater/analysis.hpp"
#include "firewater/ccd.hpp"
#include "firewater/model.hpp"
#include "helpers.hpp"

using namespace firewater;
using fwtest::base_params;

TEST_CASE("total cost") {
    const ModelParams p = base_params();
    Trajectory traj;
    traj.grid = make_grid(100.0, 250);
    traj.x.assign(251, 0.0);
    traj.u.assign(251, 0.0);
    traj.v.assign(251, 0.0);
    CHECK(analysis::total_cost(p, traj).value == 0.0);

    traj.x.assign(251, 1.0);
    const auto cost = analysis::total_cost(p, traj);
    const double exact = (1.0 - std::exp(-5.0)) / p.r;
    CHECK(cost.value == doctest::Approx(exact).epsilon(5e-4));
    CHECK(cost.tail_bound == doctest::Approx(std::exp(-5.0) / p.r).epsilon(1e-12));
}

TEST_CASE("sweep degenerates to one row on a point range") {
    const ModelParams p = base_params();
    const auto pts = analysis::sweep_gamma_beta(p, 0.1, 0.1, 0.01, 0.01, 0.01,
                                                0.001, 1);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].ok);
    CHECK(pts[0].x_s == doctest::Approx(0.61773).epsilon(1e-3));
    // cost_rate identity holds by construction
    CHECK(pts[0].cost_rate ==
          pts[0].x_s * p.c + pts[0].u_s * pts[0].u_s + pts[0].v_s * pts[0].v_s);
}

TEST_CASE("threaded sweep is deterministic and ordered by grid index") {
    const ModelParams p = base_params();
    const auto a = analysis::sweep_gamma_beta(p, 0.1, 0.13, 0.01, 0.01, 0.012,
                                              0.001, 4);
    const auto b = analysis::sweep_gamma_beta(p, 0.1, 0.13, 0.01, 0.01, 0.012,
                                              0.001, 2);
    REQUIRE(a.size() == 12);
    REQUIRE(b.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].gamma == b[i].gamma);
        CHECK(a[i].beta == b[i].beta);
        CHECK(a[i].x_s == b[i].x_s);  // bitwise equal regardless of pool size
    }
    // Grid order: beta varies fastest.
    CHECK(a[0].gamma == doctest::Approx(0.1));
    CHECK(a[0].beta == doctest::Approx(0.01));
    CHECK(a[2].beta == doctest::Approx(0.012));
    CHECK(a[3].gamma == doctest::Approx(0.11));
}

TEST_CASE("sweep reproduces the efficiency sensitivity shapes") {
    const ModelParams p = base_params();
    // Raising the water efficiency raises its own steady control, while the
    // fire control peaks at an interior efficiency and then falls.
    const auto beta_row =
        analysis::sweep_gamma_beta(p, 0.1, 0.1, 0.01, 0.01, 0.02, 0.001, 0);
    for (std::size_t i = 1; i < beta_row.size(); ++i)
        CHECK(beta_row[i].u_s > beta_row[i - 1].u_s);

    const auto gamma_row =
        analysis::sweep_gamma_beta(p, 0.0625, 0.3, 0.0125, 0.01, 0.01, 0.001, 0);
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < gamma_row.size(); ++i) {
        CHECK(gamma_row[i].ok);
        if (gamma_row[i].v_s > gamma_row[argmax].v_s) argmax = i;
    }
    CHECK(argmax > 0);
    CHECK(argmax + 1 < gamma_row.size());
}

TEST_CASE("contour inversion of a synthetic linear surface") {
    numerics::QuadFit fit;
    fit.a0 = 1.0;
    fit.a1 = -1.0;
    const std::vector<double> betas = {0.01, 0.015, 0.02};
    const auto pairs = analysis::contour_solve(fit, 0.5, betas, 0.0, 1.0);
    REQUIRE(pairs.size() == 3);
    for (const auto& [g, b] : pairs) CHECK(g == doctest::Approx(0.5));

    // No real root: empty result, not an error.
    numerics::QuadFit none;
    none.a0 = 0.0;
    none.a2 = 1.0;
    CHECK(analysis::contour_solve(none, -1.0, betas, 0.0, 1.0).empty());
}

TEST_CASE("oracle on the degenerate model") {
    ModelParams p = base_params();
    p.c = 0.0;
    p.tau = 0.0;
    const auto res = analysis::oracle_direct_solve(p, 20.0, 20, 0.5);
    CHECK(res.cost <= 1e-10);
    CHECK_THROWS_AS(analysis::oracle_direct_solve(p, 50.0, 101),
                    std::invalid_argument);
}

TEST_CASE("direct transcription agrees with the coordinate-descent solve") {
    const ModelParams p = base_params();
    const auto oracle = analysis::oracle_direct_solve(p, 50.0, 50, 0.95);
    const Grid g = make_grid(50.0, 50);
    const auto solved = ccd::solve_multicontrol(p, g, 0.95, {});
    CHECK(std::abs(solved.cost - oracle.cost) / oracle.cost <= 0.02);

    // Local-optimality probe: nudging the solved controls at random knots
    // never undercuts the discretized cost by more than quadrature noise.
    auto simulate = [&](const std::vector<double>& u, const std::vector<double>& v) {
        Trajectory traj;
        traj.grid = g;
        traj.u = u;
        traj.v = v;
        traj.x.assign(g.t.size(), 0.0);
        double x = 0.95;
        traj.x[0] = x;
        for (int i = 0; i < g.steps; ++i) {
            x = std::max(1e-12, x + (g.t[i + 1] - g.t[i]) * drift(p, x, u[i], v[i]));
            traj.x[i + 1] = x;
        }
        return discounted_cost(p, traj);
    };
    const double J0 = simulate(solved.trajectory.u, solved.trajectory.v);
    auto gen = fwtest::rng(31);
    std::uniform_int_distribution<int> knot(0, g.steps);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        auto u = solved.trajectory.u;
        auto v = solved.trajectory.v;
        const int i = knot(gen);
        const double delta = coin(gen) ? 0.01 : -0.01;
        if (coin(gen))
            u[i] = std::max(0.0, u[i] + delta);
        else
            v[i] = std::max(0.0, v[i] + delta);
        CHECK(simulate(u, v) >= J0 - 1e-6);
    }
}

TEST_CASE("arrow check on a synthetic zero costate") {
    const ModelParams p = fwtest::quadratic_params();
    ccd::CcdResult fake;
    fake.converged = true;
    fake.trajectory.grid = make_grid(10.0, 20);
    fake.trajectory.x.assign(21, 0.5);
    fake.trajectory.u.assign(21, 0.0);
    fake.trajectory.v.assign(21, 0.0);
    fake.trajectory.lambda.assign(21, 0.0);
    const auto rep = analysis::arrow_check(p, fake);
    CHECK(rep.verdict == analysis::ConvexityVerdict::locally_convex);
    // Only the stock cost term survives: H0_xx = 2 c e^{-rt}.
    for (std::size_t i = 0; i < rep.t.size(); ++i)
        CHECK(rep.H0_xx[i] ==
              doctest::Approx(2.0 * p.c * std::exp(-p.r * rep.t[i])).epsilon(1e-5));

    fake.converged = false;
    CHECK_THROWS_AS(analysis::arrow_check(p, fake), std::invalid_argument);
}

TEST_CASE("arrow verdicts on solved trajectories") {
    const Grid g = make_grid(100.0, 250);
    ccd::CcdConfig cfg;
    cfg.shoot_tol = 1e-8;  // keeps the terminal side condition clean

    const ModelParams q = fwtest::quadratic_params();
    const auto solved_q = ccd::solve_multicontrol(q, g, 0.95, cfg);
    const auto rep_q = analysis::arrow_check(q, solved_q);
    CHECK(rep_q.min_H0_xx > 0.0);
    CHECK(rep_q.verdict == analysis::ConvexityVerdict::locally_convex);
    CHECK(rep_q.side_condition >= -1e-6);

    const ModelParams p = base_params();
    const auto solved_p = ccd::solve_multicontrol(p, g, 0.95, cfg);
    const auto rep_p = analysis::arrow_check(p, solved_p);
    CHECK(rep_p.verdict == analysis::ConvexityVerdict::indeterminate);
    CHECK(rep_p.side_condition >= -1e-6);
}

TEST_CASE("indifference point sits in the reference range") {
    const ModelParams p = base_params();
    const Grid g = make_grid(130.0, 650);
    const auto dns = analysis::find_dns(p, 0.005, 0.02, g);
    CHECK(dns.x_D > 0.0104);
    CHECK(dns.x_D < 0.0156);
    CHECK(std::abs(dns.J_high - dns.J_low) <= 1e-3);

    // Bracket stability: halving the bracket reproduces the crossing.
    const auto again = analysis::find_dns(p, dns.x_D - 0.004, dns.x_D + 0.004, g);
    CHECK(std::abs(again.x_D - dns.x_D) < 5e-4);

    CHECK_THROWS(analysis::find_dns(p, 0.018, 0.02, g));
}
