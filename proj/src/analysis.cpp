#include "firewater/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "firewater/steady_state.hpp"

namespace firewater::analysis {

namespace {

double grid_value(double lo, double step, int i) { return lo + step * i; }

int grid_count(double lo, double hi, double step) {
    if (!(step > 0) || hi < lo) throw std::invalid_argument("bad sweep range");
    return static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
}

double cost_rate_of(const ModelParams& p, double x, double u, double v) {
    const double stock = p.cost_exponent == 1 ? p.c * x : p.c * x * x;
    return stock + u * u + v * v;
}

SweepPoint solve_point(const ModelParams& base, double gamma, double beta) {
    SweepPoint pt;
    pt.gamma = gamma;
    pt.beta = beta;
    ModelParams p = base;
    p.gamma = gamma;
    p.beta = beta;
    try {
        const steady::SteadyState s = steady::steady_ccd(p);
        pt.x_s = s.x_s;
        pt.u_s = s.u_s;
        pt.v_s = s.v_s;
        pt.cost_rate = cost_rate_of(p, s.x_s, s.u_s, s.v_s);
        pt.ok = true;
    } catch (const std::exception& e) {
        pt.error = e.what();
    }
    return pt;
}

}  // namespace

CostResult total_cost(const ModelParams& p, const Trajectory& traj) {
    CostResult out;
    out.value = discounted_cost(p, traj);
    const double x_max = *std::max_element(traj.x.begin(), traj.x.end());
    const double stock = p.cost_exponent == 1 ? p.c * x_max : p.c * x_max * x_max;
    out.tail_bound = stock * std::exp(-p.r * traj.grid.horizon) / p.r;
    return out;
}

std::vector<SweepPoint> sweep_gamma_beta(const ModelParams& p, double gamma_lo,
                                         double gamma_hi, double gamma_step,
                                         double beta_lo, double beta_hi,
                                         double beta_step, int jobs) {
    const int ng = grid_count(gamma_lo, gamma_hi, gamma_step);
    const int nb = grid_count(beta_lo, beta_hi, beta_step);
    std::vector<SweepPoint> out(static_cast<std::size_t>(ng) * nb);

    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(out.size())));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < static_cast<int>(out.size());
             i = next.fetch_add(1)) {
            const int gi = i / nb;
            const int bi = i % nb;
            out[i] = solve_point(p, grid_value(gamma_lo, gamma_step, gi),
                                 grid_value(beta_lo, beta_step, bi));
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

numerics::QuadFit fit_sweep(const std::vector<SweepPoint>& points) {
    std::vector<double> g, b, z;
    for (const SweepPoint& pt : points) {
        if (!pt.ok) continue;
        g.push_back(pt.gamma);
        b.push_back(pt.beta);
        z.push_back(pt.x_s);
    }
    return numerics::fit_quadratic_surface(g, b, z);
}

std::vector<std::pair<double, double>> contour_solve(const numerics::QuadFit& fit,
                                                     double target,
                                                     std::span<const double> betas,
                                                     double gamma_lo,
                                                     double gamma_hi) {
    std::vector<std::pair<double, double>> out;
    for (double beta : betas) {
        const double c0 = fit.a0 + fit.a3 * beta + fit.a4 * beta * beta - target;
        std::vector<double> roots;
        if (std::abs(fit.a2) < 1e-300) {
            if (fit.a1 != 0.0) roots.push_back(-c0 / fit.a1);
        } else {
            const double disc = fit.a1 * fit.a1 - 4.0 * fit.a2 * c0;
            if (disc >= 0.0) {
                const double s = std::sqrt(disc);
                roots.push_back((-fit.a1 - s) / (2.0 * fit.a2));
                roots.push_back((-fit.a1 + s) / (2.0 * fit.a2));
            }
        }
        std::sort(roots.begin(), roots.end());
        for (double g : roots)
            if (g >= gamma_lo && g <= gamma_hi) out.emplace_back(g, beta);
    }
    return out;
}

std::vector<SweepPoint> verify_contour(
    const ModelParams& p, const std::vector<std::pair<double, double>>& pairs) {
    std::vector<SweepPoint> out;
    out.reserve(pairs.size());
    for (const auto& [g, b] : pairs) out.push_back(solve_point(p, g, b));
    return out;
}

DnsResult find_dns(const ModelParams& p, double x_lo, double x_hi,
                   const Grid& grid, double cost_tol) {
    if (!(x_lo > 0) || !(x_hi > x_lo))
        throw std::invalid_argument("find_dns: need 0 < x_lo < x_hi");

    const ccd::CcdConfig cfg;
    struct Gap {
        double delta, J_low, J_high;
    };
    // A side without an extremal of its own shape concedes the comparison.
    auto gap = [&](double x0) -> Gap {
        double J_low = 0.0, J_high = 0.0;
        bool have_low = false, have_high = false;
        try {
            J_low = ccd::solve_branch(p, grid, x0, cfg, ccd::Branch::low).cost;
            have_low = true;
        } catch (const std::exception&) {
        }
        try {
            J_high = ccd::solve_branch(p, grid, x0, cfg, ccd::Branch::high).cost;
            have_high = true;
        } catch (const std::exception&) {
        }
        if (!have_low && !have_high)
            throw std::runtime_error("find_dns: no extremal of either shape at x0 = " +
                                     std::to_string(x0));
        if (!have_low) return {-1e30, 0.0, J_high};
        if (!have_high) return {1e30, J_low, 0.0};
        return {J_high - J_low, J_low, J_high};
    };

    Gap g_lo = gap(x_lo);
    Gap g_hi = gap(x_hi);
    if (g_lo.delta * g_hi.delta > 0.0)
        throw std::runtime_error("find_dns: cost difference has no sign change");

    double a = x_lo, b = x_hi;
    Gap g_mid = g_lo;
    double mid = a;
    for (int it = 0; it < 80; ++it) {
        mid = 0.5 * (a + b);
        g_mid = gap(mid);
        if (std::abs(g_mid.delta) <= cost_tol) break;
        if (g_lo.delta * g_mid.delta <= 0.0)
            b = mid;
        else {
            a = mid;
            g_lo = g_mid;
        }
    }
    if (std::abs(g_mid.delta) > cost_tol)
        throw std::runtime_error("find_dns: bisection stalled");
    return {mid, g_mid.J_low, g_mid.J_high, b - a};
}

ArrowReport arrow_check(const ModelParams& p, const ccd::CcdResult& result) {
    if (!result.converged)
        throw std::invalid_argument("arrow_check requires a converged solution");
    const Trajectory& traj = result.trajectory;
    if (traj.lambda.size() != traj.x.size())
        throw std::invalid_argument("arrow_check requires a filled costate");

    auto derived_H = [&](double x, double lambda, double t) {
        const ControlPair w = optimal_controls(p, x, lambda, t);
        return hamiltonian(p, t, x, w.u, w.v, lambda);
    };

    ArrowReport report;
    report.t = traj.grid.t;
    report.H0_xx.resize(traj.x.size());
    for (std::size_t i = 0; i < traj.x.size(); ++i) {
        const double x = traj.x[i];
        const double lam = traj.lambda[i];
        const double t = traj.grid.t[i];
        const double h = 1e-4 * std::max(1.0, x);
        try {
            const double f0 = derived_H(x, lam, t);
            const double fp = derived_H(x + h, lam, t);
            const double fm = derived_H(x - h, lam, t);
            report.H0_xx[i] = (fp - 2.0 * f0 + fm) / (h * h);
        } catch (const std::exception& e) {
            throw std::runtime_error("arrow_check failed at knot " +
                                     std::to_string(i) + ": " + e.what());
        }
    }
    report.min_H0_xx =
        *std::min_element(report.H0_xx.begin(), report.H0_xx.end());
    double max_abs = 0.0;
    for (double v : report.H0_xx) max_abs = std::max(max_abs, std::abs(v));

    // locally_convex only when the minimum clears the difference noise floor;
    // nonconvex only when it is negative beyond the full curvature of the
    // quadratic cost term, otherwise the check is inconclusive.
    const double floor = 1e-6 * std::max(1.0, max_abs);
    if (report.min_H0_xx > floor)
        report.verdict = ConvexityVerdict::locally_convex;
    else if (report.min_H0_xx < -std::max(1.0, 2.0 * p.c))
        report.verdict = ConvexityVerdict::nonconvex;
    else
        report.verdict = ConvexityVerdict::indeterminate;

    report.side_condition = traj.lambda.back() * traj.x.back();
    return report;
}

OracleResult oracle_direct_solve(const ModelParams& p, double horizon, int steps,
                                 double x0) {
    if (steps > 100)
        throw std::invalid_argument("oracle is deliberately coarse: steps <= 100");
    if (!(x0 > 0)) throw std::invalid_argument("oracle requires x0 > 0");
    const Grid grid = make_grid(horizon, steps);
    const int n = steps;

    Trajectory traj;
    traj.grid = grid;
    traj.x.assign(n + 1, 0.0);
    traj.u.assign(n + 1, 0.0);
    traj.v.assign(n + 1, 0.0);

    auto simulate_cost = [&](const std::vector<double>& u,
                             const std::vector<double>& v) {
        double x = x0;
        double sum = 0.0;
        double prev = running_cost(p, 0.0, x, u[0], v[0]);
        for (int i = 0; i < n; ++i) {
            const double dt = grid.t[i + 1] - grid.t[i];
            x = std::max(1e-12, x + dt * drift(p, x, u[i], v[i]));
            const double cur = running_cost(p, grid.t[i + 1], x, u[i + 1], v[i + 1]);
            sum += 0.5 * dt * (prev + cur);
            prev = cur;
        }
        return sum;
    };

    auto golden = [&](std::vector<double>& w, int i,
                      const std::vector<double>& other, bool w_is_u) {
        auto eval = [&](double val) {
            const double saved = w[i];
            w[i] = val;
            const double J =
                w_is_u ? simulate_cost(w, other) : simulate_cost(other, w);
            w[i] = saved;
            return J;
        };
        constexpr double invphi = 0.6180339887498949;
        double a = 0.0, b = 1e3;
        double c1 = b - invphi * (b - a);
        double c2 = a + invphi * (b - a);
        double f1 = eval(c1), f2 = eval(c2);
        while (b - a > 1e-7) {
            if (f1 < f2) {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - invphi * (b - a);
                f1 = eval(c1);
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + invphi * (b - a);
                f2 = eval(c2);
            }
        }
        const double cand = 0.5 * (a + b);
        if (eval(cand) < eval(w[i])) w[i] = cand;
    };

    OracleResult out;
    double J = simulate_cost(traj.u, traj.v);
    const int pass_cap = 500;
    int pass = 0;
    for (; pass < pass_cap; ++pass) {
        for (int i = 0; i <= n; ++i) golden(traj.u, i, traj.v, true);
        for (int i = 0; i <= n; ++i) golden(traj.v, i, traj.u, false);
        const double J_next = simulate_cost(traj.u, traj.v);
        const double gain = J - J_next;
        J = J_next;
        if (gain < 1e-8) break;
    }
    out.pass_limit_hit = pass == pass_cap;
    out.passes = std::min(pass + 1, pass_cap);

    double x = x0;
    traj.x[0] = x;
    for (int i = 0; i < n; ++i) {
        const double dt = grid.t[i + 1] - grid.t[i];
        x = std::max(1e-12, x + dt * drift(p, x, traj.u[i], traj.v[i]));
        traj.x[i + 1] = x;
    }
    out.cost = J;
    out.trajectory = std::move(traj);
    return out;
}

}  // namespace firewater::analysis
