#include "firewater/pmp_shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "firewater/numerics.hpp"

namespace firewater::shooting {

namespace {

[[noreturn]] void knot_error(const std::string& what, int knot) {
    throw std::runtime_error(what + " at knot " + std::to_string(knot));
}

// (K - B) e^{-A} evaluated in log space so that an overflowing costate
// raises a signed blow-up instead of infinity.
double costate_value(double K, double A, double B, int knot) {
    const double gap = K - B;
    if (gap == 0.0) return 0.0;
    const double mag = std::log(std::abs(gap)) - A;
    if (mag > 690.0) throw BlowupError(knot, gap > 0 ? 1.0 : -1.0);
    return gap > 0 ? std::exp(mag) : -std::exp(mag);
}

double active_of(const Trajectory& traj, Control which, int i) {
    return which == Control::water ? traj.u[i] : traj.v[i];
}

// Walks the A/B quadrature along a march. For each knot it first offers
// "lagged" values built with the previous knot's active control (so the
// knot's control solve stays explicit), then commits the knot with the
// solved control.
class AccumulatorWalker {
  public:
    AccumulatorWalker(const ModelParams& p, const Grid& grid, Control which)
        : p_(p), grid_(grid), which_(which) {}

    // Accumulators offered to knot i's solve; `active_prev` is the active
    // control of knot i-1 (ignored at i = 0, where the integrals vanish).
    ExtremalAccumulators lagged(int i, double x, double active_prev,
                                double fixed) {
        ExtremalAccumulators acc;
        if (i == 0) return acc;
        const double dt = grid_.t[i] - grid_.t[i - 1];
        const double u = which_ == Control::water ? active_prev : fixed;
        const double v = which_ == Control::water ? fixed : active_prev;
        const Partials d = partials(p_, grid_.t[i], x, u, v);
        acc.A = std::clamp(A_ + 0.5 * dt * (phi_prev_ + d.f_x), -750.0, 750.0);
        acc.B = B_ + 0.5 * dt * (psi_prev_ + d.F_x * std::exp(std::min(acc.A, 700.0)));
        return acc;
    }

    void commit(int i, double x, double u, double v) {
        const Partials d = partials(p_, grid_.t[i], x, u, v);
        if (i > 0) {
            const double dt = grid_.t[i] - grid_.t[i - 1];
            A_ = std::clamp(A_ + 0.5 * dt * (phi_prev_ + d.f_x), -750.0, 750.0);
            const double psi = d.F_x * std::exp(std::min(A_, 700.0));
            B_ += 0.5 * dt * (psi_prev_ + psi);
            psi_prev_ = psi;
        } else {
            psi_prev_ = d.F_x;  // e^{A(0)} = 1
        }
        phi_prev_ = d.f_x;
    }

  private:
    const ModelParams& p_;
    const Grid& grid_;
    Control which_;
    double A_ = 0.0;
    double B_ = 0.0;
    double phi_prev_ = 0.0;
    double psi_prev_ = 0.0;
};

// Solves the per-knot stationarity equation F_w(w) + lambda * f_w(w) = 0
// for the active control w in (0, kControlMax], the residual form of the
// constant-indicator condition. The residual is strictly increasing in w
// for lambda > 0; a bisection bracket safeguards the Newton steps.
double solve_active_control(const ModelParams& p, double t, double x,
                            double lambda, Control which, double warm, int knot) {
    const double disc = std::exp(-p.r * t);
    const double xa = std::pow(x, p.alpha);
    const double xt = std::pow(x, p.theta);

    auto f_w = [&](double w) {
        return which == Control::water ? -p.beta * xt / (1.0 + w)
                                       : p.rho * p.k * xa - p.gamma * x / (1.0 + w);
    };
    auto slope = [&](double w) {  // d/dw of F_w + lambda f_w
        const double core = which == Control::water ? p.beta * xt : p.gamma * x;
        return 2.0 * disc + lambda * core / ((1.0 + w) * (1.0 + w));
    };
    auto h = [&](double w) { return 2.0 * w * disc + lambda * f_w(w); };

    if (h(0.0) >= 0.0) return 0.0;  // unconstrained solution is non-positive
    double hi = kControlMax;
    const double h_hi = h(hi);
    if (h_hi < 0.0) throw BlowupError(knot, 1.0);  // only reachable for huge lambda

    double lo = 0.0;
    double w = std::min(std::max(warm, 1e-12), hi * 0.999);
    const double scale = 1.0 + std::abs(lambda * f_w(0.0));
    for (int it = 0; it < 100; ++it) {
        const double hw = h(w);
        if (std::abs(hw) <= 1e-14 * scale) return w;
        if (hw < 0.0)
            lo = w;
        else
            hi = w;
        double next = w - hw / slope(w);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - w) <= 1e-16 * (1.0 + w)) return next;
        w = next;
    }
    if (std::abs(h(w)) <= 1e-10 * scale) return w;
    knot_error("control solve failed to converge", knot);
}

void check_inputs(const Grid& grid, double x0, double K,
                  const ControlSelector& sel) {
    if (!(x0 > 0)) throw std::domain_error("extremal build requires x0 > 0");
    if (!std::isfinite(K)) throw std::domain_error("extremal build requires finite K");
    if (sel.fixed_other.size() != grid.t.size())
        throw std::invalid_argument("fixed control array does not match grid");
    for (double w : sel.fixed_other)
        if (w < 0) throw std::domain_error("fixed control values must be >= 0");
}

}  // namespace

Trajectory build_extremal(const ModelParams& p, const Grid& grid, double x0,
                          double K, const ControlSelector& sel) {
    check_inputs(grid, x0, K, sel);
    const int n = grid.steps;
    const double x_switch =
        sel.which == Control::fire ? switching_point(p) : 0.0;

    Trajectory traj;
    traj.grid = grid;
    traj.x.assign(n + 1, 0.0);
    traj.u.assign(n + 1, 0.0);
    traj.v.assign(n + 1, 0.0);

    AccumulatorWalker acc(p, grid, sel.which);
    double x = x0;
    double w_prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const ExtremalAccumulators lag = acc.lagged(i, x, w_prev, sel.fixed_other[i]);
        const double lambda = costate_value(K, lag.A, lag.B, i);

        double w = 0.0;
        const bool clamped_by_switch =
            sel.which == Control::fire && x < x_switch;
        if (!clamped_by_switch && lambda > 0.0)
            w = solve_active_control(p, grid.t[i], x, lambda, sel.which, w_prev, i);

        const double u = sel.which == Control::water ? w : sel.fixed_other[i];
        const double v = sel.which == Control::water ? sel.fixed_other[i] : w;
        traj.x[i] = x;
        traj.u[i] = u;
        traj.v[i] = v;
        acc.commit(i, x, u, v);
        w_prev = w;

        if (i < n) {
            const double dx = drift(p, x, u, v);
            if (!std::isfinite(dx)) knot_error("drift not finite", i);
            x = std::max(kStateFloor, x + (grid.t[i + 1] - grid.t[i]) * dx);
        }
    }
    return traj;
}

std::vector<double> costate_from_K(const ModelParams& p, const Trajectory& traj,
                                   double K, const ControlSelector& sel) {
    if (sel.fixed_other.size() != traj.grid.t.size())
        throw std::invalid_argument("fixed control array does not match grid");
    const int n = traj.grid.steps;
    std::vector<double> lambda(n + 1, 0.0);
    AccumulatorWalker acc(p, traj.grid, sel.which);
    for (int i = 0; i <= n; ++i) {
        const double prev = i > 0 ? active_of(traj, sel.which, i - 1) : 0.0;
        const ExtremalAccumulators lag =
            acc.lagged(i, traj.x[i], prev, sel.fixed_other[i]);
        lambda[i] = costate_value(K, lag.A, lag.B, i);
        acc.commit(i, traj.x[i], traj.u[i], traj.v[i]);
    }
    return lambda;
}

std::vector<double> y_indicator(const ModelParams& p, const Trajectory& traj,
                                const ControlSelector& sel) {
    if (sel.fixed_other.size() != traj.grid.t.size())
        throw std::invalid_argument("fixed control array does not match grid");
    const int n = traj.grid.steps;
    std::vector<double> y(n + 1, 0.0);
    AccumulatorWalker acc(p, traj.grid, sel.which);
    for (int i = 0; i <= n; ++i) {
        const double prev = i > 0 ? active_of(traj, sel.which, i - 1) : 0.0;
        const ExtremalAccumulators lag =
            acc.lagged(i, traj.x[i], prev, sel.fixed_other[i]);
        const Partials d = partials(p, traj.grid.t[i], traj.x[i], traj.u[i], traj.v[i]);
        const double F_w = sel.which == Control::water ? d.F_u : d.F_v;
        const double f_w = sel.which == Control::water ? d.f_u : d.f_v;
        double first = 0.0;
        if (F_w != 0.0) {
            if (std::abs(f_w) < 1e-14) knot_error("singular division by f_w", i);
            first = -F_w / f_w * std::exp(lag.A);
        }
        y[i] = first + lag.B;
        acc.commit(i, traj.x[i], traj.u[i], traj.v[i]);
    }
    return y;
}

namespace {

struct Probe {
    double K = 0.0;
    double res = 0.0;  // blow-ups carry a saturated signed residual
    bool finite = true;
};

}  // namespace

ShootingResult shoot(const ModelParams& p, const Grid& grid, double x0,
                     double K_min, double K_max, const ControlSelector& sel,
                     double tol, int max_iter) {
    if (K_min == K_max) throw std::invalid_argument("shoot: K seeds must differ");
    if (!(tol > 0)) throw std::invalid_argument("shoot: tol must be positive");

    auto probe = [&](double K) -> Probe {
        try {
            const Trajectory traj = build_extremal(p, grid, x0, K, sel);
            return {K, costate_from_K(p, traj, K, sel).back(), true};
        } catch (const BlowupError& e) {
            return {K, e.sign * 1e300, false};
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()) + " (K = " +
                                     std::to_string(K) + ")");
        }
    };

    // Secant steps on the terminal costate, safeguarded by the tightest
    // known sign-change bracket: steps leaving the bracket, degenerate
    // slopes and blown-up probes fall back to bisection.
    Probe lo, hi;  // res < 0 / res > 0, once seen
    bool has_lo = false, has_hi = false;
    auto absorb = [&](const Probe& pr) {
        Probe& mine = pr.res < 0 ? lo : hi;
        bool& have_mine = pr.res < 0 ? has_lo : has_hi;
        const Probe& other = pr.res < 0 ? hi : lo;
        const bool have_other = pr.res < 0 ? has_hi : has_lo;
        if (!have_mine || !have_other ||
            std::abs(pr.K - other.K) < std::abs(mine.K - other.K))
            mine = pr;
        have_mine = true;
    };

    Probe prev = probe(K_min);
    int iterations = 0;
    double width_one_ago = std::numeric_limits<double>::infinity();
    double width_two_ago = std::numeric_limits<double>::infinity();
    Probe best = prev;
    bool met = prev.finite && std::abs(prev.res) <= tol;
    if (!met) {
        absorb(prev);
        Probe cur = probe(K_max);
        absorb(cur);
        if (cur.finite && std::abs(cur.res) < std::abs(best.res)) best = cur;
        while (!(cur.finite && std::abs(cur.res) <= tol)) {
            const bool bracketed = has_lo && has_hi;
            if (bracketed) {
                // Bracket collapsed to machine resolution: the residual is
                // too stiff in K for the tolerance; keep the best iterate.
                const double a = std::min(lo.K, hi.K);
                const double b = std::max(lo.K, hi.K);
                if (std::nextafter(a, b) >= b && best.finite) break;
            }
            if (++iterations > max_iter) {
                if (bracketed && best.finite) break;
                throw numerics::ConvergenceError(
                    "shoot: no convergence after " + std::to_string(max_iter) +
                    " iterations (residual " + std::to_string(cur.res) + ")");
            }
            double next = 0.0;
            bool have_step = false;
            if (prev.finite && cur.finite && cur.res != prev.res) {
                next = cur.K - cur.res * (cur.K - prev.K) / (cur.res - prev.res);
                have_step = std::isfinite(next);
            }
            if (has_lo && has_hi) {
                const double a = std::min(lo.K, hi.K);
                const double b = std::max(lo.K, hi.K);
                // Secant stalls on stiff residuals; force bisection whenever
                // the bracket has not at least halved over two steps.
                const bool stalled = b - a > 0.5 * width_two_ago;
                width_two_ago = width_one_ago;
                width_one_ago = b - a;
                if (!have_step || next <= a || next >= b || next == cur.K ||
                    stalled)
                    next = 0.5 * (a + b);
            } else if (!have_step) {
                // No bracket and no usable slope: march away from the
                // blown-up side in growing steps.
                const double span =
                    std::max(std::abs(cur.K - prev.K), 1e-3 * (1.0 + std::abs(cur.K)));
                next = cur.res > 0 ? std::min(prev.K, cur.K) - 2.0 * span
                                   : std::max(prev.K, cur.K) + 2.0 * span;
            }
            prev = cur;
            cur = probe(next);
            absorb(cur);
            if (cur.finite && std::abs(cur.res) < std::abs(best.res)) best = cur;
        }
        if (cur.finite && std::abs(cur.res) <= tol) best = cur;
        met = best.finite && std::abs(best.res) <= tol;
        prev = best;
    }

    ShootingResult out;
    out.K = prev.K;
    out.secant_iterations = iterations;
    out.met_tolerance = met;
    out.trajectory = build_extremal(p, grid, x0, out.K, sel);
    out.trajectory.lambda = costate_from_K(p, out.trajectory, out.K, sel);
    out.residual = std::abs(out.trajectory.lambda.back());
    return out;
}

}  // namespace firewater::shooting
