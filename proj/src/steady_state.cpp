#include "firewater/steady_state.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "firewater/numerics.hpp"

namespace firewater::steady {

namespace {

// Undiscounted integrand and its control slopes.
double integrand(const ModelParams& p, double x, double u, double v) {
    const double stock = p.cost_exponent == 1 ? p.c * x : p.c * x * x;
    return stock + u * u + v * v;
}

double feedback(const ModelParams& p, double x, Control which, double other) {
    const FeedbackResult fb = which == Control::water
                                  ? feedback_water(p, x, other)
                                  : feedback_fire(p, x, other);
    if (fb.clamped)
        throw std::domain_error("feedback control negative at x = " +
                                std::to_string(x));
    return fb.value;
}

// W(x) = G(x, R(x)) / r along the feedback rule of the stage.
double stage_value(const ModelParams& p, double x, Control which, double other) {
    const double w = feedback(p, x, which, other);
    const double u = which == Control::water ? w : other;
    const double v = which == Control::water ? other : w;
    return integrand(p, x, u, v) / p.r;
}

}  // namespace

FeedbackResult feedback_water(const ModelParams& p, double x, double v) {
    if (!(x > 0)) throw std::domain_error("feedback_water requires x > 0");
    if (v < 0) throw std::domain_error("feedback_water requires v >= 0");
    const double residual = p.tau + (1.0 + p.rho * v) * p.k * std::pow(x, p.alpha) -
                            p.mu * x - p.gamma * std::log1p(v) * x;
    const double exponent = std::pow(x, -p.theta) * residual / p.beta;
    if (exponent > 700.0)
        throw std::overflow_error("feedback_water overflow at x = " +
                                  std::to_string(x));
    const double raw = std::expm1(exponent);
    return {std::max(0.0, raw), raw, raw < 0.0};
}

FeedbackResult feedback_fire(const ModelParams& p, double x, double u) {
    if (!(x > 0)) throw std::domain_error("feedback_fire requires x > 0");
    if (u < 0) throw std::domain_error("feedback_fire requires u >= 0");
    if (!(p.rho > 0))
        throw std::domain_error("feedback_fire requires rho > 0");
    const double xa = std::pow(x, p.alpha);
    // drift(x, u, v) = 0 rearranged as s*e^{-s/a} = e^{-b/a} for s = 1+v,
    // a = gamma*x / (rho*k*x^alpha); the principal branch gives the
    // solution on the side where f_v <= 0.
    const double a = p.gamma * x / (p.rho * p.k * xa);
    const double without_v = p.tau + p.k * xa - p.mu * x -
                             p.beta * std::log1p(u) * std::pow(x, p.theta);
    const double neg_b_over_a = (without_v - p.rho * p.k * xa) / (p.gamma * x);
    if (neg_b_over_a > 700.0)
        throw std::overflow_error("feedback_fire overflow at x = " +
                                  std::to_string(x));
    const double arg = -std::exp(neg_b_over_a) / a;
    if (arg < -0.36787944117144232 - 1e-12)
        throw std::domain_error("feedback_fire: no real solution (W argument " +
                                std::to_string(arg) + ")");
    const double raw = -1.0 - a * numerics::lambert_w0(arg);
    return {std::max(0.0, raw), raw, raw < 0.0};
}

EvolutionSample evolution_function(const ModelParams& p, double x, Control which,
                                   double fixed_other) {
    if (!(x > 0)) throw std::domain_error("evolution function requires x > 0");
    const double w = feedback(p, x, which, fixed_other);
    const double u = which == Control::water ? w : fixed_other;
    const double v = which == Control::water ? fixed_other : w;

    const Partials d = partials(p, 0.0, x, u, v);
    const double G_w = 2.0 * w;
    const double f_w = which == Control::water ? d.f_u : d.f_v;
    if (std::abs(f_w) < 1e-14)
        throw std::domain_error("evolution function: f_w vanishes at x = " +
                                std::to_string(x));

    // Central difference of W = G/r; the step shrinks with x so that tiny
    // steady states remain inside the domain.
    const double h = std::min(1e-6 * std::max(1.0, x), 0.01 * x);
    const double w_plus = stage_value(p, x + h, which, fixed_other);
    const double w_minus = stage_value(p, x - h, which, fixed_other);
    const double dW = (w_plus - w_minus) / (2.0 * h);

    EvolutionSample s;
    s.x = x;
    s.R = w;
    s.L = p.r * (G_w / f_w + dW);
    return s;
}

namespace {

std::optional<double> try_L(const ModelParams& p, double x, Control which,
                            double other) {
    try {
        return evolution_function(p, x, which, other).L;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Geometric bisection of a sign change of L, then a short secant polish.
double refine_root(const ModelParams& p, Control which, double other, double lo,
                   double hi, double f_lo) {
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * lo; ++it) {
        const double mid = std::sqrt(lo * hi);
        const auto f_mid = try_L(p, mid, which, other);
        if (!f_mid) break;
        if (f_lo * *f_mid <= 0.0)
            hi = mid;
        else {
            lo = mid;
            f_lo = *f_mid;
        }
    }
    double x0 = std::sqrt(lo * hi);
    double x1 = x0 * (1.0 + 1e-9);
    auto g0 = try_L(p, x0, which, other);
    auto g1 = try_L(p, x1, which, other);
    for (int it = 0; it < 8 && g0 && g1 && *g1 != *g0; ++it) {
        const double x2 = x1 - *g1 * (x1 - x0) / (*g1 - *g0);
        if (!(x2 > 0.5 * lo && x2 < 2.0 * hi)) break;
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = try_L(p, x1, which, other);
        if (g1 && std::abs(*g1) < 1e-13) break;
    }
    return g1 && g0 && std::abs(*g1) <= std::abs(*g0) ? x1 : x0;
}

SteadyState assemble(const ModelParams& p, Control which, double other,
                     double root) {
    SteadyState s;
    s.x_s = root;
    const double w = feedback(p, root, which, other);
    s.u_s = which == Control::water ? w : other;
    s.v_s = which == Control::water ? other : w;
    s.drift_residual = std::abs(drift(p, root, s.u_s, s.v_s));
    s.L_residual = std::abs(evolution_function(p, root, which, other).L);
    const double h = 1e-4 * root;
    const auto below = try_L(p, root - h, which, other);
    const auto above = try_L(p, root + h, which, other);
    const double slope = (below && above) ? (*above - *below) : 0.0;
    s.stability = slope > 0.0 ? Stability::stable : Stability::unstable;
    s.branch = root < switching_point(p) ? BranchTag::low : BranchTag::high;
    return s;
}

}  // namespace

std::vector<SteadyState> find_steady_states(const ModelParams& p, Control which,
                                            double fixed_other, double x_lo,
                                            double x_hi, int scan_points) {
    if (!(x_lo > 0) || !(x_hi > x_lo))
        throw std::invalid_argument("find_steady_states: need 0 < x_lo < x_hi");
    if (scan_points < 2)
        throw std::invalid_argument("find_steady_states: need >= 2 scan points");

    const double ratio = std::pow(x_hi / x_lo, 1.0 / (scan_points - 1));
    std::vector<SteadyState> out;
    double x_prev = x_lo;
    std::optional<double> L_prev = try_L(p, x_lo, which, fixed_other);
    for (int i = 1; i < scan_points; ++i) {
        const double x = i + 1 == scan_points ? x_hi : x_lo * std::pow(ratio, i);
        const auto L = try_L(p, x, which, fixed_other);
        if (L && L_prev && *L_prev * *L <= 0.0 && *L_prev != *L) {
            const double root =
                refine_root(p, which, fixed_other, x_prev, x, *L_prev);
            out.push_back(assemble(p, which, fixed_other, root));
        }
        x_prev = x;
        L_prev = L;
    }
    return out;
}

SteadyState steady_ccd(const ModelParams& p, double x_lo, double x_hi) {
    if (x_lo <= 0.0)
        x_lo = switching_point(p) * (1.0 + 1e-9);
    if (x_hi <= 0.0)
        x_hi = 10.0 * uncontrolled_steady_state(p);
    if (!(x_lo < x_hi))
        throw std::invalid_argument("steady_ccd: empty window");

    auto stage = [&](Control which, double other, double near) {
        const auto roots = find_steady_states(p, which, other, x_lo, x_hi);
        if (roots.empty())
            throw std::runtime_error(
                std::string("steady_ccd: no root for the ") +
                (which == Control::water ? "water" : "fire") + " stage");
        std::size_t pick = 0;
        if (near > 0.0) {
            for (std::size_t i = 1; i < roots.size(); ++i)
                if (std::abs(roots[i].x_s - near) < std::abs(roots[pick].x_s - near))
                    pick = i;
        } else {
            for (std::size_t i = 1; i < roots.size(); ++i)
                if (roots[i].x_s > roots[pick].x_s) pick = i;
        }
        return roots[pick];
    };

    double u = 0.0, v = 0.0, x_prev = 0.0;
    SteadyState last;
    for (int cycle = 0; cycle < 100; ++cycle) {
        const SteadyState water = stage(Control::water, v, x_prev);
        u = water.u_s;
        const SteadyState fire = stage(Control::fire, u, water.x_s);
        v = fire.v_s;
        last = fire;
        if (cycle > 0 && std::abs(fire.x_s - x_prev) < 1e-9) {
            // Stage-consistent triple: refresh the water level at the final
            // root so the drift vanishes to roundoff.
            last.u_s = feedback_water(p, fire.x_s, v).value;
            last.v_s = v;
            last.drift_residual = std::abs(drift(p, fire.x_s, last.u_s, last.v_s));
            return last;
        }
        x_prev = fire.x_s;
    }
    throw std::runtime_error("steady_ccd: no convergence (last two roots " +
                             std::to_string(x_prev) + ", " +
                             std::to_string(last.x_s) + ")");
}

}  // namespace firewater::steady
