#include "firewater/numerics.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace firewater::numerics {

double lambert_w0(double z) {
    constexpr double inv_e = 0.36787944117144232;  // 1/e
    if (z < -inv_e - 1e-12)
        throw std::domain_error("lambert_w0: argument below -1/e");
    if (z <= -inv_e) return -1.0;

    double w;
    const double q = 2.0 * (std::exp(1.0) * z + 1.0);
    if (q < 0.25) {
        // Series around the branch point in p = sqrt(2(e z + 1)).
        const double s = std::sqrt(std::max(q, 0.0));
        w = -1.0 + s * (1.0 + s * (-1.0 / 3.0 + s * (11.0 / 72.0 +
            s * (-43.0 / 540.0 + s * (769.0 / 17280.0)))));
        if (s < 1e-3) return w;  // residual already at roundoff level
    } else {
        w = std::log1p(z);
    }

    const double tol = 1e-13 * (1.0 + std::abs(z));
    for (int i = 0; i < 50; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        if (std::abs(f) <= tol) return w;
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        double next = w - f / denom;
        if (next <= -1.0) next = 0.5 * (w - 1.0);  // stay on the principal branch
        w = next;
    }
    const double res = std::abs(w * std::exp(w) - z);
    if (res <= 1e-12 * (1.0 + std::abs(z))) return w;
    throw ConvergenceError("lambert_w0: no convergence at z = " + std::to_string(z));
}

RootResult secant_solve(const std::function<double(double)>& residual,
                        const RootConfig& cfg) {
    if (!(cfg.tol > 0)) throw std::invalid_argument("secant: tol must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("secant: max_iter must be >= 1");
    if (cfg.seed_a == cfg.seed_b)
        throw std::invalid_argument("secant: seeds must differ");

    double a = cfg.seed_a, b = cfg.seed_b;
    double fa = residual(a);
    if (std::abs(fa) <= cfg.tol) return {a, 0};
    double fb = residual(b);
    if (std::abs(fb) <= cfg.tol) return {b, 0};

    for (int i = 1; i <= cfg.max_iter; ++i) {
        const double denom = fb - fa;
        if (std::abs(denom) < 1e-30)
            throw DegenerateSlopeError("secant: residual slope below 1e-30");
        const double x = b - fb * (b - a) / denom;
        const double fx = residual(x);
        if (!std::isfinite(fx))
            throw ConvergenceError("secant: residual not finite at x = " +
                                   std::to_string(x));
        a = b;
        fa = fb;
        b = x;
        fb = fx;
        if (std::abs(fx) <= cfg.tol) return {x, i};
    }
    throw ConvergenceError("secant: no convergence after " +
                           std::to_string(cfg.max_iter) + " iterations (residual " +
                           std::to_string(fb) + ")");
}

double bisection(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    if (!(tol > 0)) throw std::invalid_argument("bisection: tol must be positive");
    if (a > b) std::swap(a, b);
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("bisection: invalid bracket");
    for (int i = 0; i < 200 && (b - a) > tol; ++i) {
        const double m = a + 0.5 * (b - a);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return a + 0.5 * (b - a);
}

double integrate_trapezoid(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size())
        throw std::invalid_argument("trapezoid: size mismatch");
    if (t.size() < 2) throw std::invalid_argument("trapezoid: need >= 2 samples");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (!(t[i + 1] > t[i]))
            throw std::invalid_argument("trapezoid: knots must increase");
        sum += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
    }
    return sum;
}

namespace {

// Gaussian elimination with partial pivoting for the 5x5 normal system.
std::array<double, 5> solve5(std::array<std::array<double, 5>, 5> m,
                             std::array<double, 5> rhs) {
    for (int col = 0; col < 5; ++col) {
        int piv = col;
        for (int r = col + 1; r < 5; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-12)
            throw std::runtime_error("fit: singular normal equations");
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int r = 0; r < 5; ++r) {
            if (r == col) continue;
            const double factor = m[r][col] / m[col][col];
            for (int c = col; c < 5; ++c) m[r][c] -= factor * m[col][c];
            rhs[r] -= factor * rhs[col];
        }
    }
    std::array<double, 5> out{};
    for (int i = 0; i < 5; ++i) out[i] = rhs[i] / m[i][i];
    return out;
}

}  // namespace

QuadFit fit_quadratic_surface(std::span<const double> g, std::span<const double> b,
                              std::span<const double> z) {
    const std::size_t n = g.size();
    if (b.size() != n || z.size() != n)
        throw std::invalid_argument("fit: size mismatch");
    if (n < 5) throw std::invalid_argument("fit: need at least 5 points");

    auto mean = [](std::span<const double> v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto spread = [&](std::span<const double> v, double m) {
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        s = std::sqrt(s / static_cast<double>(v.size()));
        return s > 0 ? s : 1.0;
    };
    const double gm = mean(g), bm = mean(b);
    const double gs = spread(g, gm), bs = spread(b, bm);

    std::array<std::array<double, 5>, 5> ata{};
    std::array<double, 5> atz{};
    for (std::size_t i = 0; i < n; ++i) {
        const double gg = (g[i] - gm) / gs;
        const double bb = (b[i] - bm) / bs;
        const std::array<double, 5> row = {1.0, gg, gg * gg, bb, bb * bb};
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) ata[r][c] += row[r] * row[c];
            atz[r] += row[r] * z[i];
        }
    }
    const auto s = solve5(ata, atz);

    QuadFit fit;
    fit.a2 = s[2] / (gs * gs);
    fit.a1 = s[1] / gs - 2.0 * s[2] * gm / (gs * gs);
    fit.a4 = s[4] / (bs * bs);
    fit.a3 = s[3] / bs - 2.0 * s[4] * bm / (bs * bs);
    fit.a0 = s[0] - s[1] * gm / gs + s[2] * gm * gm / (gs * gs) - s[3] * bm / bs +
             s[4] * bm * bm / (bs * bs);

    const double zm = mean(z);
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = z[i] - fit.predict(g[i], b[i]);
        ss_res += e * e;
        ss_tot += (z[i] - zm) * (z[i] - zm);
    }
    fit.r2 = (ss_tot > 1e-300) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace firewater::numerics
