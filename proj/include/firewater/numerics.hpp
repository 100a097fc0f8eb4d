// Shared numerical kernels: principal-branch Lambert W, secant and
// bisection root finders, trapezoidal quadrature, quadratic surface fits.
#pragma once

#include <functional>
#include <span>
#include <stdexcept>

namespace firewater::numerics {

// A root solve failed to reach its tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The secant update hit a near-zero slope and cannot continue.
class DegenerateSlopeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RootConfig {
    double tol = 1e-5;   // absolute tolerance on the residual
    int max_iter = 100;  // iteration cap
    double seed_a = 0.0; // two starting abscissae, must differ
    double seed_b = 1.0;
};

struct RootResult {
    double root;
    int iterations;
};

// Principal branch W0: the w >= -1 solving w*e^w = z, for z >= -1/e.
// Halley iteration from a branch-aware initial guess; the returned value
// satisfies |w*e^w - z| <= 1e-12 * (1 + |z|).
double lambert_w0(double z);

// Secant iteration until |residual| <= cfg.tol. Throws ConvergenceError
// after cfg.max_iter updates and DegenerateSlopeError when the residual
// difference between iterates falls below 1e-30.
RootResult secant_solve(const std::function<double(double)>& residual,
                        const RootConfig& cfg);

// Plain bisection on a sign change; returns the bracket midpoint once the
// width is <= tol. Throws std::invalid_argument without a sign change.
double bisection(const std::function<double(double)>& f, double a, double b,
                 double tol);

// Composite trapezoid over increasing knots.
double integrate_trapezoid(std::span<const double> t, std::span<const double> y);

// Least-squares surface a0 + a1*g + a2*g^2 + a3*b + a4*b^2 (no cross term).
struct QuadFit {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0;
    double r2 = 0;  // coefficient of determination

    double predict(double g, double b) const {
        return a0 + a1 * g + a2 * g * g + a3 * b + a4 * b * b;
    }
};

// Normal-equation fit in the 5-term basis above; inputs are centered and
// rescaled internally and the coefficients mapped back. Needs >= 5 points
// that are not collinear in the basis.
QuadFit fit_quadratic_surface(std::span<const double> g, std::span<const double> b,
                              std::span<const double> z);

}  // namespace firewater::numerics
