// Single-control extremal construction and costate shooting.
//
// For a fixed constant K (the initial costate) the extremal builder marches
// the grid, solving one scalar equation per knot for the active control and
// advancing the state by explicit Euler. Shooting then adjusts K with the
// secant method until the terminal costate vanishes.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "firewater/model.hpp"

namespace firewater::shooting {

// A probe K drove the march out of the representable regime: the costate
// magnitude exploded, usually crushing the state onto the floor. The sign
// of the exploding costate matches the sign of the true terminal residual,
// which lets shooting loops steer back.
struct BlowupError : std::runtime_error {
    BlowupError(int knot_, double sign_)
        : std::runtime_error("costate blow-up at knot " + std::to_string(knot_)),
          knot(knot_),
          sign(sign_) {}
    int knot;
    double sign;
};

// States are floored here during integration; tau > 0 keeps the origin
// non-attracting so the floor never matters at model scales.
inline constexpr double kStateFloor = 1e-12;

// Upper bound of the per-knot control solve.
inline constexpr double kControlMax = 1e3;

// Which control is optimized; the other is held at the given knot values.
struct ControlSelector {
    Control which = Control::water;
    std::vector<double> fixed_other;  // one value per grid knot, all >= 0
};

// Running quadrature state for the two costate integrals
//   A(t) = int_0^t f_x ds,   B(t) = int_0^t F_x e^{A(s)} ds.
// Both advance by one trapezoid step per knot. The values offered to a
// knot's control solve exclude that knot's still-unknown control: the
// current knot enters through the previous knot's control instead.
struct ExtremalAccumulators {
    double A = 0.0;
    double B = 0.0;
    double Y = 0.0;  // indicator -F_w/f_w * e^A + B of the last queried knot
};

// Builds the trajectory for a given K: at each knot the active control
// solves the stationarity equation implied by the constant-indicator
// condition (zero when the unconstrained solution is negative, and the
// fire control is forced to zero below the switching point). The costate
// array is left empty.
Trajectory build_extremal(const ModelParams& p, const Grid& grid, double x0,
                          double K, const ControlSelector& sel);

// Costate reconstruction lambda(t) = [K - B(t)] e^{-A(t)} along a built
// trajectory, with the same quadrature convention as the builder.
std::vector<double> costate_from_K(const ModelParams& p, const Trajectory& traj,
                                   double K, const ControlSelector& sel);

// The indicator -F_w/f_w * e^{A} + B evaluated at every knot of a built
// trajectory. Equals K on arcs where the active control is interior.
std::vector<double> y_indicator(const ModelParams& p, const Trajectory& traj,
                                const ControlSelector& sel);

struct ShootingResult {
    double K = 0.0;            // converged initial costate
    Trajectory trajectory;     // with the costate filled in
    double residual = 0.0;     // |lambda(T)|
    int secant_iterations = 0;
    bool met_tolerance = true; // false when the conditioning floor was hit
};

// Secant iteration on K until |lambda(T)| <= tol. Extremals that pass near
// an unstable steady state make the terminal costate exponentially stiff in
// K; when the root bracket collapses to machine resolution before the
// tolerance is met, the best bracketed iterate is returned with
// met_tolerance = false instead of an error.
ShootingResult shoot(const ModelParams& p, const Grid& grid, double x0,
                     double K_min, double K_max, const ControlSelector& sel,
                     double tol = 1e-5, int max_iter = 100);

}  // namespace firewater::shooting
