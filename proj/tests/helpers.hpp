// Shared fixtures for the test suites.
#pragma once

#include <cmath>
#include <random>

#include "firewater/model.hpp"

namespace fwtest {

// Base calibration (the ModelParams defaults are exactly this).
inline firewater::ModelParams base_params() { return firewater::ModelParams{}; }

inline firewater::ModelParams quadratic_params() {
    firewater::ModelParams p;
    p.cost_exponent = 2;
    return p;
}

// Current-value costate consistent with an interior steady state: the
// stationary costate equation gives lambda = G_x / (r - f_x).
inline double steady_costate(const firewater::ModelParams& p, double x, double u,
                             double v) {
    const firewater::Partials d = firewater::partials(p, 0.0, x, u, v);
    const double G_x = p.cost_exponent == 1 ? p.c : 2.0 * p.c * x;
    return G_x / (p.r - d.f_x);
}

// Central finite difference of a scalar callable.
template <typename F>
double central_diff(F f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::mt19937 rng(unsigned seed = 20240811u) { return std::mt19937(seed); }

}  // namespace fwtest
