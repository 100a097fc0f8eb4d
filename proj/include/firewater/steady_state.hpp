// A-priori steady-state machinery: feedback rules from the zero-drift
// condition, the evolution function whose roots are candidate optimal
// steady states, root scanning with stability classification, and the
// coordinate-descent iteration that yields (x_s, u_s, v_s) without solving
// the dynamic problem.
#pragma once

#include <vector>

#include "firewater/model.hpp"

namespace firewater::steady {

struct FeedbackResult {
    double value;   // clamped at zero
    double raw;     // unclamped solution of drift = 0
    bool clamped;
};

// Water level u = R1(x, v) that makes the drift vanish; may be negative
// mathematically, in which case `value` is clamped and flagged.
FeedbackResult feedback_water(const ModelParams& p, double x, double v);

// Fire level v = R2(x, u) that makes the drift vanish, via the principal
// Lambert W branch. Requires rho > 0; throws when no real solution exists.
FeedbackResult feedback_fire(const ModelParams& p, double x, double u);

struct EvolutionSample {
    double x;
    double L;  // r * (G_w / f_w + dW/dx) along the feedback rule
    double R;  // feedback control at x
};

// Evolution function of the stage optimizing `which`, the other control
// held at `fixed_other`. G is the undiscounted integrand; dW/dx is a
// central difference of W = G/r along the feedback rule.
EvolutionSample evolution_function(const ModelParams& p, double x, Control which,
                                   double fixed_other);

enum class Stability { stable, unstable };
enum class BranchTag { low, high };

struct SteadyState {
    double x_s = 0.0;
    double u_s = 0.0;
    double v_s = 0.0;
    Stability stability = Stability::stable;
    double drift_residual = 0.0;  // |xdot| at the triple
    double L_residual = 0.0;      // |L| at x_s
    BranchTag branch = BranchTag::high;
};

// Scans L on a log-spaced grid over [x_lo, x_hi], brackets sign changes
// between valid samples and bisects each root. Positive slope of L means
// stable (minimization convention); branch is labelled against the
// switching point. Returns an empty list when no sign change exists.
std::vector<SteadyState> find_steady_states(const ModelParams& p, Control which,
                                            double fixed_other, double x_lo,
                                            double x_hi, int scan_points = 400);

// Alternates the two single-control steady-state stages from u = v = 0
// until the root stops moving. The default window is (x_switch,
// 10 * x_uncontrolled), i.e. the regime where both controls are active.
SteadyState steady_ccd(const ModelParams& p, double x_lo = 0.0, double x_hi = 0.0);

}  // namespace firewater::steady
