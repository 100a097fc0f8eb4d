// Experiment layer: efficiency sweeps with surface fits and contour
// inversion, the indifference (DNS) point between the two optimal regimes,
// discounted-cost evaluation, a convexity check of the derived Hamiltonian,
// and an independent direct-transcription oracle.
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "firewater/ccd.hpp"
#include "firewater/model.hpp"
#include "firewater/numerics.hpp"

namespace firewater::analysis {

struct CostResult {
    double value;       // trapezoid of the discounted running cost
    double tail_bound;  // c * x_max * e^{-rT} / r, the truncation bound
};

CostResult total_cost(const ModelParams& p, const Trajectory& traj);

struct SweepPoint {
    double gamma = 0.0;
    double beta = 0.0;
    double x_s = 0.0;
    double u_s = 0.0;
    double v_s = 0.0;
    double cost_rate = 0.0;  // undiscounted integrand at the steady state
    bool ok = false;
    std::string error;
};

// High-branch steady states over the (gamma, beta) grid; failures are
// recorded in-row and the sweep continues. Points are solved by a worker
// pool (jobs <= 0 picks the hardware concurrency) and returned in grid
// order regardless of completion order.
std::vector<SweepPoint> sweep_gamma_beta(const ModelParams& p, double gamma_lo,
                                         double gamma_hi, double gamma_step,
                                         double beta_lo, double beta_hi,
                                         double beta_step, int jobs = 0);

// Least-squares surface x_s(gamma, beta) over the successful sweep rows.
numerics::QuadFit fit_sweep(const std::vector<SweepPoint>& points);

// Solves fit(gamma, beta) = target for gamma at each beta; keeps real roots
// inside [gamma_lo, gamma_hi]. Betas without a root are skipped.
std::vector<std::pair<double, double>> contour_solve(const numerics::QuadFit& fit,
                                                     double target,
                                                     std::span<const double> betas,
                                                     double gamma_lo,
                                                     double gamma_hi);

// Re-solves the steady state at each (gamma, beta) pair.
std::vector<SweepPoint> verify_contour(
    const ModelParams& p, const std::vector<std::pair<double, double>>& pairs);

struct DnsResult {
    double x_D = 0.0;     // initial stock where the two regimes cost the same
    double J_low = 0.0;
    double J_high = 0.0;
    double bracket_width = 0.0;
};

// Bisection on the cost difference between the decaying (fire-free) branch
// and the climbing branch. The bracket must straddle the crossing.
DnsResult find_dns(const ModelParams& p, double x_lo, double x_hi,
                   const Grid& grid, double cost_tol = 1e-3);

enum class ConvexityVerdict { locally_convex, indeterminate, nonconvex };

struct ArrowReport {
    std::vector<double> t;
    std::vector<double> H0_xx;       // second x-difference of the derived Hamiltonian
    double min_H0_xx = 0.0;
    ConvexityVerdict verdict = ConvexityVerdict::indeterminate;
    double side_condition = 0.0;     // lambda(T) * x(T), must be >= -1e-6
};

// Convexity-in-x check of the derived Hamiltonian H0(x, lambda*(t), t)
// along a converged solution, by central second differences.
ArrowReport arrow_check(const ModelParams& p, const ccd::CcdResult& result);

struct OracleResult {
    double cost = 0.0;
    Trajectory trajectory;
    int passes = 0;
    bool pass_limit_hit = false;
};

// Direct transcription cross-check: both controls parameterized by their
// knot values and minimized coordinate-wise by golden section against the
// simulated discounted cost. Shares only the model definitions with the
// shooting path. Deliberately coarse: steps <= 100.
OracleResult oracle_direct_solve(const ModelParams& p, double horizon, int steps,
                                 double x0 = 0.95);

}  // namespace firewater::analysis
