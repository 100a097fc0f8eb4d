// Cyclic coordinate descent over the two controls: alternate shooting for
// the water stage (fire fixed) and the fire stage (water fixed) until the
// per-control shooting constants stabilize.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "firewater/model.hpp"
#include "firewater/pmp_shooting.hpp"

namespace firewater::ccd {

struct CcdConfig {
    double tol_K = 1e-3;     // stop when both constants move less than this
    int max_cycles = 20;
    double shoot_tol = 1e-5; // transversality tolerance per stage
    bool water_first = true;
    // First-cycle secant seeds per control; later cycles reuse the previous
    // constant. Defaults to (0, 2 c x0 / r) when unset.
    std::optional<std::pair<double, double>> water_seeds;
    std::optional<std::pair<double, double>> fire_seeds;
};

struct CycleRecord {
    double K_water = 0.0;
    double K_fire = 0.0;
    double cost = 0.0;
    int water_iterations = 0;
    int fire_iterations = 0;
};

struct CcdResult {
    Trajectory trajectory;   // last fire stage: both controls, state, costate
    double K_water = 0.0;
    double K_fire = 0.0;
    int cycles = 0;
    double cost = 0.0;       // discounted total over the grid
    bool converged = false;
    std::vector<CycleRecord> per_cycle;
    shooting::ShootingResult last_water;  // converged stage results, kept for
    shooting::ShootingResult last_fire;   // consistency checks downstream
};

// Which long-run regime a solve should land on. Initial stocks below the
// switching point admit two locally optimal paths: one decaying to the tiny
// steady state (with the fire control never active) and one climbing to the
// high steady state. `automatic` solves both and keeps the cheaper.
enum class Branch { automatic, high, low };

CcdResult solve_branch(const ModelParams& p, const Grid& grid, double x0,
                       const CcdConfig& cfg, Branch branch);

// Cost-minimizing solve from u = v = 0 (automatic branch selection).
CcdResult solve_multicontrol(const ModelParams& p, const Grid& grid, double x0,
                             const CcdConfig& cfg = {});

}  // namespace firewater::ccd
