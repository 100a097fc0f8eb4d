// Fire-and-water counter-terror control model: dynamics, running cost,
// analytic partial derivatives and the closed-form quantities that follow
// from them (switching point, unconstrained control minimizers).
#pragma once

#include <string>
#include <vector>

namespace firewater {

// Which of the two controls an operation acts on.
enum class Control { water, fire };

// Model constants. Defaults are the base calibration: the uncontrolled
// steady state is normalized to 1 (k = mu), fire operations are roughly
// ten times as efficient as water operations at full stock size.
struct ModelParams {
    double r = 0.05;        // discount rate (1/year)
    double c = 1.0;         // cost per unit of stock
    double tau = 1e-5;      // constant inflow (stock/year)
    double rho = 1.0;       // recruitment stimulus of fire operations
    double k = 0.05;        // recruitment scale (1/year)
    double alpha = 0.75;    // recruitment exponent, in [0, 1]
    double mu = 0.05;       // natural per-capita outflow (1/year)
    double beta = 0.01;     // efficiency of water operations
    double theta = 0.1;     // diminishing returns of water operations, <= 1
    double gamma = 0.1;     // efficiency of fire operations
    int cost_exponent = 1;  // stock-cost exponent p: c*x (1) or c*x^2 (2)

    void validate() const;  // throws std::domain_error on a bad field
};

// Parses a flat key=value parameter file, one key per line, '#' comments
// allowed. All eleven keys must be present; unknown keys are an error.
ModelParams load_params(const std::string& path);

// Closed-form landmarks of the state space.
struct DerivedConstants {
    double x_switch;        // below this stock level the fire control is inactive
    double x_uncontrolled;  // steady state with both controls off (tau neglected)
};

// (rho*k/gamma)^(1/(1-alpha)); 0 when rho = 0 or k = 0. Requires alpha < 1.
double switching_point(const ModelParams& p);

// (k/mu)^(1/(1-alpha)). Requires alpha < 1.
double uncontrolled_steady_state(const ModelParams& p);

DerivedConstants derived_constants(const ModelParams& p);

// Uniform time grid with steps+1 knots on [0, horizon].
struct Grid {
    double horizon = 0.0;
    int steps = 0;
    std::vector<double> t;
};

Grid make_grid(double horizon, int steps);

// State, controls and costate sampled on a grid. `lambda` may be empty
// until a costate reconstruction fills it.
struct Trajectory {
    Grid grid;
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> lambda;
};

// Right-hand side of the state equation:
//   tau + (1+rho*v)*k*x^alpha - mu*x - beta*ln(1+u)*x^theta - gamma*ln(1+v)*x
double drift(const ModelParams& p, double x, double u, double v);

// Discounted cost rate (c*x^p + u^2 + v^2) * exp(-r*t).
double running_cost(const ModelParams& p, double t, double x, double u, double v);

// All first partials of the drift f and the discounted integrand F.
struct Partials {
    double f_x, f_u, f_v;
    double F_x, F_u, F_v;
};

Partials partials(const ModelParams& p, double t, double x, double u, double v);

// Present-value Hamiltonian F + lambda * f.
double hamiltonian(const ModelParams& p, double t, double x, double u, double v,
                   double lambda);

// Unconstrained minimizer of the Hamiltonian over the fire control,
// clamped at zero. Zero whenever x is below the switching point and the
// costate is positive. Throws if the radicand turns negative (invalid
// costate regime).
double v_star(const ModelParams& p, double x, double lambda, double t);

struct ControlPair {
    double u;
    double v;
};

// Closed-form pair (u0, v0) minimizing the Hamiltonian at (x, lambda, t),
// each clamped at zero. Requires lambda >= 0 up to roundoff.
ControlPair optimal_controls(const ModelParams& p, double x, double lambda, double t);

// Composite trapezoid of running_cost over the trajectory's grid.
double discounted_cost(const ModelParams& p, const Trajectory& traj);

}  // namespace firewater
