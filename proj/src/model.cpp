#include "firewater/model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace firewater {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::domain_error(msg); }

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void ModelParams::validate() const {
    if (!(r > 0)) fail("r must be positive");
    if (!(tau >= 0)) fail("tau must be non-negative");
    if (!(rho >= 0)) fail("rho must be non-negative");
    if (!(k > 0)) fail("k must be positive");
    if (!(alpha >= 0 && alpha <= 1)) fail("alpha must lie in [0, 1]");
    if (!(mu > 0)) fail("mu must be positive");
    if (!(beta > 0)) fail("beta must be positive");
    if (!(theta <= 1)) fail("theta must be <= 1");
    if (!(gamma > 0)) fail("gamma must be positive");
    if (cost_exponent != 1 && cost_exponent != 2)
        fail("cost_exponent must be 1 or 2");
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file: " + path);

    std::map<std::string, double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        static const char* known[] = {"r",  "c",     "tau",   "rho",  "k",    "alpha",
                                      "mu", "beta",  "theta", "gamma", "cost_exponent"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
        if (values.count(key))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": duplicate key '" + key + "'");
        try {
            std::size_t used = 0;
            const double parsed = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            values[key] = parsed;
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad numeric value '" + val + "'");
        }
    }

    ModelParams p;
    auto take = [&](const char* key, double& dst) {
        auto it = values.find(key);
        if (it == values.end())
            throw std::runtime_error(path + ": missing key '" + std::string(key) + "'");
        dst = it->second;
    };
    take("r", p.r);
    take("c", p.c);
    take("tau", p.tau);
    take("rho", p.rho);
    take("k", p.k);
    take("alpha", p.alpha);
    take("mu", p.mu);
    take("beta", p.beta);
    take("theta", p.theta);
    take("gamma", p.gamma);
    double pexp = 0;
    take("cost_exponent", pexp);
    if (pexp != 1.0 && pexp != 2.0)
        throw std::runtime_error(path + ": cost_exponent must be 1 or 2");
    p.cost_exponent = static_cast<int>(pexp);
    p.validate();
    return p;
}

double switching_point(const ModelParams& p) {
    if (p.alpha >= 1.0) fail("switching point undefined for alpha = 1");
    if (p.rho <= 0.0 || p.k <= 0.0) return 0.0;
    return std::pow(p.rho * p.k / p.gamma, 1.0 / (1.0 - p.alpha));
}

double uncontrolled_steady_state(const ModelParams& p) {
    if (p.alpha >= 1.0) fail("uncontrolled steady state undefined for alpha = 1");
    return std::pow(p.k / p.mu, 1.0 / (1.0 - p.alpha));
}

DerivedConstants derived_constants(const ModelParams& p) {
    return {switching_point(p), uncontrolled_steady_state(p)};
}

Grid make_grid(double horizon, int steps) {
    if (!(horizon > 0)) fail("grid horizon must be positive");
    if (steps < 2) fail("grid needs at least 2 steps");
    Grid g;
    g.horizon = horizon;
    g.steps = steps;
    g.t.resize(steps + 1);
    for (int i = 0; i <= steps; ++i) g.t[i] = horizon * i / steps;
    return g;
}

double drift(const ModelParams& p, double x, double u, double v) {
    if (x < 0 || u < 0 || v < 0) fail("drift requires x, u, v >= 0");
    return p.tau + (1.0 + p.rho * v) * p.k * std::pow(x, p.alpha) - p.mu * x -
           p.beta * std::log1p(u) * std::pow(x, p.theta) -
           p.gamma * std::log1p(v) * x;
}

double running_cost(const ModelParams& p, double t, double x, double u, double v) {
    if (t < 0 || x < 0) fail("running cost requires t, x >= 0");
    const double stock = (p.cost_exponent == 1) ? p.c * x : p.c * x * x;
    return (stock + u * u + v * v) * std::exp(-p.r * t);
}

Partials partials(const ModelParams& p, double t, double x, double u, double v) {
    if (!(x > 0)) fail("partials require x > 0");
    if (u < 0 || v < 0) fail("partials require u, v >= 0");
    const double disc = std::exp(-p.r * t);
    const double xa = std::pow(x, p.alpha);
    const double xt = std::pow(x, p.theta);
    Partials d;
    d.f_u = -p.beta * xt / (1.0 + u);
    d.f_v = p.rho * p.k * xa - p.gamma * x / (1.0 + v);
    d.f_x = p.alpha * (1.0 + p.rho * v) * p.k * std::pow(x, p.alpha - 1.0) - p.mu -
            p.theta * p.beta * std::log1p(u) * std::pow(x, p.theta - 1.0) -
            p.gamma * std::log1p(v);
    d.F_u = 2.0 * u * disc;
    d.F_v = 2.0 * v * disc;
    d.F_x = (p.cost_exponent == 1) ? p.c * disc : 2.0 * p.c * x * disc;
    return d;
}

double hamiltonian(const ModelParams& p, double t, double x, double u, double v,
                   double lambda) {
    return running_cost(p, t, x, u, v) + lambda * drift(p, x, u, v);
}

double v_star(const ModelParams& p, double x, double lambda, double t) {
    if (x < 0) fail("v_star requires x >= 0");
    // Work with the current-value multiplier m = lambda * e^{rt}; the
    // stationarity condition H_v = 0 becomes
    //   2 v (1+v) + m rho k x^alpha (1+v) - m gamma x = 0.
    const double m = lambda * std::exp(p.r * t);
    if (m == 0.0) return 0.0;
    const double inflow_slope = p.rho * p.k * std::pow(x, p.alpha);  // f_v at v=0 + gamma*x
    const double removal = p.gamma * x;
    // Sign of the unconstrained minimizer from the rewritten radicand:
    // v* < 0 exactly when m * (rho k x^alpha - gamma x) > 0.
    if (m * (inflow_slope - removal) >= 0.0) return 0.0;
    const double B = m * inflow_slope;
    const double C = m * removal;
    const double disc = (B - 2.0) * (B - 2.0) + 8.0 * C;
    if (disc < 0.0)
        throw std::domain_error("v_star: negative radicand (invalid costate regime)");
    // Positive root of 2 v^2 + (2+B) v + (B-C) = 0, in cancellation-free form.
    return 2.0 * (C - B) / ((B + 2.0) + std::sqrt(disc));
}

ControlPair optimal_controls(const ModelParams& p, double x, double lambda, double t) {
    if (!(x > 0)) fail("optimal_controls require x > 0");
    const double m = lambda * std::exp(p.r * t);
    const double ru = 2.0 * p.beta * m * std::pow(x, p.theta) + 1.0;
    if (ru < 0.0)
        throw std::domain_error("optimal_controls: negative radicand for u");
    ControlPair out;
    out.u = std::max(0.0, 0.5 * (std::sqrt(ru) - 1.0));
    out.v = v_star(p, x, lambda, t);
    return out;
}

double discounted_cost(const ModelParams& p, const Trajectory& traj) {
    const auto& t = traj.grid.t;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double fa = running_cost(p, t[i], traj.x[i], traj.u[i], traj.v[i]);
        const double fb = running_cost(p, t[i + 1], traj.x[i + 1], traj.u[i + 1],
                                       traj.v[i + 1]);
        sum += 0.5 * (t[i + 1] - t[i]) * (fa + fb);
    }
    return sum;
}

}  // namespace firewater
