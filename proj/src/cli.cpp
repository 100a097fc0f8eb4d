#include "firewater/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "firewater/analysis.hpp"
#include "firewater/ccd.hpp"
#include "firewater/model.hpp"
#include "firewater/steady_state.hpp"

namespace firewater::cli {

namespace {

using nlohmann::json;

// 17 significant digits reproduce doubles exactly and deterministically.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

json params_json(const ModelParams& p) {
    return json{{"r", p.r},     {"c", p.c},         {"tau", p.tau},
                {"rho", p.rho}, {"k", p.k},         {"alpha", p.alpha},
                {"mu", p.mu},   {"beta", p.beta},   {"theta", p.theta},
                {"gamma", p.gamma}, {"cost_exponent", p.cost_exponent}};
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

const char* stability_name(steady::Stability s) {
    return s == steady::Stability::stable ? "stable" : "unstable";
}

std::string sweep_row(const analysis::SweepPoint& pt) {
    std::ostringstream row;
    row << fmt(pt.gamma) << ',' << fmt(pt.beta) << ',' << fmt(pt.x_s) << ','
        << fmt(pt.u_s) << ',' << fmt(pt.v_s) << ',' << fmt(pt.cost_rate) << ','
        << (pt.ok ? "ok" : "failed") << '\n';
    return row.str();
}

int run_command(const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int cmd_solve(const SolveOptions& opt) {
    return run_command([&] {
        const ModelParams p = load_params(opt.params_path);
        const Grid grid = make_grid(opt.horizon, opt.steps);

        ccd::Branch branch = ccd::Branch::automatic;
        if (opt.branch == "high")
            branch = ccd::Branch::high;
        else if (opt.branch == "low")
            branch = ccd::Branch::low;
        else if (opt.branch != "auto")
            throw std::runtime_error("unknown branch '" + opt.branch + "'");

        const Timer timer;
        const ccd::CcdConfig cfg;
        const ccd::CcdResult res = ccd::solve_branch(p, grid, opt.x0, cfg, branch);

        std::ostringstream csv;
        csv << "t,x,u,v,lambda\n";
        for (std::size_t i = 0; i < res.trajectory.x.size(); ++i)
            csv << fmt(res.trajectory.grid.t[i]) << ',' << fmt(res.trajectory.x[i])
                << ',' << fmt(res.trajectory.u[i]) << ',' << fmt(res.trajectory.v[i])
                << ',' << fmt(res.trajectory.lambda[i]) << '\n';
        write_file(opt.out_csv, csv.str());

        const analysis::CostResult cost = analysis::total_cost(p, res.trajectory);
        json summary;
        summary["parameters"] = params_json(p);
        summary["options"] = {{"x0", opt.x0},
                              {"horizon", opt.horizon},
                              {"steps", opt.steps},
                              {"branch", opt.branch}};
        summary["results"] = {{"K_water", res.K_water},
                              {"K_fire", res.K_fire},
                              {"cycles", res.cycles},
                              {"cost", cost.value},
                              {"cost_tail_bound", cost.tail_bound},
                              {"converged", res.converged},
                              {"water_residual", res.last_water.residual},
                              {"fire_residual", res.last_fire.residual},
                              {"final_x", res.trajectory.x.back()}};
        summary["tolerances"] = {{"tol_K", cfg.tol_K}, {"shoot_tol", cfg.shoot_tol}};
        if (!opt.summary_json.empty())
            write_file(opt.summary_json, summary.dump(2) + "\n");

        std::cout << "solve: x(T) = " << fmt(res.trajectory.x.back())
                  << ", cost = " << fmt(cost.value) << ", cycles = " << res.cycles
                  << ", K = " << fmt(res.K_water) << " / " << fmt(res.K_fire)
                  << (res.converged ? "" : " [not converged]") << " ("
                  << fmt(timer.seconds()) << " s)\n";
        return res.converged ? 0 : 2;
    });
}

int cmd_steady(const SteadyOptions& opt) {
    return run_command([&] {
        const ModelParams p = load_params(opt.params_path);
        if (opt.branch != "high" && opt.branch != "low" && opt.branch != "all")
            throw std::runtime_error("unknown branch '" + opt.branch + "'");

        struct Row {
            std::string branch;
            steady::SteadyState s;
        };
        std::vector<Row> rows;
        if (opt.branch == "high" || opt.branch == "all")
            rows.push_back({"high", steady::steady_ccd(p)});
        if (opt.branch == "low" || opt.branch == "all") {
            const auto low = steady::find_steady_states(
                p, Control::water, 0.0, 1e-8, switching_point(p));
            for (const auto& s : low) rows.push_back({"low", s});
        }

        std::ostringstream csv;
        csv << "gamma,beta,branch,x_s,u_s,v_s,stability,cost_rate\n";
        for (const Row& row : rows) {
            const double stock = p.cost_exponent == 1 ? p.c * row.s.x_s
                                                      : p.c * row.s.x_s * row.s.x_s;
            const double rate = stock + row.s.u_s * row.s.u_s + row.s.v_s * row.s.v_s;
            csv << fmt(p.gamma) << ',' << fmt(p.beta) << ',' << row.branch << ','
                << fmt(row.s.x_s) << ',' << fmt(row.s.u_s) << ',' << fmt(row.s.v_s)
                << ',' << stability_name(row.s.stability) << ',' << fmt(rate) << '\n';
            std::cout << row.branch << ": x_s = " << fmt(row.s.x_s)
                      << ", u_s = " << fmt(row.s.u_s) << ", v_s = " << fmt(row.s.v_s)
                      << " (" << stability_name(row.s.stability) << ")\n";
        }
        if (!opt.out_csv.empty()) write_file(opt.out_csv, csv.str());
        return 0;
    });
}

int cmd_sweep(const SweepOptions& opt) {
    return run_command([&] {
        const ModelParams p = load_params(opt.params_path);
        const Timer timer;
        const auto points = analysis::sweep_gamma_beta(
            p, opt.gamma_min, opt.gamma_max, opt.gamma_step, opt.beta_min,
            opt.beta_max, opt.beta_step, opt.jobs);

        std::ostringstream csv;
        csv << "gamma,beta,x_s,u_s,v_s,cost_rate,status\n";
        int failures = 0;
        for (const auto& pt : points) {
            csv << sweep_row(pt);
            if (!pt.ok) ++failures;
        }
        write_file(opt.out_csv, csv.str());

        if (!opt.summary_json.empty()) {
            json summary;
            summary["parameters"] = params_json(p);
            summary["options"] = {{"gamma_min", opt.gamma_min},
                                  {"gamma_max", opt.gamma_max},
                                  {"gamma_step", opt.gamma_step},
                                  {"beta_min", opt.beta_min},
                                  {"beta_max", opt.beta_max},
                                  {"beta_step", opt.beta_step}};
            summary["results"] = {{"points", points.size()}, {"failures", failures}};
            write_file(opt.summary_json, summary.dump(2) + "\n");
        }
        std::cout << "sweep: " << points.size() << " points, " << failures
                  << " failures (" << fmt(timer.seconds()) << " s)\n";
        return failures == 0 ? 0 : 2;
    });
}

namespace {

std::vector<analysis::SweepPoint> read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "gamma,beta,x_s,u_s,v_s,cost_rate,status")
        throw std::runtime_error(path + ": not a sweep CSV");
    std::vector<analysis::SweepPoint> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        analysis::SweepPoint pt;
        std::string field;
        auto next = [&] {
            if (!std::getline(row, field, ','))
                throw std::runtime_error(path + ": short row");
            return field;
        };
        pt.gamma = std::stod(next());
        pt.beta = std::stod(next());
        pt.x_s = std::stod(next());
        pt.u_s = std::stod(next());
        pt.v_s = std::stod(next());
        pt.cost_rate = std::stod(next());
        pt.ok = next() == "ok";
        out.push_back(pt);
    }
    return out;
}

json fit_json_of(const numerics::QuadFit& fit) {
    return json{{"a0", fit.a0}, {"a1", fit.a1}, {"a2", fit.a2},
                {"a3", fit.a3}, {"a4", fit.a4}, {"r2", fit.r2}};
}

numerics::QuadFit fit_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    numerics::QuadFit fit;
    fit.a0 = j.at("a0");
    fit.a1 = j.at("a1");
    fit.a2 = j.at("a2");
    fit.a3 = j.at("a3");
    fit.a4 = j.at("a4");
    fit.r2 = j.value("r2", 0.0);
    return fit;
}

}  // namespace

int cmd_fit(const FitOptions& opt) {
    return run_command([&] {
        const auto points = read_sweep_csv(opt.in_csv);
        const numerics::QuadFit fit = analysis::fit_sweep(points);
        write_file(opt.out_json, fit_json_of(fit).dump(2) + "\n");
        std::cout << "fit: x_s = " << fmt(fit.a0) << " + " << fmt(fit.a1)
                  << "*g + " << fmt(fit.a2) << "*g^2 + " << fmt(fit.a3) << "*b + "
                  << fmt(fit.a4) << "*b^2, r2 = " << fmt(fit.r2) << '\n';
        return 0;
    });
}

int cmd_contour(const ContourOptions& opt) {
    return run_command([&] {
        const ModelParams p = load_params(opt.params_path);
        numerics::QuadFit fit;
        if (!opt.fit_json.empty())
            fit = fit_from_json(opt.fit_json);
        else if (!opt.sweep_csv.empty())
            fit = analysis::fit_sweep(read_sweep_csv(opt.sweep_csv));
        else
            throw std::runtime_error("contour needs --fit or --sweep input");

        std::vector<double> betas;
        for (double b = opt.beta_min; b <= opt.beta_max + 1e-12; b += opt.beta_step)
            betas.push_back(b);
        const auto pairs = analysis::contour_solve(fit, opt.target, betas,
                                                   opt.gamma_min, opt.gamma_max);
        const auto rows = analysis::verify_contour(p, pairs);

        std::ostringstream csv;
        csv << "gamma,beta,x_s,u_s,v_s,cost\n";
        for (const auto& pt : rows) {
            csv << fmt(pt.gamma) << ',' << fmt(pt.beta) << ',' << fmt(pt.x_s) << ','
                << fmt(pt.u_s) << ',' << fmt(pt.v_s) << ',' << fmt(pt.cost_rate)
                << '\n';
            std::cout << "gamma = " << fmt(pt.gamma) << ", beta = " << fmt(pt.beta)
                      << " -> x_s = " << fmt(pt.x_s) << ", cost = "
                      << fmt(pt.cost_rate) << (pt.ok ? "" : " [failed]") << '\n';
        }
        write_file(opt.out_csv, csv.str());
        for (const auto& pt : rows)
            if (!pt.ok) return 2;
        return 0;
    });
}

int cmd_dns(const DnsOptions& opt) {
    return run_command([&] {
        const ModelParams p = load_params(opt.params_path);
        const Grid grid = make_grid(opt.horizon, opt.steps);
        const Timer timer;
        const analysis::DnsResult res = analysis::find_dns(p, opt.x_lo, opt.x_hi, grid);

        json out;
        out["parameters"] = params_json(p);
        out["options"] = {{"x_lo", opt.x_lo},
                          {"x_hi", opt.x_hi},
                          {"horizon", opt.horizon},
                          {"steps", opt.steps}};
        out["results"] = {{"x_D", res.x_D},
                          {"J_low", res.J_low},
                          {"J_high", res.J_high},
                          {"bracket_width", res.bracket_width}};
        out["tolerances"] = {{"cost_tol", 1e-3}};
        write_file(opt.out_json, out.dump(2) + "\n");
        std::cout << "dns: x_D = " << fmt(res.x_D) << ", J_low = " << fmt(res.J_low)
                  << ", J_high = " << fmt(res.J_high) << " (" << fmt(timer.seconds())
                  << " s)\n";
        return 0;
    });
}

int cmd_arrow(const ArrowOptions& opt) {
    return run_command([&] {
        const ModelParams p = load_params(opt.params_path);
        const Grid grid = make_grid(opt.horizon, opt.steps);
        const ccd::CcdResult res =
            ccd::solve_branch(p, grid, opt.x0, {}, ccd::Branch::automatic);
        if (!res.converged) {
            std::cerr << "error: dynamic solve did not converge; convexity check "
                         "needs a converged solution\n";
            return 2;
        }
        const analysis::ArrowReport report = analysis::arrow_check(p, res);

        std::ostringstream csv;
        csv << "t,H0_xx\n";
        for (std::size_t i = 0; i < report.t.size(); ++i)
            csv << fmt(report.t[i]) << ',' << fmt(report.H0_xx[i]) << '\n';
        write_file(opt.out_csv, csv.str());

        const char* verdict =
            report.verdict == analysis::ConvexityVerdict::locally_convex
                ? "locally_convex"
                : report.verdict == analysis::ConvexityVerdict::nonconvex
                      ? "nonconvex"
                      : "indeterminate";
        if (!opt.summary_json.empty()) {
            json out;
            out["parameters"] = params_json(p);
            out["options"] = {{"x0", opt.x0},
                              {"horizon", opt.horizon},
                              {"steps", opt.steps}};
            out["results"] = {{"verdict", verdict},
                              {"min_H0_xx", report.min_H0_xx},
                              {"side_condition", report.side_condition}};
            write_file(opt.summary_json, out.dump(2) + "\n");
        }
        std::cout << "arrow: verdict = " << verdict
                  << ", min H0_xx = " << fmt(report.min_H0_xx) << '\n';
        return 0;
    });
}

}  // namespace firewater::cli
