// Command-line front end: solve, steady, sweep, fit, contour, dns, arrow.
#include <CLI11.hpp>

#include "firewater/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fire-and-water counter-terror control solver"};
    app.require_subcommand(1);

    using namespace firewater::cli;

    SolveOptions solve;
    auto* cmd_solve = app.add_subcommand(
        "solve", "dynamic optimal path by shooting + coordinate descent");
    cmd_solve->add_option("--params", solve.params_path, "parameter file")
        ->required();
    cmd_solve->add_option("--x0", solve.x0, "initial stock");
    cmd_solve->add_option("--horizon", solve.horizon, "time horizon (years)");
    cmd_solve->add_option("--steps", solve.steps, "grid sub-intervals");
    cmd_solve->add_option("--branch", solve.branch, "auto | high | low");
    cmd_solve->add_option("--out", solve.out_csv, "trajectory CSV path");
    cmd_solve->add_option("--summary", solve.summary_json, "summary JSON path");

    SteadyOptions steady;
    auto* cmd_steady =
        app.add_subcommand("steady", "a-priori steady states");
    cmd_steady->add_option("--params", steady.params_path, "parameter file")
        ->required();
    cmd_steady->add_option("--branch", steady.branch, "high | low | all");
    cmd_steady->add_option("--out", steady.out_csv, "steady-state CSV path");

    SweepOptions sweep;
    auto* cmd_sweep =
        app.add_subcommand("sweep", "steady states over a (gamma, beta) grid");
    cmd_sweep->add_option("--params", sweep.params_path, "parameter file")
        ->required();
    cmd_sweep->add_option("--gamma-min", sweep.gamma_min);
    cmd_sweep->add_option("--gamma-max", sweep.gamma_max);
    cmd_sweep->add_option("--gamma-step", sweep.gamma_step);
    cmd_sweep->add_option("--beta-min", sweep.beta_min);
    cmd_sweep->add_option("--beta-max", sweep.beta_max);
    cmd_sweep->add_option("--beta-step", sweep.beta_step);
    cmd_sweep->add_option("--jobs", sweep.jobs, "worker threads (0 = all cores)");
    cmd_sweep->add_option("--out", sweep.out_csv, "sweep CSV path");
    cmd_sweep->add_option("--summary", sweep.summary_json, "summary JSON path");

    FitOptions fit;
    auto* cmd_fit =
        app.add_subcommand("fit", "least-squares surface over a sweep CSV");
    cmd_fit->add_option("--in", fit.in_csv, "sweep CSV")->required();
    cmd_fit->add_option("--out", fit.out_json, "fit JSON path");

    ContourOptions contour;
    auto* cmd_contour = app.add_subcommand(
        "contour", "efficiency pairs reaching a target steady state");
    cmd_contour->add_option("--params", contour.params_path, "parameter file")
        ->required();
    cmd_contour->add_option("--fit", contour.fit_json, "fit JSON");
    cmd_contour->add_option("--sweep", contour.sweep_csv, "sweep CSV to refit");
    cmd_contour->add_option("--target", contour.target, "target steady state");
    cmd_contour->add_option("--beta-min", contour.beta_min);
    cmd_contour->add_option("--beta-max", contour.beta_max);
    cmd_contour->add_option("--beta-step", contour.beta_step);
    cmd_contour->add_option("--gamma-min", contour.gamma_min);
    cmd_contour->add_option("--gamma-max", contour.gamma_max);
    cmd_contour->add_option("--out", contour.out_csv, "contour CSV path");

    DnsOptions dns;
    auto* cmd_dns = app.add_subcommand(
        "dns", "initial stock where the two optimal regimes cost the same");
    cmd_dns->add_option("--params", dns.params_path, "parameter file")->required();
    cmd_dns->add_option("--lo", dns.x_lo, "bracket lower end");
    cmd_dns->add_option("--hi", dns.x_hi, "bracket upper end");
    cmd_dns->add_option("--horizon", dns.horizon);
    cmd_dns->add_option("--steps", dns.steps);
    cmd_dns->add_option("--out", dns.out_json, "result JSON path");

    ArrowOptions arrow;
    auto* cmd_arrow = app.add_subcommand(
        "arrow", "convexity check of the derived Hamiltonian");
    cmd_arrow->add_option("--params", arrow.params_path, "parameter file")
        ->required();
    cmd_arrow->add_option("--x0", arrow.x0, "initial stock");
    cmd_arrow->add_option("--horizon", arrow.horizon);
    cmd_arrow->add_option("--steps", arrow.steps);
    cmd_arrow->add_option("--out", arrow.out_csv, "H0_xx CSV path");
    cmd_arrow->add_option("--summary", arrow.summary_json, "summary JSON path");

    CLI11_PARSE(app, argc, argv);

    if (cmd_solve->parsed()) return firewater::cli::cmd_solve(solve);
    if (cmd_steady->parsed()) return firewater::cli::cmd_steady(steady);
    if (cmd_sweep->parsed()) return firewater::cli::cmd_sweep(sweep);
    if (cmd_fit->parsed()) return firewater::cli::cmd_fit(fit);
    if (cmd_contour->parsed()) return firewater::cli::cmd_contour(contour);
    if (cmd_dns->parsed()) return firewater::cli::cmd_dns(dns);
    if (cmd_arrow->parsed()) return firewater::cli::cmd_arrow(arrow);
    return 1;
}
