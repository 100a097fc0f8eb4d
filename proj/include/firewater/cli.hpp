// Command implementations behind the command-line front end. Each returns
// a process exit status: 0 on success, 1 on input/IO errors, 2 on flagged
// non-convergence (results are still written).
#pragma once

#include <string>

namespace firewater::cli {

struct SolveOptions {
    std::string params_path;
    double x0 = 0.95;
    double horizon = 100.0;
    int steps = 250;
    std::string branch = "auto";  // auto | high | low
    std::string out_csv = "trajectory.csv";
    std::string summary_json;     // optional
};
int cmd_solve(const SolveOptions& opt);

struct SteadyOptions {
    std::string params_path;
    std::string branch = "high";  // high | low | all
    std::string out_csv;          // optional
};
int cmd_steady(const SteadyOptions& opt);

struct SweepOptions {
    std::string params_path;
    double gamma_min = 0.1, gamma_max = 0.2, gamma_step = 0.01;
    double beta_min = 0.01, beta_max = 0.02, beta_step = 0.001;
    int jobs = 0;
    std::string out_csv = "sweep.csv";
    std::string summary_json;
};
int cmd_sweep(const SweepOptions& opt);

struct FitOptions {
    std::string in_csv;           // sweep output
    std::string out_json = "fit.json";
};
int cmd_fit(const FitOptions& opt);

struct ContourOptions {
    std::string params_path;
    std::string fit_json;         // fit output; refit from sweep_csv if empty
    std::string sweep_csv;
    double target = 0.4;
    double beta_min = 0.01, beta_max = 0.02, beta_step = 0.001;
    double gamma_min = 0.1, gamma_max = 0.2;
    std::string out_csv = "contour.csv";
};
int cmd_contour(const ContourOptions& opt);

struct DnsOptions {
    std::string params_path;
    double x_lo = 0.005;
    double x_hi = 0.02;
    double horizon = 130.0;  // long enough for the climbing branch's tail,
    int steps = 650;         // short enough for the decaying branch
    std::string out_json = "dns.json";
};
int cmd_dns(const DnsOptions& opt);

struct ArrowOptions {
    std::string params_path;
    double x0 = 0.95;
    double horizon = 100.0;
    int steps = 250;
    std::string out_csv = "arrow.csv";
    std::string summary_json;
};
int cmd_arrow(const ArrowOptions& opt);

}  // namespace firewater::cli
