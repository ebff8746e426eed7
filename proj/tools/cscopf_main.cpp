#include <iostream>

#include <CLI11.hpp>

#include "cscopf/cli.hpp"

using namespace cscopf;

int main(int argc, char** argv)
{
    CLI::App app{"Convexified small-signal-stability-constrained OPF"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, case_flag, gamma, mode, out, format, solution;
    double tol = 0, eps = 0, sweep_min = 0, sweep_max = 0;
    int max_iter = 0, points = 0, jobs = 0;
    bool verbose = false, quiet = false, dump = false, window = false;

    app.add_option("--config", config_path, "JSON config file (flags override it)");
    auto* o_case = app.add_option("--case", case_flag, "case file (JSON)");
    auto* o_gamma = app.add_option("--gamma", gamma, "penalty weights g1,g2,g3,g4,g5");
    auto* o_mode = app.add_option("--mode", mode, "stability mode: penalty-only, constraint, zeta");
    auto* o_tol = app.add_option("--tol", tol, "solver feasibility and gap tolerance");
    auto* o_iter = app.add_option("--max-iter", max_iter, "solver iteration limit");
    auto* o_eps = app.add_option("--eps", eps, "Lyapunov margin, P >= eps I");
    auto* o_out = app.add_option("--out", out, "output directory");
    auto* o_format = app.add_option("--format", format, "report format: csv or json");
    auto* o_verbose = app.add_flag("--verbose", verbose, "print solver iterations");
    auto* o_quiet = app.add_flag("--quiet", quiet, "less progress output");
    auto* o_window = app.add_flag("--window", window, "tighten McCormick boxes to a window around the base point");

    auto* opf = app.add_subcommand("opf", "relaxed OPF");
    auto* scopf = app.add_subcommand("scopf", "stability-constrained OPF");
    auto* sweep = app.add_subcommand("sweep", "C-SCOPF over a log-spaced gamma1 grid");
    auto* verify = app.add_subcommand("verify", "recompute the stability verdict of a solution file");
    std::string case_pos;
    for (auto* sc : {opf, scopf, sweep, verify}) sc->add_option("case", case_pos, "case file (same as --case)");
    auto* o_dump = scopf->add_flag("--dump", dump, "also write the conic program as program.json");
    auto* o_smin = sweep->add_option("--min", sweep_min, "smallest gamma1");
    auto* o_smax = sweep->add_option("--max", sweep_max, "largest gamma1");
    auto* o_pts = sweep->add_option("--points", points, "grid points");
    auto* o_jobs = sweep->add_option("--jobs", jobs, "worker threads (0: one per core)");
    auto* o_sol = verify->add_option("--solution", solution, "solution file (default <out>/solution.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitBadInput;
    }

    RunConfig cfg;
    try {
        // defaults < config file < flags
        if (!config_path.empty()) cfg = load_config_file(cfg, config_path);
        for (auto* sc : {opf, scopf, sweep, verify})
            if (sc->parsed()) cfg.command = parse_command(sc->get_name());
        if (!case_pos.empty()) cfg.case_path = case_pos;
        if (o_case->count()) cfg.case_path = case_flag;
        if (o_gamma->count()) cfg.gamma = parse_gamma(gamma);
        if (o_mode->count()) {
            try {
                cfg.mode = parse_stability_mode(mode);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        if (o_tol->count()) cfg.solver.tol = tol;
        if (o_iter->count()) cfg.solver.max_iter = max_iter;
        if (o_eps->count()) cfg.eps = eps;
        if (o_out->count()) cfg.out_dir = out;
        if (o_format->count()) apply_config_json(cfg, {{"format", format}});
        if (o_verbose->count()) cfg.solver.verbose = verbose;
        if (o_quiet->count()) cfg.quiet = quiet;
        if (o_window->count() && window) cfg.window = ParkWindow{};
        if (o_dump->count()) cfg.dump_program = dump;
        if (o_smin->count()) cfg.sweep.min = sweep_min;
        if (o_smax->count()) cfg.sweep.max = sweep_max;
        if (o_pts->count()) cfg.sweep.points = points;
        if (o_jobs->count()) cfg.jobs = jobs;
        if (o_sol->count()) cfg.solution = solution;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return run_command(cfg, std::cout);
}
