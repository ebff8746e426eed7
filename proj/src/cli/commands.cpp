#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "cscopf/cli.hpp"

namespace cscopf {

namespace fs = std::filesystem;

namespace {

bool usable(const SolutionBundle& s)
{
    return s.V.size() > 0 && (s.status == SolveStatus::Optimal || s.status == SolveStatus::NearOptimal);
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_file(p, j.dump(1) + "\n"); }

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ReportRow make_row(const RunConfig& cfg, const PreparedCase& pc, const char* command, const SolutionBundle& sol,
                   const ErrorReport& err, const std::optional<StabilityVerdict>& v, const StageTiming& t)
{
    ReportRow r;
    r.case_name = pc.c.name;
    r.command = command;
    r.mode = cfg.command == Command::Opf ? "none" : to_string(cfg.mode);
    r.gamma = cfg.command == Command::Opf ? std::array<double, 5>{} : cfg.gamma;
    r.status = std::string(to_string(sol.status));
    r.iterations = sol.iterations;
    r.err = err;
    r.stable = v && v->stable();
    r.t_build = t.build;
    r.t_solve = t.solve;
    r.t_recover = t.recover;
    return r;
}

void write_report(const RunConfig& cfg, const ReportRow& row)
{
    if (cfg.format == OutputFormat::Csv)
        write_file(cfg.out_dir / "report.csv", report_csv_header() + "\n" + report_csv_line(row) + "\n");
    else
        write_json(cfg.out_dir / "report.json", report_json(row));
}

void log_verdict(std::ostream& log, const std::optional<StabilityVerdict>& v, const std::string& err)
{
    if (!v) {
        log << "stability: not evaluated (" << err << ")\n";
        return;
    }
    log << "sigma_max " << fmt("%.6g", v->sigma_max) << " (" << v->n_rhp << " RHP), sigma0_max "
        << fmt("%.6g", v->sigma0_max) << " (" << v->n_rhp0 << " RHP), gap " << fmt("%.3g", v->gap);
    if (v->sigma_sdp) log << ", sigma_sdp " << fmt("%.6g", *v->sigma_sdp);
    log << "\nverdict: " << to_string(v->verdict()) << "\n";
}

void log_timing(std::ostream& log, const char* what, const StageTiming& t)
{
    log << what << " timing: build " << fmt("%.3f", t.build) << " s, solve " << fmt("%.3f", t.solve)
        << " s, recover " << fmt("%.3f", t.recover) << " s\n";
}

int solve_failure(std::ostream& log, const char* what, const SolutionBundle& s)
{
    log << "error: " << what << " ended with status " << to_string(s.status);
    if (!s.message.empty()) log << ": " << s.message;
    log << "\n";
    return kExitSolveFailed;
}

void prepare_out(const RunConfig& cfg)
{
    fs::create_directories(cfg.out_dir);
    write_json(cfg.out_dir / "config.json", config_to_json(cfg));
}

OpfRun solve_base(const RunConfig& cfg, const PreparedCase& pc, std::ostream& log)
{
    OpfRun base = run_relaxed_opf(pc, cfg.solver, cfg.cscopf_options().relax);
    if (!cfg.quiet)
        log << "relaxed OPF: " << to_string(base.sol.status) << ", cost " << fmt("%.4f", base.sol.cost) << " $/h, "
            << base.sol.iterations << " iterations\n";
    return base;
}

// P_g before and after, with inertia, the layout of the dispatch tables
void log_dispatch(std::ostream& log, const CaseSystem& c, const SolutionBundle& base, const SolutionBundle& sol)
{
    log << "  bus       H    Pg_opf  Pg_scopf     shift\n";
    for (std::size_t i = 0; i < c.ng(); ++i) {
        const auto& g = c.generators[i];
        char buf[128];
        std::snprintf(buf, sizeof buf, "%5d %7.2f %9.4f %9.4f %+9.4f\n", g.bus, g.dyn.H, base.Pg(i), sol.Pg(i),
                      sol.Pg(i) - base.Pg(i));
        log << buf;
    }
}

}  // namespace

int cmd_opf(const RunConfig& cfg, std::ostream& log)
{
    const PreparedCase pc = prepare_case(cfg.case_path);
    prepare_out(cfg);
    const OpfRun run = run_relaxed_opf(pc, cfg.solver, cfg.cscopf_options().relax);
    const ErrorReport err = compute_error_report(run.sol, run.sol, pc.c, run.verdict);
    write_report(cfg, make_row(cfg, pc, "opf", run.sol, err, run.verdict, run.t));
    if (!usable(run.sol)) return solve_failure(log, "relaxed OPF", run.sol);
    write_json(cfg.out_dir / "solution.json", solution_json(run.sol, pc.c, "opf"));

    log << "case " << pc.c.name << ": relaxed OPF " << to_string(run.sol.status) << " in " << run.sol.iterations
        << " iterations\n";
    if (run.sol.status == SolveStatus::NearOptimal) log << "warning: near-optimal only: " << run.sol.message << "\n";
    log << "cost " << fmt("%.4f", run.sol.cost) << " $/h, loss " << fmt("%.4f", err.loss_mw) << " MW, eps_w "
        << fmt("%.3e", err.eps_w) << " %, eps_|V| " << fmt("%.3e", err.eps_vmag) << "\n";
    log_verdict(log, run.verdict, run.verdict_error);
    log_timing(log, "opf", run.t);
    return kExitOk;
}

int cmd_scopf(const RunConfig& cfg, std::ostream& log)
{
    const PreparedCase pc = prepare_case(cfg.case_path);
    prepare_out(cfg);
    const OpfRun base = solve_base(cfg, pc, log);
    if (!usable(base.sol)) return solve_failure(log, "base relaxed OPF", base.sol);

    ScopfRun run = run_cscopf(pc, base, cfg.cscopf_options(), cfg.solver, cfg.dump_program);
    write_report(cfg, make_row(cfg, pc, "scopf", run.sol, run.err, run.verdict, run.t));
    write_file(cfg.out_dir / "jacobian_audit.csv", audit_table_csv(run.audit));
    if (run.dump) write_json(cfg.out_dir / "program.json", *run.dump);
    if (!usable(run.sol)) return solve_failure(log, "C-SCOPF", run.sol);
    write_json(cfg.out_dir / "solution.json", solution_json(run.sol, pc.c, "scopf"));

    log << "case " << pc.c.name << ": C-SCOPF (" << to_string(cfg.mode) << ") " << to_string(run.sol.status) << " in "
        << run.sol.iterations << " iterations\n";
    if (run.sol.status == SolveStatus::NearOptimal) log << "warning: near-optimal only: " << run.sol.message << "\n";
    log << "cost " << fmt("%.4f", run.err.cost) << " $/h, delta_p " << fmt("%.3f", run.err.delta_p) << " %, loss "
        << fmt("%.4f", run.err.loss_mw) << " MW, eps_w " << fmt("%.3e", run.err.eps_w) << " %, eps_wdq "
        << fmt("%.3e", run.err.eps_wdq) << " %, eps_p " << fmt("%.3e", run.err.eps_p) << "\n";
    log_dispatch(log, pc.c, base.sol, run.sol);
    log_verdict(log, run.verdict, run.verdict_error);
    log_timing(log, "base opf", base.t);
    log_timing(log, "scopf", run.t);
    return run.verdict && run.verdict->stable() ? kExitOk : kExitNotStable;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log)
{
    const PreparedCase pc = prepare_case(cfg.case_path);
    prepare_out(cfg);
    const OpfRun base = solve_base(cfg, pc, log);
    if (!usable(base.sol)) return solve_failure(log, "base relaxed OPF", base.sol);

    const std::vector<double> grid = cfg.sweep.values();
    struct Point {
        ReportRow row;
        std::string error;
    };
    std::vector<Point> points(grid.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;

    // base, pc and cfg are shared read-only; every point owns its program and solution
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
            RunConfig pcfg = cfg;
            pcfg.gamma[0] = grid[i];
            Point& pt = points[i];
            try {
                const ScopfRun run = run_cscopf(pc, base, pcfg.cscopf_options(), pcfg.solver);
                pt.row = make_row(pcfg, pc, "sweep", run.sol, run.err, run.verdict, run.t);
                if (!usable(run.sol))
                    pt.error = "solver status " + std::string(to_string(run.sol.status)) + ": " + run.sol.message;
                else if (!run.verdict)
                    pt.error = "stability not evaluated: " + run.verdict_error;
            } catch (const std::exception& e) {
                pt.row = make_row(pcfg, pc, "sweep", SolutionBundle{}, ErrorReport{}, std::nullopt, StageTiming{});
                pt.error = e.what();
            }
            if (!cfg.quiet) {
                std::lock_guard lk(log_mu);
                log << "gamma1 " << fmt("%-10.4g", grid[i]) << " " << pt.row.status << ", delta_p "
                    << fmt("%.3f", pt.row.err.delta_p) << " %, sigma_max " << fmt("%.5g", pt.row.err.sigma_max)
                    << (pt.row.stable ? " stable" : " not stable") << (pt.error.empty() ? "" : " [" + pt.error + "]")
                    << "\n";
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto nworkers = std::min<std::size_t>(cfg.jobs > 0 ? cfg.jobs : hw, grid.size());
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    pool.clear();  // joins

    std::string csv = report_csv_header() + ",error\n";
    nlohmann::json rows = nlohmann::json::array();
    int stable = 0;
    for (const auto& pt : points) {
        std::string e = pt.error;
        std::replace(e.begin(), e.end(), ',', ';');
        std::replace(e.begin(), e.end(), '\n', ' ');
        csv += report_csv_line(pt.row) + "," + e + "\n";
        auto j = report_json(pt.row);
        j["error"] = pt.error;
        rows.push_back(std::move(j));
        stable += pt.row.stable;
    }
    write_file(cfg.out_dir / "sweep.csv", csv);
    if (cfg.format == OutputFormat::Json) write_json(cfg.out_dir / "sweep.json", rows);
    log << "sweep: " << grid.size() << " points, " << stable << " stable, written to "
        << (cfg.out_dir / "sweep.csv").string() << "\n";
    log_timing(log, "base opf", base.t);
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log)
{
    const fs::path path = cfg.solution.empty() ? cfg.out_dir / "solution.json" : cfg.solution;
    nlohmann::json j;
    {
        std::ifstream in(path);
        if (!in) throw SolutionFormatError("cannot open solution file " + path.string());
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw SolutionFormatError("solution file " + path.string() + " is not JSON: " + e.what());
        }
    }
    const PreparedCase pc = prepare_case(cfg.case_path);
    const SolutionBundle sol = solution_from_json(j, pc.c);

    std::optional<StabilityVerdict> v;
    std::string why;
    try {
        v = verify_stability(pc.c, pc.net, pc.ja, sol);
    } catch (const std::exception& e) {
        why = e.what();
    }
    log << "verify " << path.string() << " (" << j.value("command", std::string("?")) << " solution of "
        << pc.c.name << ")\n";
    log_verdict(log, v, why);

    fs::create_directories(cfg.out_dir);
    nlohmann::json out{{"solution", path.string()}, {"case", pc.c.name}};
    if (v) {
        out["sigma_max"] = v->sigma_max;
        out["n_rhp"] = v->n_rhp;
        out["sigma0_max"] = v->sigma0_max;
        out["n_rhp0"] = v->n_rhp0;
        out["sigma_gap"] = v->gap;
        out["verdict"] = to_string(v->verdict());
    } else {
        out["verdict"] = "unevaluated";
        out["error"] = why;
    }
    write_json(cfg.out_dir / "verify.json", out);
    return v && v->stable() ? kExitOk : kExitNotStable;
}

int run_command(const RunConfig& cfg, std::ostream& log)
{
    try {
        validate_config(cfg);
        switch (cfg.command) {
        case Command::Opf: return cmd_opf(cfg, log);
        case Command::Scopf: return cmd_scopf(cfg, log);
        case Command::Sweep: return cmd_sweep(cfg, log);
        case Command::Verify: return cmd_verify(cfg, log);
        }
    } catch (const CaseError& e) {
        log << "error: malformed case " << cfg.case_path.string();
        if (!e.field().empty()) log << " [" << e.field() << "]";
        log << ": " << e.what() << "\n";
        return kExitBadInput;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const SolutionFormatError& e) {
        log << "error: " << e.what() << "\n";
        return kExitIncompatible;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitSolveFailed;
    }
    return kExitBadInput;
}

}  // namespace cscopf
