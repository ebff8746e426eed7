#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cscopf/cli.hpp"

namespace py = pybind11;
using namespace cscopf;

namespace {

py::dict verdict_dict(const std::optional<StabilityVerdict>& v, const std::string& why)
{
    py::dict d;
    if (!v) {
        d["error"] = why;
        return d;
    }
    d["sigma_max"] = v->sigma_max;
    d["n_rhp"] = v->n_rhp;
    d["sigma0_max"] = v->sigma0_max;
    d["n_rhp0"] = v->n_rhp0;
    d["gap"] = v->gap;
    d["verdict"] = to_string(v->verdict());
    return d;
}

py::dict solution_dict(const SolutionBundle& s, const CaseSystem& c)
{
    py::dict d;
    d["status"] = std::string(to_string(s.status));
    d["iterations"] = s.iterations;
    d["cost"] = s.cost;
    d["loss_mw"] = s.loss_mw(c);
    d["eps_w"] = s.eps_w;
    d["V"] = s.V;
    d["Pg"] = s.Pg;
    d["Qg"] = s.Qg;
    return d;
}

SolveSettings settings(double tol, int max_iter)
{
    SolveSettings s;
    s.tol = tol;
    s.max_iter = max_iter;
    return s;
}

}  // namespace

PYBIND11_MODULE(_cscopf, m)
{
    m.doc() = "Convexified small-signal-stability-constrained OPF";

    py::register_exception<CaseError>(m, "CaseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def(
        "load_case",
        [](const std::string& path) { return case_to_json(load_case(path)).dump(); },
        py::arg("path"), "Validate a case file and return it re-serialised as JSON text.");

    m.def(
        "relaxed_opf",
        [](const std::string& path, double tol, int max_iter) {
            const PreparedCase pc = prepare_case(std::filesystem::path(path));
            OpfRun r;
            {
                py::gil_scoped_release nogil;
                r = run_relaxed_opf(pc, settings(tol, max_iter));
            }
            py::dict d = solution_dict(r.sol, pc.c);
            d["stability"] = verdict_dict(r.verdict, r.verdict_error);
            return d;
        },
        py::arg("case"), py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

    m.def(
        "cscopf",
        [](const std::string& path, std::array<double, 5> gamma, const std::string& mode, double tol, int max_iter) {
            const PreparedCase pc = prepare_case(std::filesystem::path(path));
            CscopfOptions o;
            o.gamma = gamma;
            o.mode = parse_stability_mode(mode);
            OpfRun base;
            ScopfRun r;
            {
                py::gil_scoped_release nogil;
                base = run_relaxed_opf(pc, settings(tol, max_iter));
                r = run_cscopf(pc, base, o, settings(tol, max_iter));
            }
            py::dict d = solution_dict(r.sol, pc.c);
            d["delta_p"] = r.err.delta_p;
            d["eps_wdq"] = r.sol.eps_wdq;
            d["h"] = r.sol.h;
            d["stability"] = verdict_dict(r.verdict, r.verdict_error);
            d["base"] = solution_dict(base.sol, pc.c);
            return d;
        },
        py::arg("case"), py::arg("gamma") = std::array<double, 5>{1, 1, 1, 1, 1}, py::arg("mode") = "penalty-only",
        py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

    m.def(
        "spectral_abscissa",
        [](const Eigen::MatrixXd& A) {
            auto s = spectral_abscissa(A);
            return py::make_tuple(s.sigma_max, s.n_rhp);
        },
        py::arg("A"), "(sigma_max, number of eigenvalues with positive real part)");

    m.def(
        "rank_one_decompose",
        [](const Eigen::MatrixXd& W, int ref) {
            auto r = rank_one_decompose(W, ref);
            return py::make_tuple(r.x, r.eps);
        },
        py::arg("W"), py::arg("ref") = 0, "(x, lambda2 / lambda1) with x x' the best rank-one fit of W");

    m.def(
        "run",
        [](const std::string& config_json) {
            RunConfig cfg;
            apply_config_json(cfg, nlohmann::json::parse(config_json));
            std::ostringstream log;
            int rc;
            {
                py::gil_scoped_release nogil;
                rc = run_command(cfg, log);
            }
            return py::make_tuple(rc, log.str());
        },
        py::arg("config"), "Run one command from a JSON config (same keys as --config); returns (exit code, log).");
}
