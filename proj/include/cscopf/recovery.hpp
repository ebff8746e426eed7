#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "cscopf/assemble.hpp"
#include "cscopf/solver.hpp"

namespace cscopf {

class RecoveryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RankOne {
    Eigen::VectorXd x;        // sqrt(lambda1) q1
    double lambda1 = 0, lambda2 = 0;
    double eps = 0;           // lambda2 / lambda1 (fraction, multiply by 100 for %)
    bool degenerate = false;  // leading eigenvalue not simple
};

// Phase fixed so that x(ref) >= 0 (ties broken by the largest-magnitude entry).
// Throws RecoveryError if lambda1 <= 0.
RankOne rank_one_decompose(const Eigen::MatrixXd& W, int ref = 0);

struct SolutionBundle {
    SolveStatus status = SolveStatus::NumericalError;
    std::string message;
    int iterations = 0;
    double objective = 0, cost = 0;
    double verified_residual = 0;

    Eigen::MatrixXd W;          // 2 nb, slack Vy row/column zero
    Eigen::VectorXd V, Pg, Qg;
    // present for C-SCOPF solutions only (size 0 otherwise)
    Eigen::MatrixXd Wdq, P, Z, M;
    Eigen::MatrixXd J;          // the program's Jacobian expression at x
    Eigen::VectorXd Vdq, u, v, Uu, Uv;
    std::array<double, 5> h{};
    std::optional<double> zeta;

    Eigen::VectorXd Vw, Vdqw;   // rank-one recoveries
    double eps_w = 0, eps_wdq = 0;

    bool has_machine_vars() const { return Vdq.size() > 0; }
    double loss_mw(const CaseSystem& c) const { return (Pg.sum() - c.total_load_p()) * c.base_mva; }
};

// pulls named variables out of x; the decomposition is done here as well
SolutionBundle extract_opf_solution(const ConicProgram& p, const OpfVars& opf, const RawSolution& r);
SolutionBundle extract_cscopf_solution(const CscopfProgram& cp, const RawSolution& r);

// equilibrium behind a relaxed-OPF solution, used as the penalty anchor
BaseSolution make_base_solution(const CaseSystem& c, const SolutionBundle& opf);

enum class Verdict { Stable, Marginal, Unstable };
const char* to_string(Verdict v);

// |sigma| <= tol counts as marginal, neither stable nor unstable
inline constexpr double kMarginalTol = 1e-9;
Verdict classify(double sigma_max, double tol = kMarginalTol);

struct StabilityVerdict {
    double sigma_max = 0, sigma0_max = 0, gap = 0;
    int n_rhp = 0, n_rhp0 = 0;
    // J evaluated directly at the program's (V, Vdq, u, v); diagnostic only
    std::optional<double> sigma_sdp;
    Verdict verdict() const { return classify(sigma_max); }
    bool stable() const { return verdict() == Verdict::Stable; }
};

// sigma_max: equilibrium re-initialised from the program voltages V with (Pg, Qg);
// sigma0_max: the same from the decomposed V^w. Angle rotation is deflated in both.
StabilityVerdict verify_stability(const CaseSystem& c, const NetworkMatrices& net, const JacobianAffine& ja,
                                  const SolutionBundle& s);

struct ErrorReport {
    double eps_w = 0, eps_wdq = 0;       // %
    double eps_vmag = 0, eps_vdqmag = 0; // MSE
    double eps_p = 0, eps_p_w = 0;       // Park residual MSE, vector / decomposed variables
    double eps_uv = 0;                   // trig identity MSE
    double cost = 0, delta_p = 0;        // $/h, % vs base
    double loss_mw = 0, delta_ploss = 0; // MW
    double sigma_max = 0, sigma0_max = 0, gap = 0;
    int n_rhp = 0, n_rhp0 = 0;
    std::optional<double> sigma_sdp;
};

ErrorReport compute_error_report(const SolutionBundle& sol, const SolutionBundle& base, const CaseSystem& c,
                                 const std::optional<StabilityVerdict>& v = std::nullopt);

// one report row: the metrics plus run metadata
struct ReportRow {
    std::string case_name, command, mode;
    std::array<double, 5> gamma{};
    std::string status;
    int iterations = 0;
    ErrorReport err;
    bool stable = false;
    double t_build = 0, t_solve = 0, t_recover = 0;
};

std::string report_csv_header();
std::string report_csv_line(const ReportRow& r);
nlohmann::json report_json(const ReportRow& r);
inline constexpr int kSolutionVersion = 1;

nlohmann::json solution_json(const SolutionBundle& s, const CaseSystem& c, const std::string& command = "");

// stale or foreign solution files
class SolutionFormatError : public RecoveryError {
public:
    using RecoveryError::RecoveryError;
};

// inverse of solution_json; checks format, version and the case dimensions
SolutionBundle solution_from_json(const nlohmann::json& j, const CaseSystem& c);

}  // namespace cscopf
