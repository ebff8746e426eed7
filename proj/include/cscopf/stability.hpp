#pragma once

#include <string>
#include <vector>

#include "cscopf/dae.hpp"
#include "cscopf/relaxation.hpp"

namespace cscopf {

enum class StabilityMode { PenaltyOnly, Constraint, Zeta };
const char* to_string(StabilityMode m);
StabilityMode parse_stability_mode(const std::string& s);  // throws std::invalid_argument

// dense N x N matrix of affine expressions, column-major
struct JacobianExpr {
    int n = 0, N = 0;  // dynamic states, total size
    std::vector<LinExpr> e;

    LinExpr& operator()(int i, int j) { return e[i + j * N]; }
    const LinExpr& operator()(int i, int j) const { return e[i + j * N]; }
    int m() const { return N - n; }
    bool is_constant() const;
    Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;
};

JacobianExpr constant_jacobian(const Eigen::MatrixXd& J, int n);

// one row per Jacobian parameter: what it becomes inside the program
struct JacobianAuditRow {
    std::string param;     // e.g. "Vd[1]"
    std::string maps_to;   // program expression
    std::string kind;      // "variable", "affine", "constant"
    bool exact = true;     // false if the mapping needed a linearization
    int entries = 0;       // Jacobian entries touched
    std::string note;
};

struct JacobianInProgram {
    JacobianExpr J;
    std::vector<JacobianAuditRow> audit;
};

// J(p) with every parameter replaced by program variables. Eq', Ed' are eliminated through
// their steady-state relations with the field voltages Ef held at the base values.
JacobianInProgram jacobian_in_program(const JacobianAffine& ja, const CaseSystem& c, const OpfVars& opf,
                                      const StatorVars& st, const ParkVars& park, const Eigen::VectorXd& Ef);

std::string audit_table_csv(const std::vector<JacobianAuditRow>& rows);

// Z = [[P, 0], [R, Q]]; the zero block is structural.
struct LyapunovVars {
    int n = 0, N = 0;
    VarBlock P, R, Q, M;
    bool has_M = false;
    // penalty-only: R and Q only enter h1, whose minimiser is R = -J21, Q = -J22; they are
    // then not program variables and Z(i, j) returns that expression
    bool implied_rq = false;
    const JacobianExpr* J = nullptr;

    LinExpr Z(int i, int j) const;
    Eigen::MatrixXd Z_eval(const Eigen::VectorXd& x) const;
};

struct BmiOptions {
    double eps = 1e-6;          // P >= eps I
    bool implied_rq = true;     // only honoured in penalty-only mode
};

// Constraint / Zeta mode: L1, L2 with M; if J has no variable entries the Lyapunov
// inequality J'Z + Z'J <= 0 is linear and is added as well.
LyapunovVars build_bmi_blocks(ConicProgram& p, const JacobianExpr& J, StabilityMode mode,
                              const BmiOptions& opt = {});

// zeta I - A >= 0 for a symmetric affine A, objective += weight * zeta
VarBlock add_max_eigen_epigraph(ConicProgram& p, int order, const std::function<LinExpr(int, int)>& entry,
                                double weight, const std::string& tag);

// zeta I - L2 >= 0, objective += weight * zeta
VarBlock build_zeta_variant(ConicProgram& p, const LyapunovVars& lv, const JacobianExpr& J, StabilityMode mode,
                            double weight);

// F = J'Z + Z'J at a program point
Eigen::MatrixXd lyapunov_form(const Eigen::MatrixXd& J, const Eigen::MatrixXd& Z);

}  // namespace cscopf
