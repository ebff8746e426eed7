#pragma once

#include <array>
#include <memory>
#include <optional>

#include "cscopf/stability.hpp"

namespace cscopf {

// the point the penalties pull towards: a rank-one recovery of the relaxed OPF and the
// machine equilibrium behind it
struct BaseSolution {
    Eigen::VectorXd V;    // 2 nb real embedding, slack Vy = 0
    Eigen::VectorXd Vdq;  // [Vd; Vq]
    Eigen::VectorXd u, v; // sin, cos of the rotor angles
    Eigen::VectorXd Ef;   // field voltages, held fixed in the stator coupling
    Eigen::VectorXd Pg, Qg;
    double cost = 0;
    double loss_mw = 0;
};

struct PenaltyTerms {
    std::array<LinExpr, 5> h;  // h1 .. h5
    VarBlock t_h1;             // epigraph variable of h1 (empty if no Lyapunov block)
};

PenaltyTerms build_penalties(ConicProgram& p, const BaseSolution* base, const OpfVars& opf,
                             const StatorVars& st, const ParkVars& park, const LyapunovVars* lyap,
                             const JacobianExpr* J);

struct CscopfOptions {
    std::array<double, 5> gamma{1, 1, 1, 1, 1};
    StabilityMode mode = StabilityMode::PenaltyOnly;
    double eps = 1e-6;
    std::optional<ParkWindow> window;
    RelaxOptions relax{};
};

// Owns the program and every named handle into it.
struct CscopfProgram {
    ConicProgram prog;
    OpfVars opf;
    StatorVars st;
    ParkVars park;
    std::unique_ptr<JacobianInProgram> jac;  // stable address, lyap points into it
    std::optional<LyapunovVars> lyap;
    std::optional<VarBlock> zeta;
    PenaltyTerms pen;
    CscopfOptions opt;
};

CscopfProgram assemble_cscopf(const CaseSystem& c, const NetworkMatrices& net, const JacobianAffine& ja,
                              const BaseSolution& base, const CscopfOptions& opt);

}  // namespace cscopf
