#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cscopf/case.hpp"
#include "cscopf/network.hpp"
#include "cscopf/program.hpp"

namespace cscopf {

class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// W lives on the real embedding X = [Vx; Vy] with the slack bus' Vy removed: the angle
// reference is structural, so the PSD blocks keep a strictly feasible interior.
struct OpfVars {
    std::size_t nb = 0;
    std::size_t slack = 0;
    VarBlock W;        // symmetric, order 2 nb - 1
    VarBlock V;        // 2 nb, V(nb + slack) pinned to 0
    VarBlock Pg, Qg;   // per generator
    VarBlock t_cost;   // epigraph of Pg^2 per generator
    std::vector<int> widx;  // real-embedding index -> W index, -1 for the slack Vy
    LinExpr cost;      // sum c2 Pg^2 + c1 Pg + c0 (through t_cost)

    LinExpr w(int r, int c) const;                 // W entry over embedding indices, 0 if removed
    LinExpr trace(const SpMat& A) const;           // Tr{A W} for symmetric A
    LinExpr v(int r) const { return V(r); }
    int order() const { return static_cast<int>(W.rows); }
};

struct RelaxOptions {
    double anchor = 1.0;      // weight of -Vx_slack; ties V to the leading eigenvector of W
    bool flow_limits = true;
};

OpfVars build_relaxed_opf(ConicProgram& p, const CaseSystem& c, const NetworkMatrices& net,
                          const RelaxOptions& opt = {});

struct StatorVars {
    std::size_t ng = 0;
    VarBlock Wdq;  // symmetric 2 ng
    VarBlock Vdq;  // [Vd; Vq]
};

// linear stator relations per generator with fixed field voltages Ef, plus [[Wdq, Vdq],[Vdq', 1]] >= 0
StatorVars build_stator_coupling(ConicProgram& p, const CaseSystem& c, const OpfVars& opf,
                                 const Eigen::VectorXd& Ef);

// coefficients of the relaxed stator relations, exposed for tests
struct StatorCoefficients {
    double pg_vd, pg_wdm;            // Pg = pg_vd Vd + pg_wdm Wdq(i, m)
    double qg_vq, qg_wii, qg_wmm;    // Qg = qg_vq Vq + qg_wii Wdq(i,i) + qg_wmm Wdq(m,m)
};
StatorCoefficients stator_coefficients(const MachineParams& m, double Ef);

struct Interval {
    double lo = 0, hi = 0;
};

// the four McCormick rows for w ~ a b over a in A, b in B, each as an expression >= 0
std::array<LinExpr, 4> mccormick_envelope(const LinExpr& a, Interval A, const LinExpr& b, Interval B,
                                          const LinExpr& w);
void add_mccormick(ConicProgram& p, const LinExpr& a, Interval A, const LinExpr& b, Interval B,
                   const LinExpr& w, const std::string& tag);

struct ParkVars {
    VarBlock u, v, Uu, Uv;     // u ~ sin(delta), v ~ cos(delta), Uu ~ u^2, Uv ~ v^2
    VarBlock wxu, wyv, wxv, wyu;  // product proxies Vx u, Vy v, Vx v, Vy u
};

struct ParkWindow {
    double r_v = 0.3;   // half width around the base Vx, Vy
    double r_uv = 0.3;  // half width around the base u, v
};

struct ParkBounds {
    std::optional<ParkWindow> window;  // off: Vx, Vy in [-Vmax, Vmax], u, v in [-1, 1]
    // base point for the window (required when window is set)
    Eigen::VectorXd V0, u0, v0;
};

ParkVars build_park_mccormick(ConicProgram& p, const CaseSystem& c, const OpfVars& opf,
                              const StatorVars& st, const ParkBounds& b = {});

}  // namespace cscopf
