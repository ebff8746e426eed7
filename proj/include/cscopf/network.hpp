#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cscopf/case.hpp"

namespace cscopf {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;

// pi-model admittances of one branch, bus positions (not ids)
struct BranchAdmittance {
    std::size_t f = 0, t = 0;
    cplx yff, yft, ytf, ytt;
};

// flow functional at one end of a branch: Tr{Ykl W} = P, Tr{Ykl_bar W} = Q
struct FlowMatrices {
    std::size_t branch = 0;
    bool from_side = true;
    SpMat Ykl, Ykl_bar;
    double S_max = 0;
};

// All real matrices act on the stacked vector X = [Vx; Vy] of length 2 nb.
struct NetworkMatrices {
    Eigen::MatrixXcd Y;
    std::vector<BranchAdmittance> branch_y;
    std::vector<SpMat> Yk, Yk_bar;   // per bus injections
    std::vector<FlowMatrices> flows; // two per branch (from end, to end)
    std::vector<SpMat> Mk;           // |V_k|^2 selectors

    std::size_t nb() const { return static_cast<std::size_t>(Y.rows()); }
};

std::vector<BranchAdmittance> branch_admittances(const CaseSystem& c);
Eigen::MatrixXcd build_ybus(const CaseSystem& c);
NetworkMatrices build_matrices(const CaseSystem& c);

// real embedding of the hermitian form V^H Phi V: returns (Re part, Im part) matrices
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed_hermitian_form(const Eigen::MatrixXcd& Phi);

Eigen::VectorXcd to_complex(const Eigen::VectorXd& X);
Eigen::VectorXd to_real(const Eigen::VectorXcd& V);

// X^T A X for a symmetric sparse A
double quad(const SpMat& A, const Eigen::VectorXd& X);

// direct complex evaluation, S_k = V_k conj((Y V)_k)
Eigen::VectorXcd bus_injections(const Eigen::MatrixXcd& Y, const Eigen::VectorXcd& V);
cplx branch_flow(const BranchAdmittance& b, bool from_side, const Eigen::VectorXcd& V);

}  // namespace cscopf
