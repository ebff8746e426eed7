#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cscopf/dae.hpp"

namespace cscopf {

JacobianBlocks split_blocks(const Eigen::MatrixXd& J, std::size_t n)
{
    const auto N = J.rows();
    const auto nn = static_cast<Eigen::Index>(n);
    const auto m = N - nn;
    return {J.topLeftCorner(nn, nn), J.topRightCorner(nn, m), J.bottomLeftCorner(m, nn),
            J.bottomRightCorner(m, m)};
}

Eigen::MatrixXd reduced_jacobian(const Eigen::MatrixXd& J, std::size_t n, double rcond_min)
{
    if (J.rows() != J.cols() || static_cast<Eigen::Index>(n) > J.rows())
        throw std::invalid_argument("reduced_jacobian: bad dimensions");
    auto blk = split_blocks(J, n);
    if (blk.D.size() == 0) return blk.A;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(blk.D);
    const double rc = lu.rcond();
    if (!(rc >= rcond_min))
        throw SingularityError("algebraic block D is singular (rcond " + std::to_string(rc) + ")");
    return blk.A - blk.B * lu.solve(blk.C);
}

Eigen::MatrixXd angle_referenced(const Eigen::MatrixXd& Jr, std::size_t ng)
{
    // x = T x', with x'_0 the common angle and x'_i = delta_i - delta_0
    const auto n = Jr.rows();
    if (ng == 0 || n < 1) return Jr;
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i < ng; ++i) T(static_cast<Eigen::Index>(i), 0) = 1.0;
    // T^{-1} only differs from I in column 0 (entries -1 below the first row)
    Eigen::MatrixXd Tinv = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 1; i < ng; ++i) Tinv(static_cast<Eigen::Index>(i), 0) = -1.0;
    Eigen::MatrixXd Jp = Tinv * Jr * T;
    return Jp.bottomRightCorner(n - 1, n - 1);
}

Spectrum spectral_abscissa(const Eigen::MatrixXd& A, double rhp_tol)
{
    if (A.rows() != A.cols()) throw std::invalid_argument("spectral_abscissa: matrix not square");
    Spectrum s;
    if (A.rows() == 0) {
        s.sigma_max = -std::numeric_limits<double>::infinity();
        return s;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw EigenError("eigenvalue solver did not converge");
    const auto ev = es.eigenvalues();
    s.sigma_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        s.eigenvalues.push_back(ev(i));
        s.sigma_max = std::max(s.sigma_max, ev(i).real());
        if (ev(i).real() > rhp_tol) ++s.n_rhp;
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(),
              [](auto a, auto b) { return a.real() > b.real(); });
    return s;
}

}  // namespace cscopf
