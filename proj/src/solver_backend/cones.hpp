#pragma once

// Cone arithmetic for the interior point method. Vectors are laid out as in ConeDims:
// nonnegative orthant, then second-order cones, then PSD cones in scaled svec form.

#include <vector>

#include <Eigen/Dense>

#include "cscopf/program.hpp"

namespace cscopf::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Wbar u, or Wbar^{-1} u when inverse
VectorXd soc_wbar(const VectorXd& w, const Eigen::Ref<const VectorXd>& u, bool inverse);

struct SocScaling {
    double eta = 1;
    VectorXd wbar;  // J-normalised scaling point, wbar' J wbar = 1
};

struct PsdScaling {
    MatrixXd R, Rinv, Q;  // W(u) = R' U R, Q = R^{-T} R^{-1}
};

class Cones {
public:
    explicit Cones(const ConeDims& d);

    int rows() const { return m_; }
    int degree() const { return dims_.degree(); }
    const ConeDims& dims() const { return dims_; }

    VectorXd identity() const;
    // largest t with v - t e not in the interior, i.e. the smallest "eigenvalue" of v
    double min_eig(const VectorXd& v) const;

    // Nesterov-Todd scaling at strictly interior (s, z); returns false if not interior
    bool compute_scaling(const VectorXd& s, const VectorXd& z);
    const VectorXd& lambda() const { return lambda_; }

    VectorXd W(const VectorXd& u) const;
    VectorXd WT(const VectorXd& u) const;
    VectorXd Winv(const VectorXd& u) const;
    VectorXd WinvT(const VectorXd& u) const;
    VectorXd H(const VectorXd& u) const;       // (W'W)^{-1} u
    VectorXd WTW(const VectorXd& u) const;     // W'W u

    VectorXd jordan(const VectorXd& u, const VectorXd& v) const;
    VectorXd lambda_div(const VectorXd& v) const;  // lambda \ v
    VectorXd lambda_sq() const { return jordan(lambda_, lambda_); }

    // max alpha with lambda + alpha d in K (infinity when unbounded)
    double max_step_lambda(const VectorXd& d) const;
    // max alpha with v + alpha d in K for interior v
    double max_step(const VectorXd& v, const VectorXd& d) const;

    // offsets
    int soc_offset(std::size_t i) const { return soc_off_[i]; }
    int psd_offset(std::size_t i) const { return psd_off_[i]; }
    const std::vector<SocScaling>& soc_scaling() const { return soc_; }
    const std::vector<PsdScaling>& psd_scaling() const { return psd_; }
    const VectorXd& lp_scaling() const { return lp_w_; }

private:
    ConeDims dims_;
    int m_ = 0;
    std::vector<int> soc_off_, psd_off_;

    VectorXd lp_w_;  // W = diag(sqrt(s/z)) on the orthant
    std::vector<SocScaling> soc_;
    std::vector<PsdScaling> psd_;
    std::vector<VectorXd> psd_lambda_;  // eigen-like diagonal of each PSD block
    VectorXd lambda_;
};

}  // namespace cscopf::detail
