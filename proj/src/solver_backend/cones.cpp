#include "cones.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cscopf::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double jdot(const Eigen::Ref<const VectorXd>& a, const Eigen::Ref<const VectorXd>& b)
{
    return a(0) * b(0) - a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

// smallest positive alpha with f(alpha) = (l0 + a d0)^2 - ||l1 + a d1||^2 = 0
double soc_step(const Eigen::Ref<const VectorXd>& l, const Eigen::Ref<const VectorXd>& d)
{
    const double c = jdot(l, l);
    const double b = jdot(l, d);
    const double a = jdot(d, d);
    double best = kInf;
    if (d(0) < 0) best = -l(0) / d(0);
    if (c <= 0) return 0.0;
    const double disc = b * b - a * c;
    if (std::abs(a) < 1e-300 * std::max(1.0, c)) {
        if (b < 0) best = std::min(best, -c / (2 * b));
        return best;
    }
    if (disc < 0) return best;  // f keeps the sign of a > 0 along the line
    const double sq = std::sqrt(disc);
    const double q = -(b + (b >= 0 ? sq : -sq));
    for (double r : {q / a, q != 0 ? c / q : kInf})
        if (r > 0) best = std::min(best, r);
    return best;
}

double psd_min_eig(const MatrixXd& M)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

// wbar-matrix products: Wbar u and Wbar^{-1} u
VectorXd soc_wbar(const VectorXd& w, const Eigen::Ref<const VectorXd>& u, bool inverse)
{
    const int q = static_cast<int>(w.size());
    const double w0 = w(0);
    auto w1 = w.tail(q - 1);
    auto u1 = u.tail(q - 1);
    const double wu = w1.dot(u1);
    VectorXd r(q);
    if (!inverse) {
        r(0) = w0 * u(0) + wu;
        r.tail(q - 1) = u1 + (wu / (1 + w0) + u(0)) * w1;
    } else {
        r(0) = w0 * u(0) - wu;
        r.tail(q - 1) = u1 + (wu / (1 + w0) - u(0)) * w1;
    }
    return r;
}


Cones::Cones(const ConeDims& d) : dims_(d)
{
    int off = d.nonneg;
    for (int q : d.soc) {
        soc_off_.push_back(off);
        off += q;
    }
    for (int s : d.psd) {
        psd_off_.push_back(off);
        off += svec_size(s);
    }
    m_ = off;
    soc_.resize(d.soc.size());
    psd_.resize(d.psd.size());
    psd_lambda_.resize(d.psd.size());
}

VectorXd Cones::identity() const
{
    VectorXd e = VectorXd::Zero(m_);
    e.head(dims_.nonneg).setOnes();
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) e(soc_off_[i]) = 1.0;
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i];
        int k = psd_off_[i];
        for (int j = 0; j < n; ++j) {
            e(k) = 1.0;
            k += n - j;
        }
    }
    return e;
}

double Cones::min_eig(const VectorXd& v) const
{
    double m = kInf;
    if (dims_.nonneg > 0) m = v.head(dims_.nonneg).minCoeff();
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        m = std::min(m, v(o) - v.segment(o + 1, q - 1).norm());
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i)
        m = std::min(m, psd_min_eig(smat(v.segment(psd_off_[i], svec_size(dims_.psd[i])))));
    return m;
}

bool Cones::compute_scaling(const VectorXd& s, const VectorXd& z)
{
    lambda_.resize(m_);
    const int l = dims_.nonneg;
    if (l > 0) {
        auto sl = s.head(l).array();
        auto zl = z.head(l).array();
        if ((sl <= 0).any() || (zl <= 0).any()) return false;
        lp_w_ = (sl / zl).sqrt().matrix();
        lambda_.head(l) = (sl * zl).sqrt().matrix();
    }
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        auto si = s.segment(o, q);
        auto zi = z.segment(o, q);
        const double ss = jdot(si, si), zz = jdot(zi, zi);
        if (!(ss > 0 && zz > 0 && si(0) > 0 && zi(0) > 0)) return false;
        VectorXd sb = si / std::sqrt(ss), zb = zi / std::sqrt(zz);
        const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
        VectorXd w = sb;
        w(0) += zb(0);
        w.tail(q - 1) -= zb.tail(q - 1);
        w /= 2 * gamma;
        // renormalise against rounding
        const double wn = jdot(w, w);
        if (wn > 0) w /= std::sqrt(wn);
        soc_[i].wbar = w;
        soc_[i].eta = std::pow(ss / zz, 0.25);
        lambda_.segment(o, q) = soc_[i].eta * soc_wbar(w, zi, false);
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        MatrixXd S = smat(s.segment(o, svec_size(n)));
        MatrixXd Z = smat(z.segment(o, svec_size(n)));
        Eigen::LLT<MatrixXd> ls(S), lz(Z);
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        MatrixXd Ls = ls.matrixL(), Lz = lz.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        VectorXd lam = svd.singularValues();
        if (lam.minCoeff() <= 0) return false;
        VectorXd isq = lam.array().rsqrt();
        auto& ps = psd_[i];
        ps.R = Ls * svd.matrixV() * isq.asDiagonal();
        // R^{-1} = Lambda^{1/2} V' Ls^{-1}
        // V' Ls^{-1} = (Ls^{-T} V)'
        MatrixXd VtLinv = ls.matrixU().solve(svd.matrixV()).transpose();
        ps.Rinv = lam.array().sqrt().matrix().asDiagonal() * VtLinv;
        ps.Q = ps.Rinv.transpose() * ps.Rinv;
        psd_lambda_[i] = lam;
        MatrixXd L = lam.asDiagonal();
        lambda_.segment(o, svec_size(n)) = svec(L);
    }
    return true;
}


VectorXd Cones::W(const VectorXd& u) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = lp_w_.cwiseProduct(u.head(l));
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        r.segment(o, q) = soc_[i].eta * soc_wbar(soc_[i].wbar, u.segment(o, q), false);
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        const auto& R = psd_[i].R;
        r.segment(o, svec_size(n)) = svec(R.transpose() * smat(u.segment(o, svec_size(n))) * R);
    }
    return r;
}

VectorXd Cones::WT(const VectorXd& u) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = lp_w_.cwiseProduct(u.head(l));
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        r.segment(o, q) = soc_[i].eta * soc_wbar(soc_[i].wbar, u.segment(o, q), false);
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        const auto& R = psd_[i].R;
        r.segment(o, svec_size(n)) = svec(R * smat(u.segment(o, svec_size(n))) * R.transpose());
    }
    return r;
}

VectorXd Cones::WinvT(const VectorXd& u) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = u.head(l).cwiseQuotient(lp_w_);
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        r.segment(o, q) = soc_wbar(soc_[i].wbar, u.segment(o, q), true) / soc_[i].eta;
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        const auto& Ri = psd_[i].Rinv;
        r.segment(o, svec_size(n)) = svec(Ri * smat(u.segment(o, svec_size(n))) * Ri.transpose());
    }
    return r;
}

VectorXd Cones::Winv(const VectorXd& u) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = u.head(l).cwiseQuotient(lp_w_);
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        r.segment(o, q) = soc_wbar(soc_[i].wbar, u.segment(o, q), true) / soc_[i].eta;
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        const auto& Ri = psd_[i].Rinv;
        r.segment(o, svec_size(n)) = svec(Ri.transpose() * smat(u.segment(o, svec_size(n))) * Ri);
    }
    return r;
}

VectorXd Cones::H(const VectorXd& u) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = u.head(l).cwiseQuotient(lp_w_.cwiseAbs2());
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        const VectorXd t = soc_wbar(soc_[i].wbar, u.segment(o, q), true);
        r.segment(o, q) = soc_wbar(soc_[i].wbar, t, true) / (soc_[i].eta * soc_[i].eta);
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        const auto& Q = psd_[i].Q;
        r.segment(o, svec_size(n)) = svec(Q * smat(u.segment(o, svec_size(n))) * Q);
    }
    return r;
}

VectorXd Cones::WTW(const VectorXd& u) const
{
    return WT(W(u));
}

VectorXd Cones::jordan(const VectorXd& u, const VectorXd& v) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = u.head(l).cwiseProduct(v.head(l));
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        auto ui = u.segment(o, q);
        auto vi = v.segment(o, q);
        r(o) = ui.dot(vi);
        r.segment(o + 1, q - 1) = ui(0) * vi.tail(q - 1) + vi(0) * ui.tail(q - 1);
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        MatrixXd U = smat(u.segment(o, svec_size(n)));
        MatrixXd V = smat(v.segment(o, svec_size(n)));
        MatrixXd P = U * V;
        r.segment(o, svec_size(n)) = svec(0.5 * (P + P.transpose()));
    }
    return r;
}

VectorXd Cones::lambda_div(const VectorXd& v) const
{
    VectorXd r(m_);
    const int l = dims_.nonneg;
    if (l > 0) r.head(l) = v.head(l).cwiseQuotient(lambda_.head(l));
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        auto lam = lambda_.segment(o, q);
        auto vi = v.segment(o, q);
        const double det = jdot(lam, lam);
        const double x0 = (lam(0) * vi(0) - lam.tail(q - 1).dot(vi.tail(q - 1))) / det;
        r(o) = x0;
        r.segment(o + 1, q - 1) = (vi.tail(q - 1) - x0 * lam.tail(q - 1)) / lam(0);
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        const auto& lam = psd_lambda_[i];
        int k = o;
        for (int j = 0; j < n; ++j)
            for (int ii = j; ii < n; ++ii, ++k) r(k) = v(k) * 2.0 / (lam(ii) + lam(j));
    }
    return r;
}

double Cones::max_step_lambda(const VectorXd& d) const
{
    double a = kInf;
    const int l = dims_.nonneg;
    for (int i = 0; i < l; ++i)
        if (d(i) < 0) a = std::min(a, -lambda_(i) / d(i));
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        a = std::min(a, soc_step(lambda_.segment(o, q), d.segment(o, q)));
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        VectorXd isq = psd_lambda_[i].array().rsqrt();
        MatrixXd M = isq.asDiagonal() * smat(d.segment(o, svec_size(n))) * isq.asDiagonal();
        const double mn = psd_min_eig(M);
        if (mn < 0) a = std::min(a, -1.0 / mn);
    }
    return a;
}

double Cones::max_step(const VectorXd& v, const VectorXd& d) const
{
    double a = kInf;
    const int l = dims_.nonneg;
    for (int i = 0; i < l; ++i)
        if (d(i) < 0) a = std::min(a, -v(i) / d(i));
    for (std::size_t i = 0; i < dims_.soc.size(); ++i) {
        const int q = dims_.soc[i], o = soc_off_[i];
        a = std::min(a, soc_step(v.segment(o, q), d.segment(o, q)));
    }
    for (std::size_t i = 0; i < dims_.psd.size(); ++i) {
        const int n = dims_.psd[i], o = psd_off_[i];
        Eigen::LLT<MatrixXd> llt(smat(v.segment(o, svec_size(n))));
        if (llt.info() != Eigen::Success) return 0.0;
        MatrixXd D = smat(d.segment(o, svec_size(n)));
        MatrixXd X = llt.matrixL().solve(D);
        MatrixXd M = llt.matrixL().solve(X.transpose());
        const double mn = psd_min_eig(0.5 * (M + M.transpose()));
        if (mn < 0) a = std::min(a, -1.0 / mn);
    }
    return a;
}

}  // namespace cscopf::detail
