#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <Eigen/Cholesky>

#include "cones.hpp"
#include "cscopf/solver.hpp"

namespace cscopf {

namespace {

using detail::Cones;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowSp = Eigen::SparseMatrix<double, Eigen::RowMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kDenseBudgetBytes = 2.5e9;

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Ruiz equilibration: A_s = E1 A D, G_s = E2 G D, c_s = sc D c, b_s = sb E1 b, h_s = sb E2 h.
// E2 is constant over each SOC / PSD block so the cone is preserved.
struct Scaled {
    SpMat A, G;
    VectorXd c, b, h;
    VectorXd D, E1, E2;
    double sc = 1, sb = 1;
};

Scaled equilibrate(const ConicForm& f, const Cones& K, bool on)
{
    Scaled S{f.A, f.G, f.c, f.b, f.h, VectorXd::Ones(f.c.size()), VectorXd::Ones(f.b.size()),
             VectorXd::Ones(f.h.size()), 1.0, 1.0};
    if (!on) return S;
    const auto n = f.c.size();
    const auto& dims = K.dims();
    for (int it = 0; it < 25; ++it) {
        VectorXd cn = VectorXd::Zero(n), ra = VectorXd::Zero(S.A.rows()), rg = VectorXd::Zero(S.G.rows());
        for (int j = 0; j < S.A.outerSize(); ++j)
            for (SpMat::InnerIterator e(S.A, j); e; ++e) {
                const double a = std::abs(e.value());
                cn(j) = std::max(cn(j), a);
                ra(e.row()) = std::max(ra(e.row()), a);
            }
        for (int j = 0; j < S.G.outerSize(); ++j)
            for (SpMat::InnerIterator e(S.G, j); e; ++e) {
                const double a = std::abs(e.value());
                cn(j) = std::max(cn(j), a);
                rg(e.row()) = std::max(rg(e.row()), a);
            }
        for (std::size_t i = 0; i < dims.soc.size(); ++i) {
            auto seg = rg.segment(K.soc_offset(i), dims.soc[i]);
            seg.setConstant(seg.maxCoeff());
        }
        for (std::size_t i = 0; i < dims.psd.size(); ++i) {
            auto seg = rg.segment(K.psd_offset(i), svec_size(dims.psd[i]));
            seg.setConstant(seg.maxCoeff());
        }
        auto fac = [](const VectorXd& v, const VectorXd& acc) {
            VectorXd r(v.size());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                double s = v(i) > 0 ? 1.0 / std::sqrt(v(i)) : 1.0;
                // keep cumulative factors within [1e-4, 1e4]
                s = std::clamp(s * acc(i), 1e-4, 1e4) / acc(i);
                r(i) = s;
            }
            return r;
        };
        VectorXd dc = fac(cn, S.D), da = fac(ra, S.E1), dg = fac(rg, S.E2);
        if ((dc.array() - 1).abs().maxCoeff() < 1e-3 && (da.size() == 0 || (da.array() - 1).abs().maxCoeff() < 1e-3) &&
            (dg.size() == 0 || (dg.array() - 1).abs().maxCoeff() < 1e-3))
            break;
        S.A = da.asDiagonal() * S.A * dc.asDiagonal();
        S.G = dg.asDiagonal() * S.G * dc.asDiagonal();
        S.D.array() *= dc.array();
        S.E1.array() *= da.array();
        S.E2.array() *= dg.array();
    }
    S.c = S.D.cwiseProduct(f.c);
    S.b = S.E1.cwiseProduct(f.b);
    S.h = S.E2.cwiseProduct(f.h);
    S.sc = 1.0 / std::max(1.0, inf_norm(S.c));
    S.sb = 1.0 / std::max({1.0, inf_norm(S.b), inf_norm(S.h)});
    S.c *= S.sc;
    S.b *= S.sb;
    S.h *= S.sb;
    S.A.makeCompressed();
    S.G.makeCompressed();
    return S;
}

// entries of one G column inside one PSD block, as symmetric matrix entries
struct PsdEntry {
    int r, c;
    double v;  // U(r,c) = U(c,r) = v
};
struct PsdColumn {
    int col;
    std::vector<PsdEntry> e;
};

class KktSolver {
public:
    KktSolver(const SpMat& A, const SpMat& G, const Cones& K)
        : A_(A), G_(G), K_(K), Gr_(G), debug_(std::getenv("CSCOPF_KKT_DEBUG") != nullptr)
    {
        const auto& dims = K.dims();
        n_ = static_cast<int>(G.cols());
        // svec index -> (r, c) for each PSD block
        psd_cols_.resize(dims.psd.size());
        std::vector<int> blk_of(G.rows(), -1);
        std::vector<std::pair<int, int>> rc(G.rows());
        for (std::size_t b = 0; b < dims.psd.size(); ++b) {
            const int d = dims.psd[b];
            int k = K.psd_offset(b);
            for (int j = 0; j < d; ++j)
                for (int i = j; i < d; ++i, ++k) {
                    blk_of[k] = static_cast<int>(b);
                    rc[k] = {i, j};
                }
        }
        for (int j = 0; j < G.outerSize(); ++j) {
            std::vector<int> last(dims.psd.size(), -1);
            for (SpMat::InnerIterator e(G, j); e; ++e) {
                const int b = blk_of[e.row()];
                if (b < 0) continue;
                auto& cols = psd_cols_[b];
                if (last[b] < 0) {
                    last[b] = static_cast<int>(cols.size());
                    cols.push_back({j, {}});
                }
                auto [r, c] = rc[e.row()];
                cols[last[b]].e.push_back({r, c, r == c ? e.value() : e.value() / kSqrt2});
            }
        }
        // columns touched by each SOC block
        soc_cols_.resize(dims.soc.size());
        for (std::size_t b = 0; b < dims.soc.size(); ++b) {
            std::vector<char> seen(n_, 0);
            const int o = K.soc_offset(b);
            for (int r = o; r < o + dims.soc[b]; ++r)
                for (RowSp::InnerIterator e(Gr_, r); e; ++e)
                    if (!seen[e.col()]) {
                        seen[e.col()] = 1;
                        soc_cols_[b].push_back(static_cast<int>(e.col()));
                    }
        }
        AtA_ = MatrixXd(SpMat(A.transpose() * A));
        ata_diag_ = AtA_.diagonal().maxCoeff();
        if (A.rows() == 0) ata_diag_ = 0;
    }

    bool factor()
    {
        MatrixXd N = MatrixXd::Zero(n_, n_);
        assemble(N);
        const double nd = std::max(1.0, N.diagonal().cwiseAbs().maxCoeff());
        rho_ = ata_diag_ > 0 ? nd / ata_diag_ : 0.0;
        N.triangularView<Eigen::Lower>() += rho_ * AtA_;
        double reg = 1e-15 * nd;
        for (int attempt = 0; attempt < 7; ++attempt) {
            MatrixXd Kr = N;
            if (attempt > 0) Kr.diagonal().array() += reg;
            llt_.compute(Kr);
            if (llt_.info() == Eigen::Success) break;
            if (debug_) std::fprintf(stderr, "   N factor failed with reg %.1e\n", reg);
            reg *= 100;
            if (attempt == 6) return false;
        }
        if (A_.rows() > 0) {
            MatrixXd At = MatrixXd(A_.transpose());
            KinvAt_ = llt_.solve(At);
            MatrixXd S = A_ * KinvAt_;
            const double sd = std::max(1e-300, S.diagonal().cwiseAbs().maxCoeff());
            double sreg = 1e-14 * sd;
            for (int attempt = 0; attempt < 6; ++attempt) {
                MatrixXd Sr = S;
                Sr.diagonal().array() += sreg;
                sllt_.compute(Sr);
                if (sllt_.info() == Eigen::Success) break;
                if (debug_) std::fprintf(stderr, "   S factor failed with reg %.1e\n", sreg);
                sreg *= 100;
                if (attempt == 5) return false;
            }
        }
        return true;
    }

    // Scaled system with Gt = W^{-T} G and dzt = W dz:
    //   [0 A' Gt'; A 0 0; Gt 0 -I] [dx; dy; dzt] = [r1; r2; r3t]
    // Flexible GMRES on it, preconditioned by the normal-equation solve. Forming W'W instead
    // squares its condition number, which is ~1/mu^2 near the optimum.
    void solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3t, VectorXd& dx,
               VectorXd& dy, VectorXd& dzt) const
    {
        const Eigen::Index n = r1.size(), p = r2.size(), m = r3t.size(), N = n + p + m;
        VectorXd rhs(N);
        rhs << r1, r2, r3t;
        auto apply = [&](const VectorXd& u) {
            VectorXd out(N);
            const auto ux = u.head(n), uy = u.segment(n, p), uz = u.tail(m);
            out.head(n) = A_.transpose() * uy + G_.transpose() * K_.Winv(uz);
            out.segment(n, p) = A_ * ux;
            out.tail(m) = K_.WinvT(G_ * ux) - uz;
            return out;
        };
        auto precond = [&](const VectorXd& w) {
            VectorXd a, b, c, out(N);
            raw_solve(w.head(n), w.segment(n, p), w.tail(m), a, b, c);
            out << a, b, c;
            return out;
        };

        VectorXd u = precond(rhs);
        const double target = 1e-14 * (1.0 + rhs.norm());
        constexpr int kRestart = 60;
        for (int cycle = 0; cycle < 4; ++cycle) {
            VectorXd r = rhs - apply(u);
            const double beta = r.norm();
            if (debug_) std::fprintf(stderr, "   kkt cycle %d residual %.2e (target %.2e)\n", cycle, beta, target);
            if (!(beta > target)) break;
            std::vector<VectorXd> V{r / beta}, Z;
            MatrixXd H = MatrixXd::Zero(kRestart + 1, kRestart);
            VectorXd g = VectorXd::Zero(kRestart + 1), cs(kRestart), sn(kRestart);
            g(0) = beta;
            int k = 0;
            for (; k < kRestart; ++k) {
                Z.push_back(precond(V[k]));
                VectorXd w = apply(Z[k]);
                for (int i = 0; i <= k; ++i) {
                    H(i, k) = w.dot(V[i]);
                    w -= H(i, k) * V[i];
                }
                H(k + 1, k) = w.norm();
                for (int i = 0; i < k; ++i) {
                    const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
                    H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
                    H(i, k) = t;
                }
                const double rr = std::hypot(H(k, k), H(k + 1, k));
                if (rr == 0.0) break;
                cs(k) = H(k, k) / rr;
                sn(k) = H(k + 1, k) / rr;
                H(k, k) = rr;
                H(k + 1, k) = 0;
                g(k + 1) = -sn(k) * g(k);
                g(k) *= cs(k);
                const bool done = std::abs(g(k + 1)) <= target || H(k + 1, k) == 0.0;
                if (w.norm() > 0) V.push_back(w / w.norm());
                if (done || static_cast<int>(V.size()) <= k + 1) {
                    ++k;
                    break;
                }
            }
            if (k == 0) break;
            const VectorXd yk =
                H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
            for (int i = 0; i < k; ++i) u += yk(i) * Z[i];
        }
        dx = u.head(n);
        dy = u.segment(n, p);
        dzt = u.tail(m);
    }

private:
    void raw_solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3t, VectorXd& dx,
                   VectorXd& dy, VectorXd& dzt) const
    {
        VectorXd f = r1 + G_.transpose() * K_.Winv(r3t);
        if (A_.rows() > 0) {
            f += rho_ * (A_.transpose() * r2);
            VectorXd kf = llt_.solve(f);
            dy = sllt_.solve(A_ * kf - r2);
            dx = kf - KinvAt_ * dy;
        } else {
            dy.resize(0);
            dx = llt_.solve(f);
        }
        dzt = K_.WinvT(G_ * dx) - r3t;
    }

    void assemble(MatrixXd& N) const
    {
        const auto& dims = K_.dims();
        // diagonal part of nonneg and SOC rows
        const auto& lw = K_.lp_scaling();
        auto row_pairs = [&](int r, double w) {
            for (RowSp::InnerIterator a(Gr_, r); a; ++a)
                for (RowSp::InnerIterator b(Gr_, r); b; ++b)
                    if (b.col() <= a.col()) N(a.col(), b.col()) += w * a.value() * b.value();
        };
        for (int r = 0; r < dims.nonneg; ++r) row_pairs(r, 1.0 / (lw(r) * lw(r)));
        const auto& soc = K_.soc_scaling();
        // SOC: Gram of Wbar^{-1} G / eta, avoids the cancellation in -J + 2 v v'
        for (std::size_t b = 0; b < dims.soc.size(); ++b) {
            const int o = K_.soc_offset(b), q = dims.soc[b];
            const auto& cols = soc_cols_[b];
            MatrixXd Gb = MatrixXd::Zero(q, static_cast<Eigen::Index>(cols.size()));
            std::vector<int> pos(n_, -1);
            for (std::size_t i = 0; i < cols.size(); ++i) pos[cols[i]] = static_cast<int>(i);
            for (int r = o; r < o + q; ++r)
                for (RowSp::InnerIterator a(Gr_, r); a; ++a) Gb(r - o, pos[a.col()]) = a.value();
            for (Eigen::Index j = 0; j < Gb.cols(); ++j)
                Gb.col(j) = detail::soc_wbar(soc[b].wbar, Gb.col(j), true) / soc[b].eta;
            const MatrixXd M = Gb.transpose() * Gb;
            for (std::size_t i = 0; i < cols.size(); ++i)
                for (std::size_t k = 0; k < cols.size(); ++k)
                    if (cols[k] <= cols[i]) N(cols[i], cols[k]) += M(i, k);
        }
        // PSD blocks: N_ab = <U_a, Q U_b Q>
        const auto& psd = K_.psd_scaling();
        for (std::size_t b = 0; b < dims.psd.size(); ++b) {
            const int d = dims.psd[b];
            const MatrixXd& Q = psd[b].Q;
            const auto& cols = psd_cols_[b];
            MatrixXd T(d, d), QU(d, d);
            for (std::size_t a = 0; a < cols.size(); ++a) {
                // T = Q U_a Q, built from rank-one pieces
                T.setZero();
                for (const auto& e : cols[a].e) {
                    if (e.r == e.c)
                        T.noalias() += e.v * Q.col(e.r) * Q.col(e.r).transpose();
                    else {
                        T.noalias() += e.v * Q.col(e.r) * Q.col(e.c).transpose();
                        T.noalias() += e.v * Q.col(e.c) * Q.col(e.r).transpose();
                    }
                }
                const int ca = cols[a].col;
                for (std::size_t bb = 0; bb <= a; ++bb) {
                    double s = 0;
                    for (const auto& e : cols[bb].e) s += (e.r == e.c ? 1.0 : 2.0) * e.v * T(e.r, e.c);
                    const int cb = cols[bb].col;
                    if (cb <= ca)
                        N(ca, cb) += s;
                    else
                        N(cb, ca) += s;
                }
            }
        }
    }

    const SpMat& A_;
    const SpMat& G_;
    const Cones& K_;
    RowSp Gr_;
    int n_ = 0;
    std::vector<std::vector<PsdColumn>> psd_cols_;
    std::vector<std::vector<int>> soc_cols_;
    MatrixXd AtA_;
    double ata_diag_ = 0, rho_ = 0;
    Eigen::LLT<MatrixXd> llt_, sllt_;
    MatrixXd KinvAt_;
    bool debug_ = false;
};

}  // namespace

RawSolution InteriorPointSolver::solve(const ConicForm& f, const SolveSettings& set) const
{
    const auto t0 = std::chrono::steady_clock::now();
    RawSolution out;
    auto finish = [&](RawSolution& r) -> RawSolution {
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };

    const auto n = f.c.size();
    const Cones K(f.dims);
    if (K.rows() != f.G.rows() || f.A.rows() != f.b.size() || f.G.cols() != n || f.A.cols() != n) {
        out.status = SolveStatus::NumericalError;
        out.message = "inconsistent conic form dimensions";
        return finish(out);
    }
    // the normal matrix and its factor are dense n x n; refuse rather than get OOM-killed
    if (const double bytes = 3.0 * 8.0 * double(n) * double(n); bytes > kDenseBudgetBytes) {
        out.status = SolveStatus::NumericalError;
        out.message = "program too large for the dense KKT solver (" + std::to_string(n) + " variables, ~" +
                      std::to_string(int(bytes / 1e9)) + " GB)";
        return finish(out);
    }
    const Scaled P = equilibrate(f, K, set.equilibrate);
    Cones C(f.dims);
    KktSolver kkt(P.A, P.G, C);

    // unscaled views of an iterate
    auto unscale = [&](const VectorXd& x, const VectorXd& y, const VectorXd& z, const VectorXd& s,
                       double tau, RawSolution& r) {
        r.x = P.D.cwiseProduct(x) / (P.sb * tau);
        r.y = P.E1.cwiseProduct(y) / (P.sc * tau);
        r.z = P.E2.cwiseProduct(z) / (P.sc * tau);
        r.s = s.cwiseQuotient(P.E2) / (P.sb * tau);
    };
    const double bn = inf_norm(f.b), hn = inf_norm(f.h), cn = inf_norm(f.c);
    auto measure = [&](RawSolution& r) {
        const double pa = f.A.rows() ? inf_norm(f.A * r.x - f.b) / (1 + bn) : 0.0;
        const double pg = inf_norm(f.G * r.x + r.s - f.h) / (1 + hn);
        r.res.primal = std::max(pa, pg);
        r.res.dual = inf_norm(f.A.transpose() * r.y + f.G.transpose() * r.z + f.c) / (1 + cn);
        r.primal_objective = f.c.dot(r.x) + f.c0;
        r.dual_objective = -f.b.dot(r.y) - f.h.dot(r.z) + f.c0;
        const double gap = std::abs(r.primal_objective - r.dual_objective);
        r.res.gap = gap / std::max(1.0, std::min(std::abs(r.primal_objective), std::abs(r.dual_objective)));
    };

    const VectorXd e = C.identity();
    VectorXd x, y, z, s;
    // initial point: W = I solves
    {
        if (!C.compute_scaling(e, e) || !kkt.factor()) {
            out.status = SolveStatus::NumericalError;
            out.message = "could not factor the initial KKT system";
            return finish(out);
        }
        VectorXd dx, dy, dz;
        kkt.solve(VectorXd::Zero(n), P.b, P.h, dx, dy, dz);  // W = I here
        x = dx;
        s = -dz;
        kkt.solve(-P.c, VectorXd::Zero(P.b.size()), VectorXd::Zero(P.h.size()), dx, dy, dz);
        y = dy;
        z = dz;
        auto shift = [&](VectorXd& v) {
            const double a = -C.min_eig(v);
            if (v.size() == 0) return;
            if (a >= -1e-8 * std::max(1.0, v.norm())) v += (1 + a) * e;
        };
        shift(s);
        shift(z);
    }
    double tau = 1, kappa = 1;
    const double nu = C.degree();
    const double tol = set.tol;
    int stall = 0;
    double best_score = kInf;
    RawSolution best;

    for (int it = 0;; ++it) {
        out.iterations = it;
        VectorXd rx = P.A.transpose() * y + P.G.transpose() * z + P.c * tau;
        VectorXd ry = P.A * x - P.b * tau;
        VectorXd rz = s + P.G * x - P.h * tau;
        const double rt = kappa + P.c.dot(x) + P.b.dot(y) + P.h.dot(z);
        const double mu = (s.dot(z) + tau * kappa) / (nu + 1);

        unscale(x, y, z, s, tau, out);
        measure(out);
        if (set.verbose)
            std::fprintf(stderr, "%3d pobj % .8e dobj % .8e pres %.1e dres %.1e gap %.1e tau %.1e kap %.1e\n",
                         it, out.primal_objective, out.dual_objective, out.res.primal, out.res.dual,
                         out.res.gap, tau, kappa);
        if (out.res.primal <= tol && out.res.dual <= tol && out.res.gap <= tol) {
            out.status = SolveStatus::Optimal;
            return finish(out);
        }
        // the last iterate is not always the best one once the linear algebra degrades
        if (const double sc = std::max({out.res.primal, out.res.dual, out.res.gap}); sc < best_score) {
            best_score = sc;
            best = out;
        }
        // infeasibility certificates on the unnormalised rays
        {
            const double py = -(P.b.dot(y) + P.h.dot(z));
            if (py > 0 && tau < kappa) {
                VectorXd yy = P.E1.cwiseProduct(y), zz = P.E2.cwiseProduct(z);
                const double t = -(f.b.dot(yy) + f.h.dot(zz));
                if (t > 0 && inf_norm(f.A.transpose() * yy + f.G.transpose() * zz) / t <= tol * (1 + cn)) {
                    out.status = SolveStatus::Infeasible;
                    out.x = VectorXd();
                    out.y = yy / t;
                    out.z = zz / t;
                    out.message = "primal infeasibility certificate found";
                    return finish(out);
                }
            }
            const double cx = -P.c.dot(x);
            if (cx > 0 && tau < kappa) {
                VectorXd xx = P.D.cwiseProduct(x), ss = s.cwiseQuotient(P.E2);
                const double t = -f.c.dot(xx);
                const double ra = f.A.rows() ? inf_norm(f.A * xx) : 0.0;
                if (t > 0 && std::max(ra, inf_norm(f.G * xx + ss)) / t <= tol * (1 + std::max(bn, hn))) {
                    out.status = SolveStatus::Unbounded;
                    out.x = xx / t;
                    out.message = "dual infeasibility certificate found";
                    return finish(out);
                }
            }
        }
        if (it >= set.max_iter || stall >= 5) break;

        if (!C.compute_scaling(s, z) || !kkt.factor()) {
            out.message = "KKT factorisation failed";
            break;
        }

        const VectorXd ht = C.WinvT(P.h);
        VectorXd x1, y1, z1t;
        kkt.solve(-P.c, P.b, ht, x1, y1, z1t);
        const double den = P.c.dot(x1) + P.b.dot(y1) + ht.dot(z1t) - kappa / tau;

        struct Dir {
            VectorXd dx, dy, dz, ds_t, dz_t;
            double dtau = 0, dkappa = 0;
        };
        auto direction = [&](double sigma, const VectorXd& dsr, double dkr) {
            Dir d;
            VectorXd ld = C.lambda_div(dsr);
            kkt.solve(-(1 - sigma) * rx, -(1 - sigma) * ry, C.WinvT(-(1 - sigma) * rz) - ld, d.dx, d.dy, d.dz_t);
            const double num = -(1 - sigma) * rt - dkr / tau - (P.c.dot(d.dx) + P.b.dot(d.dy) + ht.dot(d.dz_t));
            d.dtau = num / den;
            d.dx += d.dtau * x1;
            d.dy += d.dtau * y1;
            d.dz_t += d.dtau * z1t;
            d.dz = C.Winv(d.dz_t);
            d.ds_t = ld - d.dz_t;
            d.dkappa = (dkr - kappa * d.dtau) / tau;
            return d;
        };
        auto step_to_boundary = [&](const Dir& d) {
            double a = std::min(C.max_step_lambda(d.ds_t), C.max_step_lambda(d.dz_t));
            if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        VectorXd lsq = C.lambda_sq();
        Dir aff = direction(0.0, -lsq, -tau * kappa);
        const double aa = std::min(1.0, step_to_boundary(aff));
        const double sigma = std::clamp(std::pow(1 - aa, 3), 0.0, 1.0);

        VectorXd dsr = -lsq - C.jordan(aff.ds_t, aff.dz_t) + sigma * mu * e;
        const double dkr = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        Dir d = direction(sigma, dsr, dkr);
        double alpha = std::min(1.0, 0.99 * step_to_boundary(d));

        VectorXd ds = C.WT(d.ds_t);
        bool moved = false;
        for (int bt = 0; bt < 20; ++bt) {
            VectorXd s1 = s + alpha * ds, z1n = z + alpha * d.dz;
            const double t1 = tau + alpha * d.dtau, k1 = kappa + alpha * d.dkappa;
            if (t1 > 0 && k1 > 0 && C.min_eig(s1) > 0 && C.min_eig(z1n) > 0) {
                x += alpha * d.dx;
                y += alpha * d.dy;
                s = std::move(s1);
                z = std::move(z1n);
                tau = t1;
                kappa = k1;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved || alpha < 1e-10)
            ++stall;
        else
            stall = 0;
    }

    const double near = tol * set.near_factor;
    if (best_score < std::max({out.res.primal, out.res.dual, out.res.gap})) {
        const int iters = out.iterations;
        std::string msg = out.message;
        out = std::move(best);
        out.iterations = iters;
        out.message = msg;
    }
    if (out.res.primal <= near && out.res.dual <= near && out.res.gap <= near)
        out.status = SolveStatus::NearOptimal;
    else if (out.iterations >= set.max_iter)
        out.status = SolveStatus::MaxIterations;
    else
        out.status = SolveStatus::NumericalError;
    if (out.message.empty()) out.message = "stopped before reaching tolerance";
    return finish(out);
}

}  // namespace cscopf
