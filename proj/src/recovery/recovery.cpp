#include <cmath>

#include <Eigen/Eigenvalues>

#include "cscopf/recovery.hpp"

namespace cscopf {

RankOne rank_one_decompose(const Eigen::MatrixXd& W, int ref)
{
    if (W.rows() != W.cols() || W.rows() == 0) throw RecoveryError("rank-one decomposition needs a square matrix");
    const Eigen::MatrixXd S = 0.5 * (W + W.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw RecoveryError("eigen decomposition failed");
    const auto n = S.rows();
    RankOne r;
    r.lambda1 = es.eigenvalues()(n - 1);
    r.lambda2 = n > 1 ? es.eigenvalues()(n - 2) : 0.0;
    if (!(r.lambda1 > 0)) throw RecoveryError("degenerate matrix: largest eigenvalue is not positive");
    r.eps = std::max(0.0, r.lambda2) / r.lambda1;
    r.degenerate = r.lambda1 - r.lambda2 <= 1e-9 * r.lambda1;
    r.x = std::sqrt(r.lambda1) * es.eigenvectors().col(n - 1);

    if (ref < 0 || ref >= n) ref = 0;
    double pivot = r.x(ref);
    if (std::abs(pivot) < 1e-12 * r.x.norm()) {
        Eigen::Index k;
        r.x.cwiseAbs().maxCoeff(&k);
        pivot = r.x(k);
    }
    if (pivot < 0) r.x = -r.x;
    return r;
}

namespace {

Eigen::VectorXd vec_of(const VarBlock& b, const Eigen::VectorXd& x)
{
    Eigen::VectorXd v(b.rows * b.cols);
    for (int j = 0; j < b.cols; ++j)
        for (int i = 0; i < b.rows; ++i) v(i + j * b.rows) = x(b.index(i, j));
    return v;
}

Eigen::MatrixXd mat_of(const VarBlock& b, const Eigen::VectorXd& x)
{
    Eigen::MatrixXd m(b.rows, b.cols);
    for (int j = 0; j < b.cols; ++j)
        for (int i = 0; i < b.rows; ++i) m(i, j) = x(b.index(i, j));
    return m;
}

void fill_opf(SolutionBundle& s, const ConicProgram& p, const OpfVars& opf, const RawSolution& r)
{
    s.status = r.status;
    s.message = r.message;
    s.iterations = r.iterations;
    s.verified_residual = r.res.verified;
    if (r.x.size() != p.num_vars()) return;
    const auto& x = r.x;
    s.objective = p.objective().eval(x);
    s.cost = opf.cost.eval(x);
    const int n2 = 2 * static_cast<int>(opf.nb);
    s.W = Eigen::MatrixXd::Zero(n2, n2);
    for (int a = 0; a < n2; ++a)
        for (int b = 0; b < n2; ++b) s.W(a, b) = opf.w(a, b).eval(x);
    s.V = vec_of(opf.V, x);
    s.Pg = vec_of(opf.Pg, x);
    s.Qg = vec_of(opf.Qg, x);
    const auto r1 = rank_one_decompose(s.W, static_cast<int>(opf.slack));
    s.Vw = r1.x;
    s.eps_w = r1.eps;
}

double mse(const Eigen::VectorXd& a)
{
    return a.size() ? a.squaredNorm() / static_cast<double>(a.size()) : 0.0;
}

Eigen::VectorXd magnitudes(const Eigen::VectorXd& X)
{
    const auto h = X.size() / 2;
    return (X.head(h).array().square() + X.tail(h).array().square()).sqrt();
}

// [Vd - (Vx u - Vy v); Vq - (Vx v + Vy u)] per generator
Eigen::VectorXd park_residual(const CaseSystem& c, const Eigen::VectorXd& V, const Eigen::VectorXd& Vdq,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    const auto ng = static_cast<Eigen::Index>(c.ng()), nb = static_cast<Eigen::Index>(c.nb());
    Eigen::VectorXd r(2 * ng);
    for (Eigen::Index i = 0; i < ng; ++i) {
        const auto k = static_cast<Eigen::Index>(c.gen_bus_pos(i));
        const double vx = V(k), vy = V(nb + k);
        r(i) = Vdq(i) - (vx * u(i) - vy * v(i));
        r(ng + i) = Vdq(ng + i) - (vx * v(i) + vy * u(i));
    }
    return r;
}

Spectrum equilibrium_spectrum(const CaseSystem& c, const JacobianAffine& ja, const Eigen::VectorXd& V,
                              const Eigen::VectorXd& Pg, const Eigen::VectorXd& Qg)
{
    const auto st = init_operating_point(c, to_complex(V), Pg, Qg);
    const auto J = build_jacobian(ja, st);
    return spectral_abscissa(angle_referenced(reduced_jacobian(J, ja.n()), c.ng()));
}

}  // namespace

SolutionBundle extract_opf_solution(const ConicProgram& p, const OpfVars& opf, const RawSolution& r)
{
    SolutionBundle s;
    fill_opf(s, p, opf, r);
    return s;
}

SolutionBundle extract_cscopf_solution(const CscopfProgram& cp, const RawSolution& r)
{
    SolutionBundle s;
    fill_opf(s, cp.prog, cp.opf, r);
    if (r.x.size() != cp.prog.num_vars()) return s;
    const auto& x = r.x;
    const int ng = static_cast<int>(cp.st.ng);

    s.Wdq = mat_of(cp.st.Wdq, x);
    s.Vdq = vec_of(cp.st.Vdq, x);
    s.u = vec_of(cp.park.u, x);
    s.v = vec_of(cp.park.v, x);
    s.Uu = vec_of(cp.park.Uu, x);
    s.Uv = vec_of(cp.park.Uv, x);
    s.J = cp.jac->J.eval(x);
    if (cp.lyap) {
        s.P = mat_of(cp.lyap->P, x);
        s.Z = cp.lyap->Z_eval(x);
        if (cp.lyap->has_M) s.M = mat_of(cp.lyap->M, x);
    }
    for (int k = 0; k < 5; ++k) s.h[k] = cp.pen.h[k].eval(x);
    if (cp.zeta) s.zeta = x(cp.zeta->index(0));

    // reference: Vq of the first machine
    const auto r1 = rank_one_decompose(s.Wdq, ng);
    s.Vdqw = r1.x;
    s.eps_wdq = r1.eps;
    return s;
}

BaseSolution make_base_solution(const CaseSystem& c, const SolutionBundle& opf)
{
    if (opf.Vw.size() != 2 * static_cast<Eigen::Index>(c.nb()))
        throw RecoveryError("relaxed OPF solution has no voltages to anchor on");
    const auto st = init_operating_point(c, to_complex(opf.Vw), opf.Pg, opf.Qg);
    BaseSolution b;
    b.V = opf.Vw;
    b.Vdq.resize(2 * st.Vd.size());
    b.Vdq << st.Vd, st.Vq;
    b.u = st.delta.array().sin();
    b.v = st.delta.array().cos();
    b.Ef = st.Ef;
    b.Pg = opf.Pg;
    b.Qg = opf.Qg;
    b.cost = opf.cost;
    b.loss_mw = opf.loss_mw(c);
    return b;
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Marginal: return "marginal";
    case Verdict::Unstable: return "unstable";
    }
    return "unknown";
}

Verdict classify(double sigma_max, double tol)
{
    if (!std::isfinite(sigma_max)) return Verdict::Unstable;
    if (sigma_max < -tol) return Verdict::Stable;
    if (sigma_max > tol) return Verdict::Unstable;
    return Verdict::Marginal;
}

StabilityVerdict verify_stability(const CaseSystem& c, const NetworkMatrices&, const JacobianAffine& ja,
                                  const SolutionBundle& s)
{
    if (s.V.size() != 2 * static_cast<Eigen::Index>(c.nb()) || s.Vw.size() != s.V.size())
        throw RecoveryError("solution lacks voltage vectors");
    StabilityVerdict v;
    const auto a = equilibrium_spectrum(c, ja, s.V, s.Pg, s.Qg);
    const auto b = equilibrium_spectrum(c, ja, s.Vw, s.Pg, s.Qg);
    v.sigma_max = a.sigma_max;
    v.n_rhp = a.n_rhp;
    v.sigma0_max = b.sigma_max;
    v.n_rhp0 = b.n_rhp;
    v.gap = std::abs(v.sigma_max - v.sigma0_max);
    if (s.J.rows() == static_cast<Eigen::Index>(ja.layout.size())) {
        try {
            v.sigma_sdp = spectral_abscissa(angle_referenced(reduced_jacobian(s.J, ja.n()), c.ng())).sigma_max;
        } catch (const SingularityError&) {
            // diagnostic only
        }
    }
    return v;
}

ErrorReport compute_error_report(const SolutionBundle& sol, const SolutionBundle& base, const CaseSystem& c,
                                 const std::optional<StabilityVerdict>& v)
{
    ErrorReport e;
    e.eps_w = 100 * sol.eps_w;
    e.eps_wdq = 100 * sol.eps_wdq;
    if (sol.Vw.size() == sol.V.size() && sol.V.size() > 0) e.eps_vmag = mse(magnitudes(sol.V) - magnitudes(sol.Vw));
    if (sol.has_machine_vars()) {
        e.eps_vdqmag = mse(magnitudes(sol.Vdq) - magnitudes(sol.Vdqw));
        e.eps_p = mse(park_residual(c, sol.V, sol.Vdq, sol.u, sol.v));
        const Eigen::VectorXd us = sol.Uu.cwiseMax(0).cwiseSqrt().cwiseProduct(sol.u.unaryExpr([](double t) {
            return t < 0 ? -1.0 : 1.0;
        }));
        const Eigen::VectorXd vs = sol.Uv.cwiseMax(0).cwiseSqrt().cwiseProduct(sol.v.unaryExpr([](double t) {
            return t < 0 ? -1.0 : 1.0;
        }));
        e.eps_p_w = mse(park_residual(c, sol.Vw, sol.Vdqw, us, vs));
        e.eps_uv = mse((sol.u.array().square() + sol.v.array().square() - 1.0).matrix());
    }
    e.cost = sol.cost;
    e.delta_p = base.cost != 0 ? 100 * (sol.cost - base.cost) / base.cost : 0.0;
    if (sol.Pg.size()) e.loss_mw = sol.loss_mw(c);
    if (base.Pg.size()) e.delta_ploss = e.loss_mw - base.loss_mw(c);
    if (v) {
        e.sigma_max = v->sigma_max;
        e.sigma0_max = v->sigma0_max;
        e.gap = v->gap;
        e.n_rhp = v->n_rhp;
        e.n_rhp0 = v->n_rhp0;
        e.sigma_sdp = v->sigma_sdp;
    }
    return e;
}

}  // namespace cscopf
