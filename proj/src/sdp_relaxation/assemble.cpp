#include "cscopf/assemble.hpp"

namespace cscopf {

PenaltyTerms build_penalties(ConicProgram& p, const BaseSolution* base, const OpfVars& opf,
                             const StatorVars& st, const ParkVars& park, const LyapunovVars* lyap,
                             const JacobianExpr* J)
{
    if (!base) throw BuildError("penalties need a base solution");
    const int nb = static_cast<int>(opf.nb), ng = static_cast<int>(st.ng);
    if (base->V.size() != 2 * nb || base->Vdq.size() != 2 * ng || base->u.size() != ng || base->v.size() != ng)
        throw BuildError("base solution does not match the case dimensions");

    PenaltyTerms t;

    if (lyap) {
        if (!J) throw BuildError("h1 needs the Jacobian expression");
        // || vec(Z + J) ||; with implied R, Q the lower block row is identically zero
        std::vector<LinExpr> rows{LinExpr{}};
        const int rmax = lyap->implied_rq ? lyap->n : lyap->N;
        for (int j = 0; j < lyap->N; ++j)
            for (int i = 0; i < rmax; ++i) {
                LinExpr e = lyap->Z(i, j) + (*J)(i, j);
                e.compress();
                if (e.terms.empty() && e.constant == 0.0) continue;
                rows.push_back(std::move(e));
            }
        t.t_h1 = p.add_scalar("t_h1");
        rows[0] = t.t_h1(0);
        p.add_soc(std::move(rows), "h1_epi");
        t.h[0] = t.t_h1(0);
    }

    // Tr W counts the removed slack Vy as zero, consistent with V(ns) = 0
    LinExpr h2 = base->V.squaredNorm();
    for (int i = 0; i < opf.order(); ++i) h2 += opf.W(i, i);
    for (int r = 0; r < 2 * nb; ++r) h2 -= 2 * base->V(r) * opf.V(r);
    t.h[1] = h2.compress();

    LinExpr h3 = base->Vdq.squaredNorm();
    for (int i = 0; i < 2 * ng; ++i) h3 += st.Wdq(i, i) - 2 * base->Vdq(i) * st.Vdq(i);
    t.h[2] = h3.compress();

    LinExpr h4, h5;
    for (int i = 0; i < ng; ++i) {
        h4 += park.Uu(i) - 2 * base->u(i) * park.u(i) + base->u(i) * base->u(i);
        h5 += park.Uv(i) - 2 * base->v(i) * park.v(i) + base->v(i) * base->v(i);
    }
    t.h[3] = h4.compress();
    t.h[4] = h5.compress();
    return t;
}

CscopfProgram assemble_cscopf(const CaseSystem& c, const NetworkMatrices& net, const JacobianAffine& ja,
                              const BaseSolution& base, const CscopfOptions& opt)
{
    for (double g : opt.gamma)
        if (!(g >= 0)) throw BuildError("penalty weights must be nonnegative");
    if (base.Ef.size() != static_cast<Eigen::Index>(c.ng())) throw BuildError("base solution lacks field voltages");

    CscopfProgram out;
    out.opt = opt;
    auto& p = out.prog;
    out.opf = build_relaxed_opf(p, c, net, opt.relax);
    out.st = build_stator_coupling(p, c, out.opf, base.Ef);
    ParkBounds pb;
    if (opt.window) {
        pb.window = opt.window;
        pb.V0 = base.V;
        pb.u0 = base.u;
        pb.v0 = base.v;
    }
    out.park = build_park_mccormick(p, c, out.opf, out.st, pb);
    out.jac = std::make_unique<JacobianInProgram>(jacobian_in_program(ja, c, out.opf, out.st, out.park, base.Ef));

    // with no stability weight in penalty-only mode the Lyapunov variables would be inert
    const bool stability = opt.mode != StabilityMode::PenaltyOnly || opt.gamma[0] > 0;
    if (stability) {
        out.lyap = build_bmi_blocks(p, out.jac->J, opt.mode, BmiOptions{opt.eps, true});
        if (opt.mode == StabilityMode::Zeta) out.zeta = build_zeta_variant(p, *out.lyap, out.jac->J, opt.mode, opt.gamma[0]);
    }
    out.pen = build_penalties(p, &base, out.opf, out.st, out.park, out.lyap ? &*out.lyap : nullptr, &out.jac->J);
    for (int k = 0; k < 5; ++k) {
        if (opt.gamma[k] == 0.0 || (k == 0 && !out.lyap)) continue;
        p.add_objective(opt.gamma[k] * out.pen.h[k]);
    }
    return out;
}

}  // namespace cscopf
