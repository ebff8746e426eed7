#include <algorithm>
#include <cmath>

#include "cscopf/relaxation.hpp"

namespace cscopf {

LinExpr OpfVars::w(int r, int c) const
{
    const int a = widx[r], b = widx[c];
    if (a < 0 || b < 0) return {};
    return W(a, b);
}

LinExpr OpfVars::trace(const SpMat& A) const
{
    LinExpr e;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            const int a = widx[it.row()], b = widx[it.col()];
            if (a < 0 || b < 0) continue;
            e.add(W.index(a, b), it.value());
        }
    return e.compress();
}

OpfVars build_relaxed_opf(ConicProgram& p, const CaseSystem& c, const NetworkMatrices& net,
                          const RelaxOptions& opt)
{
    OpfVars o;
    o.nb = c.nb();
    o.slack = c.slack_pos();
    const int nb = static_cast<int>(o.nb), ng = static_cast<int>(c.ng());
    const int ns = nb + static_cast<int>(o.slack);

    o.widx.resize(2 * nb);
    for (int r = 0, k = 0; r < 2 * nb; ++r) o.widx[r] = r == ns ? -1 : k++;

    o.W = p.add_symmetric("W", 2 * nb - 1);
    o.V = p.add_vector("V", 2 * nb);
    o.Pg = p.add_vector("Pg", ng);
    o.Qg = p.add_vector("Qg", ng);
    o.t_cost = p.add_vector("t_cost", ng);

    p.add_eq(o.V(ns), "angle_ref");

    // [[W, V'], [V'^T, 1]] >= 0 with V' = V minus the slack Vy
    const int nw = 2 * nb - 1;
    std::vector<int> vmap(nw);
    for (int r = 0; r < 2 * nb; ++r)
        if (o.widx[r] >= 0) vmap[o.widx[r]] = r;
    p.add_psd(
        nw + 1,
        [&](int i, int j) -> LinExpr {
            if (i < nw) return o.W(i, j);
            if (j < nw) return o.V(vmap[j]);
            return 1.0;
        },
        "psd_W");

    std::vector<LinExpr> pinj(nb), qinj(nb);
    for (int g = 0; g < ng; ++g) {
        const auto k = c.gen_bus_pos(g);
        pinj[k] += o.Pg(g);
        qinj[k] += o.Qg(g);
    }
    for (int k = 0; k < nb; ++k) {
        const auto& b = c.buses[k];
        const std::string s = std::to_string(b.id);
        p.add_eq(o.trace(net.Yk[k]) - (pinj[k] - b.P_d), "p_balance_" + s);
        p.add_eq(o.trace(net.Yk_bar[k]) - (qinj[k] - b.Q_d), "q_balance_" + s);
        const LinExpr vm = o.trace(net.Mk[k]);
        p.add_le(vm, b.V_max * b.V_max, "vmax_" + s);
        p.add_ge(vm - b.V_min * b.V_min, "vmin_" + s);
    }

    if (opt.flow_limits)
        for (const auto& fm : net.flows) {
            if (fm.S_max <= 0) continue;
            const auto& br = c.branches[fm.branch];
            p.add_soc({fm.S_max, o.trace(fm.Ykl), o.trace(fm.Ykl_bar)},
                      "flow_" + std::to_string(br.from) + "_" + std::to_string(br.to) + (fm.from_side ? "_f" : "_t"));
        }

    for (int g = 0; g < ng; ++g) {
        const auto& G = c.generators[g];
        const std::string s = std::to_string(g);
        p.add_ge(o.Pg(g) - G.P_min, "pmin_" + s);
        p.add_le(o.Pg(g), G.P_max, "pmax_" + s);
        p.add_ge(o.Qg(g) - G.Q_min, "qmin_" + s);
        p.add_le(o.Qg(g), G.Q_max, "qmax_" + s);
        // t >= Pg^2
        p.add_rotated_soc(o.t_cost(g), 1.0, o.Pg(g), "cost_epi_" + s);
        o.cost += G.c2 * o.t_cost(g) + G.c1 * o.Pg(g) + G.c0;
    }
    o.cost.compress();

    p.add_objective(o.cost);
    if (opt.anchor > 0) p.add_objective(-opt.anchor * o.V(static_cast<int>(o.slack)));
    return o;
}

StatorCoefficients stator_coefficients(const MachineParams& m, double Ef)
{
    return {Ef / m.x_d, (m.x_d - m.x_q) / (m.x_d * m.x_q), Ef / m.x_d, -1.0 / m.x_q, -1.0 / m.x_d};
}

StatorVars build_stator_coupling(ConicProgram& p, const CaseSystem& c, const OpfVars& opf,
                                 const Eigen::VectorXd& Ef)
{
    const int ng = static_cast<int>(c.ng()), nb = static_cast<int>(c.nb());
    if (Ef.size() != ng) throw BuildError("stator coupling needs one field voltage per generator");
    StatorVars s;
    s.ng = c.ng();
    s.Wdq = p.add_symmetric("Wdq", 2 * ng);
    s.Vdq = p.add_vector("Vdq", 2 * ng);

    p.add_psd(
        2 * ng + 1,
        [&](int i, int j) -> LinExpr {
            if (i < 2 * ng) return s.Wdq(i, j);
            if (j < 2 * ng) return s.Vdq(j);
            return 1.0;
        },
        "psd_Wdq");

    for (int g = 0; g < ng; ++g) {
        const int m = g + ng;
        const auto k = static_cast<int>(c.gen_bus_pos(g));
        const auto sc = stator_coefficients(c.generators[g].dyn, Ef(g));
        const std::string t = std::to_string(g);
        p.add_eq(opf.Pg(g) - sc.pg_vd * s.Vdq(g) - sc.pg_wdm * s.Wdq(m, g), "stator_p_" + t);
        p.add_eq(opf.Qg(g) - sc.qg_vq * s.Vdq(m) - sc.qg_wii * s.Wdq(g, g) - sc.qg_wmm * s.Wdq(m, m),
                 "stator_q_" + t);
        // |Vdq|^2 = |V|^2 at the terminal bus
        p.add_eq(s.Wdq(g, g) + s.Wdq(m, m) - opf.w(k, k) - opf.w(k + nb, k + nb), "wn_wdq_" + t);
    }
    return s;
}

std::array<LinExpr, 4> mccormick_envelope(const LinExpr& a, Interval A, const LinExpr& b, Interval B,
                                          const LinExpr& w)
{
    if (!(A.lo <= A.hi) || !(B.lo <= B.hi)) throw BuildError("McCormick envelope with inverted bounds");
    return {
        w - A.lo * b - B.lo * a + A.lo * B.lo,
        w - A.hi * b - B.hi * a + A.hi * B.hi,
        A.hi * b + B.lo * a - A.hi * B.lo - w,
        A.lo * b + B.hi * a - A.lo * B.hi - w,
    };
}

void add_mccormick(ConicProgram& p, const LinExpr& a, Interval A, const LinExpr& b, Interval B,
                   const LinExpr& w, const std::string& tag)
{
    auto rows = mccormick_envelope(a, A, b, B, w);
    for (int i = 0; i < 4; ++i) p.add_ge(std::move(rows[i]), tag + "_" + std::to_string(i));
}

ParkVars build_park_mccormick(ConicProgram& p, const CaseSystem& c, const OpfVars& opf,
                              const StatorVars& st, const ParkBounds& bd)
{
    const int ng = static_cast<int>(c.ng()), nb = static_cast<int>(c.nb());
    if (bd.window && (bd.V0.size() != 2 * nb || bd.u0.size() != ng || bd.v0.size() != ng))
        throw BuildError("Park window needs a base point");
    ParkVars k;
    k.u = p.add_vector("u", ng);
    k.v = p.add_vector("v", ng);
    k.Uu = p.add_vector("Uu", ng);
    k.Uv = p.add_vector("Uv", ng);
    k.wxu = p.add_vector("w_xu", ng);
    k.wyv = p.add_vector("w_yv", ng);
    k.wxv = p.add_vector("w_xv", ng);
    k.wyu = p.add_vector("w_yu", ng);

    auto clip = [](Interval full, double x0, double r) {
        Interval o{std::max(full.lo, x0 - r), std::min(full.hi, x0 + r)};
        if (o.lo > o.hi) o.lo = o.hi = std::clamp(x0, full.lo, full.hi);
        return o;
    };

    for (int g = 0; g < ng; ++g) {
        const int bus = static_cast<int>(c.gen_bus_pos(g));
        const double vm = c.buses[bus].V_max;
        Interval bx{-vm, vm}, by{-vm, vm}, bu{-1, 1}, bv{-1, 1};
        const std::string t = std::to_string(g);
        const LinExpr Vx = opf.V(bus), Vy = opf.V(bus + nb);
        if (bd.window) {
            bx = clip(bx, bd.V0(bus), bd.window->r_v);
            by = clip(by, bd.V0(bus + nb), bd.window->r_v);
            bu = clip(bu, bd.u0(g), bd.window->r_uv);
            bv = clip(bv, bd.v0(g), bd.window->r_uv);
        }
        // box rows keep the envelopes valid (the windowed ones also cut the feasible set)
        p.add_ge(Vx - bx.lo, "box_vx_lo_" + t);
        p.add_le(Vx, bx.hi, "box_vx_hi_" + t);
        p.add_ge(Vy - by.lo, "box_vy_lo_" + t);
        p.add_le(Vy, by.hi, "box_vy_hi_" + t);
        p.add_ge(k.u(g) - bu.lo, "box_u_lo_" + t);
        p.add_le(k.u(g), bu.hi, "box_u_hi_" + t);
        p.add_ge(k.v(g) - bv.lo, "box_v_lo_" + t);
        p.add_le(k.v(g), bv.hi, "box_v_hi_" + t);

        add_mccormick(p, Vx, bx, k.u(g), bu, k.wxu(g), "mcc_xu_" + t);
        add_mccormick(p, Vy, by, k.v(g), bv, k.wyv(g), "mcc_yv_" + t);
        add_mccormick(p, Vx, bx, k.v(g), bv, k.wxv(g), "mcc_xv_" + t);
        add_mccormick(p, Vy, by, k.u(g), bu, k.wyu(g), "mcc_yu_" + t);

        // Vd = Vx sin - Vy cos, Vq = Vx cos + Vy sin
        p.add_eq(st.Vdq(g) - k.wxu(g) + k.wyv(g), "park_d_" + t);
        p.add_eq(st.Vdq(g + ng) - k.wxv(g) - k.wyu(g), "park_q_" + t);

        p.add_eq(k.Uu(g) + k.Uv(g) - 1.0, "trig_" + t);
        p.add_rotated_soc(k.Uu(g), 1.0, k.u(g), "trig_u_" + t);
        p.add_rotated_soc(k.Uv(g), 1.0, k.v(g), "trig_v_" + t);
    }
    return k;
}

}  // namespace cscopf
