#include "cscopf/dae.hpp"

#include <cmath>
#include <numbers>

namespace cscopf {

Eigen::VectorXd DynamicState::z(const DaeLayout& L) const
{
    Eigen::VectorXd out(L.size());
    for (std::size_t i = 0; i < L.ng; ++i) {
        out(L.delta(i)) = delta(i);
        out(L.omega(i)) = omega(i);
        out(L.eq(i)) = Eq(i);
        out(L.ed(i)) = Ed(i);
        out(L.vd(i)) = Vd(i);
        out(L.vq(i)) = Vq(i);
    }
    for (std::size_t k = 0; k < L.nb; ++k) {
        out(L.vx(k)) = Vx(k);
        out(L.vy(k)) = Vy(k);
    }
    return out;
}

void DynamicState::set_z(const DaeLayout& L, const Eigen::VectorXd& z)
{
    for (std::size_t i = 0; i < L.ng; ++i) {
        delta(i) = z(L.delta(i));
        omega(i) = z(L.omega(i));
        Eq(i) = z(L.eq(i));
        Ed(i) = z(L.ed(i));
        Vd(i) = z(L.vd(i));
        Vq(i) = z(L.vq(i));
    }
    for (std::size_t k = 0; k < L.nb; ++k) {
        Vx(k) = z(L.vx(k));
        Vy(k) = z(L.vy(k));
    }
}

DynamicState init_operating_point(const CaseSystem& c, const Eigen::VectorXcd& V,
                                  const Eigen::VectorXd& Pg, const Eigen::VectorXd& Qg,
                                  const InitOptions& opt)
{
    const auto ng = static_cast<Eigen::Index>(c.ng());
    if (V.size() != static_cast<Eigen::Index>(c.nb()) || Pg.size() != ng || Qg.size() != ng)
        throw std::invalid_argument("init_operating_point: dimension mismatch");

    DynamicState st;
    st.delta.resize(ng);
    st.omega = Eigen::VectorXd::Zero(ng);
    st.Eq.resize(ng);
    st.Ed.resize(ng);
    st.Ef.resize(ng);
    st.Pm = Pg;
    st.Vd.resize(ng);
    st.Vq.resize(ng);
    st.Vx = V.real();
    st.Vy = V.imag();

    for (Eigen::Index i = 0; i < ng; ++i) {
        const auto& d = c.generators[i].dyn;
        const cplx Vt = V(c.gen_bus_pos(i));
        if (std::abs(Vt) < 1e-9) throw InitError(i, "generator " + std::to_string(i) + ": zero terminal voltage");
        const cplx S(Pg(i), Qg(i));
        const cplx I = std::conj(S / Vt);
        const cplx EQ = Vt + cplx(0, d.x_q) * I;
        const double delta = std::arg(EQ);
        const double load_angle = std::remainder(delta - std::arg(Vt), 2 * std::numbers::pi);
        if (std::abs(load_angle) >= std::numbers::pi / 2)
            throw InitError(i, "generator " + std::to_string(i) + ": load angle outside (-pi/2, pi/2)");

        const double sd = std::sin(delta), cd = std::cos(delta);
        const double vd = Vt.real() * sd - Vt.imag() * cd;
        const double vq = Vt.real() * cd + Vt.imag() * sd;
        const double id = I.real() * sd - I.imag() * cd;
        const double iq = I.real() * cd + I.imag() * sd;
        const double ef = vq + d.x_d * id;
        if (!(ef > 0)) throw InitError(i, "generator " + std::to_string(i) + ": non-positive field voltage");
        if (opt.ef_max && ef > *opt.ef_max)
            throw InitError(i, "generator " + std::to_string(i) + ": field voltage above limit (overloaded)");

        st.delta(i) = delta;
        st.Vd(i) = vd;
        st.Vq(i) = vq;
        st.Ef(i) = ef;
        st.Eq(i) = vq + d.x_d_prime * id;
        st.Ed(i) = vd - d.x_q_prime * iq;
    }
    return st;
}

Eigen::VectorXd dae_residual(const CaseSystem& c, const NetworkMatrices& net,
                             const DynamicState& st, const Eigen::VectorXd& z)
{
    const DaeLayout L(c);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(L.size());
    Eigen::VectorXd X(2 * L.nb);
    for (std::size_t k = 0; k < L.nb; ++k) {
        X(k) = z(L.vx(k));
        X(L.nb + k) = z(L.vy(k));
    }
    Eigen::VectorXd pe = Eigen::VectorXd::Zero(L.nb), qe = Eigen::VectorXd::Zero(L.nb);

    for (std::size_t i = 0; i < L.ng; ++i) {
        const auto& d = c.generators[i].dyn;
        const auto k = c.gen_bus_pos(i);
        const double dl = z(L.delta(i)), w = z(L.omega(i));
        const double eq = z(L.eq(i)), ed = z(L.ed(i));
        const double vd = z(L.vd(i)), vq = z(L.vq(i));
        const double id = (eq - vq) / d.x_d_prime;
        const double iq = (vd - ed) / d.x_q_prime;
        const double Pe = vd * id + vq * iq;
        const double Qe = vq * id - vd * iq;

        F(L.delta(i)) = w;
        F(L.omega(i)) = kOmegaBase / (2 * d.H) * (st.Pm(i) - Pe) - d.D / (2 * d.H) * w;
        F(L.eq(i)) = (-eq - (d.x_d - d.x_d_prime) * id + st.Ef(i)) / d.T_d0_prime;
        F(L.ed(i)) = (-ed + (d.x_q - d.x_q_prime) * iq) / d.T_q0_prime;

        pe(k) += Pe;
        qe(k) += Qe;
        const double vx = X(k), vy = X(L.nb + k);
        F(L.row_park_d(i)) = vd - (vx * std::sin(dl) - vy * std::cos(dl));
        F(L.row_park_q(i)) = vq - (vx * std::cos(dl) + vy * std::sin(dl));
    }
    for (std::size_t k = 0; k < L.nb; ++k) {
        F(L.row_p(k)) = pe(k) - c.buses[k].P_d - quad(net.Yk[k], X);
        F(L.row_q(k)) = qe(k) - c.buses[k].Q_d - quad(net.Yk_bar[k], X);
    }
    return F;
}

std::vector<StatorResidual> stator_residual(const CaseSystem& c, const DynamicState& st,
                                            const Eigen::VectorXd& Pg, const Eigen::VectorXd& Qg)
{
    std::vector<StatorResidual> out(c.ng());
    for (std::size_t i = 0; i < c.ng(); ++i) {
        const auto& d = c.generators[i].dyn;
        const double vd = st.Vd(i), vq = st.Vq(i), ef = st.Ef(i);
        out[i].a = Pg(i) - (ef * vd / d.x_d + (d.x_d - d.x_q) / (d.x_d * d.x_q) * vd * vq);
        out[i].b = Qg(i) - (ef * vq / d.x_d - vd * vd / d.x_q - vq * vq / d.x_d);
    }
    return out;
}

const char* to_string(JParam p)
{
    switch (p) {
    case JParam::Vx: return "Vx";
    case JParam::Vy: return "Vy";
    case JParam::Vd: return "Vd";
    case JParam::Vq: return "Vq";
    case JParam::U: return "u";
    case JParam::V: return "v";
    case JParam::Eq: return "Eq";
    case JParam::Ed: return "Ed";
    }
    return "?";
}

namespace {

using Trip = Eigen::Triplet<double>;

struct AffineBuilder {
    std::size_t N;
    Eigen::MatrixXd J0;
    std::vector<std::vector<Trip>> trips;  // per parameter slot

    AffineBuilder(std::size_t n, std::size_t nparam)
        : N(n), J0(Eigen::MatrixXd::Zero(n, n)), trips(nparam) {}
    void c0(std::size_t r, std::size_t col, double v) { J0(r, col) += v; }
    void add(std::size_t slot, std::size_t r, std::size_t col, double v)
    {
        if (v != 0.0) trips[slot].emplace_back(static_cast<int>(r), static_cast<int>(col), v);
    }
};

}  // namespace

JacobianAffine build_jacobian_affine(const CaseSystem& c, const NetworkMatrices& net)
{
    const DaeLayout L(c);
    const std::size_t nb = L.nb, ng = L.ng, N = L.size();
    // parameter slots
    auto sVx = [&](std::size_t k) { return k; };
    auto sVy = [&](std::size_t k) { return nb + k; };
    auto sVd = [&](std::size_t i) { return 2 * nb + i; };
    auto sVq = [&](std::size_t i) { return 2 * nb + ng + i; };
    auto sU = [&](std::size_t i) { return 2 * nb + 2 * ng + i; };
    auto sV = [&](std::size_t i) { return 2 * nb + 3 * ng + i; };
    auto sEq = [&](std::size_t i) { return 2 * nb + 4 * ng + i; };
    auto sEd = [&](std::size_t i) { return 2 * nb + 5 * ng + i; };
    const std::size_t nparam = 2 * nb + 6 * ng;

    AffineBuilder b(N, nparam);

    for (std::size_t i = 0; i < ng; ++i) {
        const auto& d = c.generators[i].dyn;
        const auto k = c.gen_bus_pos(i);
        const double xdp = d.x_d_prime, xqp = d.x_q_prime;
        const double cw = kOmegaBase / (2 * d.H);

        b.c0(L.delta(i), L.omega(i), 1.0);

        // swing row: -cw * dPe
        const auto rw = L.omega(i);
        b.c0(rw, rw, -d.D / (2 * d.H));
        b.add(sVd(i), rw, L.eq(i), -cw / xdp);
        b.add(sVq(i), rw, L.ed(i), cw / xqp);
        b.add(sEq(i), rw, L.vd(i), -cw / xdp);
        b.add(sVq(i), rw, L.vd(i), cw / xdp - cw / xqp);
        b.add(sVd(i), rw, L.vq(i), cw / xdp - cw / xqp);
        b.add(sEd(i), rw, L.vq(i), cw / xqp);

        b.c0(L.eq(i), L.eq(i), -d.x_d / (xdp * d.T_d0_prime));
        b.c0(L.eq(i), L.vq(i), (d.x_d - xdp) / (xdp * d.T_d0_prime));
        b.c0(L.ed(i), L.ed(i), -d.x_q / (xqp * d.T_q0_prime));
        b.c0(L.ed(i), L.vd(i), (d.x_q - xqp) / (xqp * d.T_q0_prime));

        // generator injection into the bus balance rows
        const auto rp = L.row_p(k), rq = L.row_q(k);
        b.add(sVd(i), rp, L.eq(i), 1.0 / xdp);
        b.add(sVq(i), rp, L.ed(i), -1.0 / xqp);
        b.add(sEq(i), rp, L.vd(i), 1.0 / xdp);
        b.add(sVq(i), rp, L.vd(i), -1.0 / xdp + 1.0 / xqp);
        b.add(sVd(i), rp, L.vq(i), -1.0 / xdp + 1.0 / xqp);
        b.add(sEd(i), rp, L.vq(i), -1.0 / xqp);

        b.add(sVq(i), rq, L.eq(i), 1.0 / xdp);
        b.add(sVd(i), rq, L.ed(i), 1.0 / xqp);
        b.add(sVd(i), rq, L.vd(i), -2.0 / xqp);
        b.add(sEd(i), rq, L.vd(i), 1.0 / xqp);
        b.add(sEq(i), rq, L.vq(i), 1.0 / xdp);
        b.add(sVq(i), rq, L.vq(i), -2.0 / xdp);

        // Park rows; the angle column uses the Park identities themselves
        const auto pd = L.row_park_d(i), pq = L.row_park_q(i);
        b.c0(pd, L.vd(i), 1.0);
        b.add(sU(i), pd, L.vx(k), -1.0);
        b.add(sV(i), pd, L.vy(k), 1.0);
        b.add(sVq(i), pd, L.delta(i), -1.0);
        b.c0(pq, L.vq(i), 1.0);
        b.add(sV(i), pq, L.vx(k), -1.0);
        b.add(sU(i), pq, L.vy(k), -1.0);
        b.add(sVd(i), pq, L.delta(i), 1.0);
    }

    // network rows: d(X^T Yk X)/dX = 2 Yk X
    for (std::size_t k = 0; k < nb; ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            const SpMat& Yk = pass == 0 ? net.Yk[k] : net.Yk_bar[k];
            const auto row = pass == 0 ? L.row_p(k) : L.row_q(k);
            for (int col = 0; col < Yk.outerSize(); ++col)
                for (SpMat::InnerIterator it(Yk, col); it; ++it) {
                    // entry (j, l): column j of the row depends on X_l
                    const auto j = static_cast<std::size_t>(it.row());
                    const auto l = static_cast<std::size_t>(it.col());
                    const std::size_t zcol = j < nb ? L.vx(j) : L.vy(j - nb);
                    const std::size_t slot = l < nb ? sVx(l) : sVy(l - nb);
                    b.add(slot, row, zcol, -2.0 * it.value());
                }
        }
    }

    JacobianAffine ja;
    ja.layout = L;
    ja.J0 = b.J0;
    ja.E = Eigen::VectorXd::Zero(N);
    ja.E.head(L.n()).setOnes();
    auto push = [&](JParam kind, std::size_t idx, std::size_t slot) {
        SpMat Jk(N, N);
        Jk.setFromTriplets(b.trips[slot].begin(), b.trips[slot].end());
        ja.terms.push_back({kind, idx, std::move(Jk)});
    };
    for (std::size_t k = 0; k < nb; ++k) push(JParam::Vx, k, sVx(k));
    for (std::size_t k = 0; k < nb; ++k) push(JParam::Vy, k, sVy(k));
    for (std::size_t i = 0; i < ng; ++i) push(JParam::Vd, i, sVd(i));
    for (std::size_t i = 0; i < ng; ++i) push(JParam::Vq, i, sVq(i));
    for (std::size_t i = 0; i < ng; ++i) push(JParam::U, i, sU(i));
    for (std::size_t i = 0; i < ng; ++i) push(JParam::V, i, sV(i));
    for (std::size_t i = 0; i < ng; ++i) push(JParam::Eq, i, sEq(i));
    for (std::size_t i = 0; i < ng; ++i) push(JParam::Ed, i, sEd(i));
    return ja;
}

Eigen::MatrixXd JacobianAffine::evaluate(const Eigen::VectorXd& p) const
{
    if (p.size() != static_cast<Eigen::Index>(terms.size()))
        throw std::invalid_argument("JacobianAffine::evaluate: parameter size mismatch");
    Eigen::MatrixXd J = J0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        if (p(t) == 0.0) continue;
        const SpMat& Jk = terms[t].Jk;
        for (int col = 0; col < Jk.outerSize(); ++col)
            for (SpMat::InnerIterator it(Jk, col); it; ++it) J(it.row(), it.col()) += p(t) * it.value();
    }
    return J;
}

Eigen::VectorXd JacobianAffine::params_of(const DynamicState& st) const
{
    Eigen::VectorXd p(terms.size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto i = terms[t].index;
        switch (terms[t].kind) {
        case JParam::Vx: p(t) = st.Vx(i); break;
        case JParam::Vy: p(t) = st.Vy(i); break;
        case JParam::Vd: p(t) = st.Vd(i); break;
        case JParam::Vq: p(t) = st.Vq(i); break;
        case JParam::U: p(t) = std::sin(st.delta(i)); break;
        case JParam::V: p(t) = std::cos(st.delta(i)); break;
        case JParam::Eq: p(t) = st.Eq(i); break;
        case JParam::Ed: p(t) = st.Ed(i); break;
        }
    }
    return p;
}

Eigen::MatrixXd build_jacobian(const JacobianAffine& ja, const DynamicState& st)
{
    return ja.evaluate(ja.params_of(st));
}

Eigen::MatrixXd finite_difference_jacobian(const CaseSystem& c, const NetworkMatrices& net,
                                           const DynamicState& st, double h)
{
    const DaeLayout L(c);
    const Eigen::VectorXd z0 = st.z(L);
    const auto N = z0.size();
    Eigen::MatrixXd J(N, N);
    for (Eigen::Index k = 0; k < N; ++k) {
        Eigen::VectorXd zp = z0, zm = z0;
        zp(k) += h;
        zm(k) -= h;
        J.col(k) = (dae_residual(c, net, st, zp) - dae_residual(c, net, st, zm)) / (2 * h);
    }
    return J;
}

}  // namespace cscopf
