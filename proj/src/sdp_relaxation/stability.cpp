#include <functional>
#include <sstream>
#include <stdexcept>

#include "cscopf/stability.hpp"

namespace cscopf {

const char* to_string(StabilityMode m)
{
    switch (m) {
    case StabilityMode::PenaltyOnly: return "penalty-only";
    case StabilityMode::Constraint: return "constraint";
    case StabilityMode::Zeta: return "zeta";
    }
    return "?";
}

StabilityMode parse_stability_mode(const std::string& s)
{
    if (s == "penalty-only" || s == "penalty") return StabilityMode::PenaltyOnly;
    if (s == "constraint") return StabilityMode::Constraint;
    if (s == "zeta") return StabilityMode::Zeta;
    throw std::invalid_argument("unknown stability mode '" + s + "'");
}

bool JacobianExpr::is_constant() const
{
    for (const auto& x : e)
        if (!x.is_constant()) return false;
    return true;
}

Eigen::MatrixXd JacobianExpr::eval(const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd J(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) J(i, j) = (*this)(i, j).eval(x);
    return J;
}

JacobianExpr constant_jacobian(const Eigen::MatrixXd& J, int n)
{
    if (J.rows() != J.cols() || n < 0 || n > J.rows()) throw BuildError("Jacobian must be square with n <= N");
    JacobianExpr out;
    out.n = n;
    out.N = static_cast<int>(J.rows());
    out.e.reserve(static_cast<std::size_t>(out.N) * out.N);
    for (int j = 0; j < out.N; ++j)
        for (int i = 0; i < out.N; ++i) out.e.emplace_back(J(i, j));
    return out;
}

JacobianInProgram jacobian_in_program(const JacobianAffine& ja, const CaseSystem& c, const OpfVars& opf,
                                      const StatorVars& st, const ParkVars& park, const Eigen::VectorXd& Ef)
{
    const auto& L = ja.layout;
    if (L.nb != opf.nb || L.ng != st.ng || L.ng != c.ng() || Ef.size() != static_cast<Eigen::Index>(L.ng))
        throw BuildError("Jacobian layout does not match the program");
    const int nb = static_cast<int>(L.nb), ng = static_cast<int>(L.ng);

    JacobianInProgram out;
    out.J = constant_jacobian(ja.J0, static_cast<int>(L.n()));

    for (const auto& t : ja.terms) {
        const int i = static_cast<int>(t.index);
        JacobianAuditRow row;
        row.param = std::string(to_string(t.kind)) + "[" + std::to_string(i) + "]";
        LinExpr pe;
        std::ostringstream os;
        switch (t.kind) {
        case JParam::Vx:
            pe = opf.V(i);
            os << "V[" << i << "]";
            row.kind = "variable";
            break;
        case JParam::Vy:
            pe = opf.V(nb + i);
            os << "V[" << nb + i << "]";
            row.kind = "variable";
            if (i == static_cast<int>(opf.slack)) row.note = "angle reference, pinned to 0";
            break;
        case JParam::Vd:
            pe = st.Vdq(i);
            os << "Vdq[" << i << "]";
            row.kind = "variable";
            break;
        case JParam::Vq:
            pe = st.Vdq(ng + i);
            os << "Vdq[" << ng + i << "]";
            row.kind = "variable";
            break;
        case JParam::U:
            pe = park.u(i);
            os << "u[" << i << "]";
            row.kind = "variable";
            row.note = "sin(delta) through the trig relaxation";
            break;
        case JParam::V:
            pe = park.v(i);
            os << "v[" << i << "]";
            row.kind = "variable";
            row.note = "cos(delta) through the trig relaxation";
            break;
        case JParam::Eq: {
            const auto& d = c.generators[i].dyn;
            const double a = Ef(i) * d.x_d_prime / d.x_d, b = (d.x_d - d.x_d_prime) / d.x_d;
            pe = a + b * st.Vdq(ng + i);
            os << a << " + " << b << " Vdq[" << ng + i << "]";
            row.kind = "affine";
            row.note = "steady-state Eq' with Ef fixed at the base";
            break;
        }
        case JParam::Ed: {
            const auto& d = c.generators[i].dyn;
            const double b = (d.x_q - d.x_q_prime) / d.x_q;
            pe = b * st.Vdq(i);
            os << b << " Vdq[" << i << "]";
            row.kind = "affine";
            row.note = "steady-state Ed'";
            break;
        }
        }
        row.maps_to = os.str();
        for (int col = 0; col < t.Jk.outerSize(); ++col)
            for (SpMat::InnerIterator it(t.Jk, col); it; ++it) {
                out.J(static_cast<int>(it.row()), static_cast<int>(it.col())) += it.value() * pe;
                ++row.entries;
            }
        out.audit.push_back(std::move(row));
    }
    for (auto& x : out.J.e) x.compress();
    return out;
}

std::string audit_table_csv(const std::vector<JacobianAuditRow>& rows)
{
    std::ostringstream os;
    os << "param,maps_to,kind,exact,entries,note\n";
    for (const auto& r : rows)
        os << r.param << ',' << '"' << r.maps_to << '"' << ',' << r.kind << ',' << (r.exact ? "yes" : "no") << ','
           << r.entries << ',' << '"' << r.note << '"' << '\n';
    return os.str();
}

LinExpr LyapunovVars::Z(int i, int j) const
{
    if (i < n) return j < n ? P(i, j) : LinExpr{};
    if (implied_rq) return -(*J)(i, j);
    return j < n ? R(i - n, j) : Q(i - n, j - n);
}

Eigen::MatrixXd LyapunovVars::Z_eval(const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd Zm(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) Zm(i, j) = Z(i, j).eval(x);
    return Zm;
}

Eigen::MatrixXd lyapunov_form(const Eigen::MatrixXd& J, const Eigen::MatrixXd& Z)
{
    return J.transpose() * Z + Z.transpose() * J;
}

LyapunovVars build_bmi_blocks(ConicProgram& p, const JacobianExpr& J, StabilityMode mode, const BmiOptions& opt)
{
    if (J.N <= 0 || static_cast<std::size_t>(J.N) * J.N != J.e.size() || J.n <= 0 || J.n > J.N)
        throw BuildError("Jacobian expression has inconsistent dimensions");
    for (const auto& e : J.e)
        for (auto [k, a] : e.terms)
            if (k < 0 || k >= p.num_vars()) throw BuildError("Jacobian refers to variables outside the program");

    const int n = J.n, N = J.N, m = N - n;
    LyapunovVars lv;
    lv.n = n;
    lv.N = N;
    lv.J = &J;
    lv.P = p.add_symmetric("P", n);
    lv.implied_rq = mode == StabilityMode::PenaltyOnly && opt.implied_rq;
    if (!lv.implied_rq) {
        lv.R = p.add_matrix("R", m, n);
        lv.Q = p.add_matrix("Q", m, m);
    }
    p.add_psd(n, [&](int i, int j) { return lv.P(i, j) - (i == j ? opt.eps : 0.0); }, "P_pos");
    if (mode == StabilityMode::PenaltyOnly) return lv;

    lv.M = p.add_symmetric("M", N);
    lv.has_M = true;

    // L1 = [[M, (J+Z)'], [J+Z, I]]
    p.add_psd(
        2 * N,
        [&](int i, int j) -> LinExpr {
            if (i < N) return lv.M(i, j);
            if (j < N) return J(i - N, j) + lv.Z(i - N, j);
            return i == j ? 1.0 : 0.0;
        },
        "L1");
    // L2 = [[M, Z', J'], [Z, I, 0], [J, 0, I]]
    p.add_psd(
        3 * N,
        [&](int i, int j) -> LinExpr {
            if (i < N) return lv.M(i, j);
            if (j < N) return i < 2 * N ? lv.Z(i - N, j) : J(i - 2 * N, j);
            return i == j ? 1.0 : 0.0;
        },
        "L2");

    if (J.is_constant()) {
        // -(J'Z + Z'J) >= 0, linear in Z once J is numeric
        const Eigen::MatrixXd Jn = J.eval(Eigen::VectorXd::Zero(p.num_vars()));
        p.add_psd(
            N,
            [&](int i, int j) {
                LinExpr s;
                for (int k = 0; k < N; ++k) {
                    if (Jn(k, i) != 0.0) s -= Jn(k, i) * lv.Z(k, j);
                    if (Jn(k, j) != 0.0) s -= Jn(k, j) * lv.Z(k, i);
                }
                return s.compress();
            },
            "lyapunov_F");
    }
    return lv;
}

VarBlock add_max_eigen_epigraph(ConicProgram& p, int order, const std::function<LinExpr(int, int)>& entry,
                                double weight, const std::string& tag)
{
    const VarBlock zeta = p.add_scalar(tag);
    p.add_psd(
        order,
        [&](int i, int j) {
            LinExpr out = -entry(i, j);
            if (i == j) out += zeta(0);
            return out;
        },
        tag + "_lmax");
    p.add_objective(weight * zeta(0));
    return zeta;
}

VarBlock build_zeta_variant(ConicProgram& p, const LyapunovVars& lv, const JacobianExpr& J, StabilityMode mode,
                            double weight)
{
    if (mode == StabilityMode::PenaltyOnly || !lv.has_M)
        throw BuildError("the zeta variant needs the L2 block (constraint or zeta mode)");
    const int N = lv.N;
    return add_max_eigen_epigraph(
        p, 3 * N,
        [&](int i, int j) -> LinExpr {
            if (i < N) return lv.M(i, j);
            if (j < N) return i < 2 * N ? lv.Z(i - N, j) : J(i - 2 * N, j);
            return i == j ? 1.0 : 0.0;
        },
        weight, "zeta");
}

}  // namespace cscopf
