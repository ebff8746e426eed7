#include "cscopf/network.hpp"

namespace cscopf {

std::vector<BranchAdmittance> branch_admittances(const CaseSystem& c)
{
    std::vector<BranchAdmittance> out;
    out.reserve(c.nl());
    for (const auto& br : c.branches) {
        BranchAdmittance a;
        a.f = c.bus_pos(br.from);
        a.t = c.bus_pos(br.to);
        const cplx ys = 1.0 / cplx(br.r, br.x);
        const cplx ytt = ys + cplx(0, br.b_charging / 2);
        a.ytt = ytt;
        a.yff = ytt / (br.tap * br.tap);
        a.yft = -ys / br.tap;
        a.ytf = -ys / br.tap;
        out.push_back(a);
    }
    return out;
}

Eigen::MatrixXcd build_ybus(const CaseSystem& c)
{
    const auto n = static_cast<Eigen::Index>(c.nb());
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& a : branch_admittances(c)) {
        Y(a.f, a.f) += a.yff;
        Y(a.f, a.t) += a.yft;
        Y(a.t, a.f) += a.ytf;
        Y(a.t, a.t) += a.ytt;
    }
    for (std::size_t k = 0; k < c.nb(); ++k) Y(k, k) += cplx(c.buses[k].G_s, c.buses[k].B_s);
    return Y;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed_hermitian_form(const Eigen::MatrixXcd& Phi)
{
    // V^H Phi V with V = Vx + j Vy, X = [Vx; Vy]
    const Eigen::Index n = Phi.rows();
    Eigen::MatrixXd Pr = Phi.real(), Pi = Phi.imag();
    Eigen::MatrixXd re(2 * n, 2 * n), im(2 * n, 2 * n);
    re << Pr, -Pi, Pi, Pr;
    im << Pi, Pr, -Pr, Pi;
    Eigen::MatrixXd res = 0.5 * (re + re.transpose());
    Eigen::MatrixXd ims = 0.5 * (im + im.transpose());
    return {res, ims};
}

namespace {

SpMat sparse_of(const Eigen::MatrixXd& M)
{
    return M.sparseView(1.0, 0.0);
}

}  // namespace

NetworkMatrices build_matrices(const CaseSystem& c)
{
    NetworkMatrices m;
    m.Y = build_ybus(c);
    m.branch_y = branch_admittances(c);
    const auto n = static_cast<Eigen::Index>(c.nb());

    // S_k = V_k conj(sum_l Y_kl V_l) = V^H Phi V with Phi(l,k) = conj(Y_kl)
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::MatrixXcd Phi = Eigen::MatrixXcd::Zero(n, n);
        Phi.col(k) = m.Y.row(k).conjugate().transpose();
        auto [re, im] = embed_hermitian_form(Phi);
        m.Yk.push_back(sparse_of(re));
        m.Yk_bar.push_back(sparse_of(im));

        SpMat M(2 * n, 2 * n);
        M.insert(k, k) = 1.0;
        M.insert(n + k, n + k) = 1.0;
        M.makeCompressed();
        m.Mk.push_back(M);
    }

    for (std::size_t l = 0; l < m.branch_y.size(); ++l) {
        const auto& a = m.branch_y[l];
        for (bool from : {true, false}) {
            const auto s = from ? a.f : a.t;
            const auto o = from ? a.t : a.f;
            const cplx yss = from ? a.yff : a.ytt;
            const cplx yso = from ? a.yft : a.ytf;
            Eigen::MatrixXcd Phi = Eigen::MatrixXcd::Zero(n, n);
            Phi(s, s) = std::conj(yss);
            Phi(o, s) = std::conj(yso);
            auto [re, im] = embed_hermitian_form(Phi);
            FlowMatrices f;
            f.branch = l;
            f.from_side = from;
            f.Ykl = sparse_of(re);
            f.Ykl_bar = sparse_of(im);
            f.S_max = c.branches[l].S_max;
            m.flows.push_back(std::move(f));
        }
    }
    return m;
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& X)
{
    const Eigen::Index n = X.size() / 2;
    Eigen::VectorXcd V(n);
    for (Eigen::Index k = 0; k < n; ++k) V(k) = cplx(X(k), X(n + k));
    return V;
}

Eigen::VectorXd to_real(const Eigen::VectorXcd& V)
{
    const Eigen::Index n = V.size();
    Eigen::VectorXd X(2 * n);
    X.head(n) = V.real();
    X.tail(n) = V.imag();
    return X;
}

double quad(const SpMat& A, const Eigen::VectorXd& X)
{
    return X.dot(A * X);
}

Eigen::VectorXcd bus_injections(const Eigen::MatrixXcd& Y, const Eigen::VectorXcd& V)
{
    Eigen::VectorXcd I = Y * V;
    return V.cwiseProduct(I.conjugate());
}

cplx branch_flow(const BranchAdmittance& b, bool from_side, const Eigen::VectorXcd& V)
{
    const auto s = from_side ? b.f : b.t;
    const auto o = from_side ? b.t : b.f;
    const cplx yss = from_side ? b.yff : b.ytt;
    const cplx yso = from_side ? b.yft : b.ytf;
    return V(s) * std::conj(yss * V(s) + yso * V(o));
}

}  // namespace cscopf
