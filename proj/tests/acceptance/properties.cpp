#include "properties.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "cscopf/recovery.hpp"

namespace cscopf::acceptance {

namespace {

Eigen::MatrixXd randn(int r, int c, std::mt19937& rng, double s = 1.0)
{
    std::normal_distribution<double> nd(0.0, s);
    return Eigen::MatrixXd::NullaryExpr(r, c, [&]() { return nd(rng); });
}

double min_eig(const Eigen::MatrixXd& S)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

}  // namespace

Check schur_equivalence(int instances)
{
    std::mt19937 rng(101);
    int agree = 0, holds = 0;
    for (int t = 0; t < instances; ++t) {
        const int n = 3 + t % 4, m = 1 + t % 3;
        Eigen::MatrixXd Y = randn(m, n, rng);
        Eigen::MatrixXd F = randn(n, n, rng, 0.3);
        Eigen::MatrixXd X = t % 2 ? Eigen::MatrixXd(0.7 * Y.transpose() * Y)
                                  : Eigen::MatrixXd(Y.transpose() * Y + F * F.transpose());
        Eigen::MatrixXd S(n + m, n + m);
        S << X, Y.transpose(), Y, Eigen::MatrixXd::Identity(m, m);
        const bool lhs = min_eig(X - Y.transpose() * Y) >= -1e-8;
        const bool rhs = min_eig(S) >= -1e-8;
        agree += lhs == rhs;
        holds += lhs;
    }
    return {agree == instances && holds > 0 && holds < instances,
            std::to_string(agree) + "/" + std::to_string(instances) + " agree (" + std::to_string(holds) + " feasible)"};
}

Check trace_bound(int pairs)
{
    std::mt19937 rng(102);
    double worst = -INFINITY;
    for (int t = 0; t < pairs; ++t) {
        const int N = 2 + t % 9;
        Eigen::MatrixXd Z = randn(N, N, rng), J = randn(N, N, rng);
        worst = std::max(worst, lyapunov_form(J, Z).trace() - (Z + J).squaredNorm());
    }
    return {worst <= 1e-10, "max Tr F - |Z+J|^2 = " + fmt(worst)};
}

Check mccormick_containment(int samples)
{
    std::mt19937 rng(103);
    const LinExpr a = LinExpr::var(0), b = LinExpr::var(1), w = LinExpr::var(2);
    const Interval boxes[][2] = {{{-1.0, 1.0}, {-1.0, 1.0}},
                                 {{-1.25, 0.5}, {0.75, 1.5}},
                                 {{0.0, 2.0}, {-3.0, -0.5}},
                                 {{-1.1, 1.1}, {-1.0, 1.0}}};
    int violations = 0, corner_misses = 0, envelopes = 0;
    for (const auto& box : boxes) {
        ++envelopes;
        const Interval A = box[0], B = box[1];
        const auto rows = mccormick_envelope(a, A, b, B, w);
        std::uniform_real_distribution<double> ua(A.lo, A.hi), ub(B.lo, B.hi);
        for (int s = 0; s < samples; ++s) {
            Eigen::Vector3d x(ua(rng), ub(rng), 0.0);
            x(2) = x(0) * x(1);
            for (const auto& r : rows) violations += r.eval(x) < -1e-14;
        }
        for (double ca : {A.lo, A.hi})
            for (double cb : {B.lo, B.hi}) {
                // two of the four rows are active at each corner with w = a b
                Eigen::Vector3d x(ca, cb, ca * cb);
                int active = 0;
                for (const auto& r : rows) {
                    const double v = r.eval(x);
                    violations += v < 0;
                    active += v == 0.0;
                }
                corner_misses += active < 2;
            }
    }
    return {violations == 0 && corner_misses == 0,
            std::to_string(envelopes) + " envelopes x " + std::to_string(samples) + " samples, " +
                std::to_string(violations) + " violations, " + std::to_string(corner_misses) + " inexact corners"};
}

Check trace_power_flow(const std::string& case_dir)
{
    std::mt19937 rng(104);
    double worst = 0;
    for (const char* name : {"/wscc9.json", "/ne39.json"}) {
        auto c = add_transformer_resistance(load_case(case_dir + name));
        auto net = build_matrices(c);
        std::uniform_real_distribution<double> mag(0.9, 1.1), ang(-0.5, 0.5);
        for (int t = 0; t < 5; ++t) {
            Eigen::VectorXcd V(c.nb());
            for (std::size_t k = 0; k < c.nb(); ++k) V(k) = std::polar(mag(rng), ang(rng));
            const Eigen::VectorXd X = to_real(V);
            const auto S = bus_injections(net.Y, V);
            for (std::size_t k = 0; k < c.nb(); ++k) {
                worst = std::max(worst, std::abs(quad(net.Yk[k], X) - S(k).real()));
                worst = std::max(worst, std::abs(quad(net.Yk_bar[k], X) - S(k).imag()));
                worst = std::max(worst, std::abs(quad(net.Mk[k], X) - std::norm(V(k))));
            }
            for (const auto& f : net.flows) {
                const cplx s = branch_flow(net.branch_y[f.branch], f.from_side, V);
                worst = std::max({worst, std::abs(quad(f.Ykl, X) - s.real()), std::abs(quad(f.Ykl_bar, X) - s.imag())});
            }
        }
    }
    return {worst <= 1e-9, "max |trace - direct| = " + fmt(worst)};
}

Check jacobian_finite_difference(const std::string& case_dir)
{
    std::mt19937 rng(105);
    double worst = 0;
    for (const char* name : {"/wscc9.json", "/ne39.json"}) {
        auto c = add_transformer_resistance(load_case(case_dir + name));
        auto net = build_matrices(c);
        std::uniform_real_distribution<double> mag(0.97, 1.03), ang(-0.15, 0.15);
        Eigen::VectorXcd V(c.nb());
        for (std::size_t k = 0; k < c.nb(); ++k) V(k) = std::polar(mag(rng), k == c.slack_pos() ? 0.0 : ang(rng));
        const auto S = bus_injections(net.Y, V);
        Eigen::VectorXd Pg(c.ng()), Qg(c.ng());
        for (std::size_t g = 0; g < c.ng(); ++g) {
            const auto k = c.gen_bus_pos(g);
            Pg(g) = S(k).real() + c.buses[k].P_d;
            Qg(g) = S(k).imag() + c.buses[k].Q_d;
        }
        const auto st = init_operating_point(c, V, Pg, Qg);
        const auto ja = build_jacobian_affine(c, net);
        const Eigen::MatrixXd J = build_jacobian(ja, st);
        const Eigen::MatrixXd Jfd = finite_difference_jacobian(c, net, st, 1e-6);
        for (Eigen::Index i = 0; i < J.rows(); ++i)
            for (Eigen::Index j = 0; j < J.cols(); ++j)
                worst = std::max(worst, std::abs(J(i, j) - Jfd(i, j)) / std::max(1.0, std::abs(Jfd(i, j))));
    }
    return {worst <= 1e-6, "max relative error " + fmt(worst)};
}

Check lyapunov_sufficiency(int instances)
{
    std::mt19937 rng(106);
    const int n = 3, N = 5;
    int certified = 0, refused = 0, counterexamples = 0;
    SolveSettings s;
    s.tol = 1e-8;
    for (int t = 0; t < instances; ++t) {
        Eigen::MatrixXd Jn = randn(N, N, rng);
        Jn.topLeftCorner(n, n) -= (t % 3) * Eigen::MatrixXd::Identity(n, n);
        Jn.bottomRightCorner(N - n, N - n) -= 2.0 * Eigen::MatrixXd::Identity(N - n, N - n);
        ConicProgram p;
        const auto J = constant_jacobian(Jn, n);
        const auto lv = build_bmi_blocks(p, J, StabilityMode::Constraint, BmiOptions{1.0, false});
        const auto r = solve_program(p, s);
        if (r.status != SolveStatus::Optimal) {
            ++refused;
            continue;
        }
        const Eigen::MatrixXd Z = lv.Z_eval(r.x);
        const bool certificate = -min_eig(-lyapunov_form(Jn, Z)) <= 1e-8 && min_eig(Z.topLeftCorner(n, n)) >= 1.0 - 1e-8;
        if (!certificate) continue;
        ++certified;
        counterexamples += spectral_abscissa(reduced_jacobian(Jn, n)).sigma_max >= 0;
    }
    return {counterexamples == 0 && certified > 0,
            std::to_string(certified) + " certified, " + std::to_string(refused) + " without certificate, " +
                std::to_string(counterexamples) + " certified but not Hurwitz"};
}

Check rank_one_oracle(int instances)
{
    std::mt19937 rng(107);
    double worst = 0;
    for (int t = 0; t < instances; ++t) {
        const int n = 4 + t % 5;
        Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(randn(n, n, rng)).householderQ();
        Eigen::VectorXd lam = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0).array().square();
        lam(n - 1) = 3.0 + t;
        const Eigen::MatrixXd W = Q * lam.asDiagonal() * Q.transpose();
        const auto r = rank_one_decompose(W, 0);
        Eigen::VectorXd q = Q.col(n - 1);
        if (q(0) < 0) q = -q;
        worst = std::max({worst, (r.x - std::sqrt(lam(n - 1)) * q).norm(),
                          std::abs(r.eps - lam(n - 2) / lam(n - 1))});
    }
    return {worst <= 1e-9, "max deviation from the constructed factor " + fmt(worst)};
}

}  // namespace cscopf::acceptance
