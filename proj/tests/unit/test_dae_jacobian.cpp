#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "cscopf/dae.hpp"

using namespace cscopf;

namespace {

const std::string kCases = CSCOPF_CASE_DIR;

// voltages from a perturbed flat start; generator outputs chosen so the terminal
// conditions are consistent with the network at the generator buses
struct Point {
    CaseSystem c;
    NetworkMatrices net;
    Eigen::VectorXcd V;
    Eigen::VectorXd Pg, Qg;
    DynamicState st;
};

Point make_point(const std::string& file, unsigned seed)
{
    Point p;
    p.c = add_transformer_resistance(load_case(kCases + file));
    p.net = build_matrices(p.c);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> mag(0.97, 1.03), ang(-0.15, 0.15);
    p.V.resize(p.c.nb());
    for (std::size_t k = 0; k < p.c.nb(); ++k) p.V(k) = std::polar(mag(rng), k == p.c.slack_pos() ? 0.0 : ang(rng));
    const auto S = bus_injections(p.net.Y, p.V);
    p.Pg.resize(p.c.ng());
    p.Qg.resize(p.c.ng());
    for (std::size_t g = 0; g < p.c.ng(); ++g) {
        const auto k = p.c.gen_bus_pos(g);
        p.Pg(g) = S(k).real() + p.c.buses[k].P_d;
        p.Qg(g) = S(k).imag() + p.c.buses[k].Q_d;
    }
    p.st = init_operating_point(p.c, p.V, p.Pg, p.Qg);
    return p;
}

double rel_err(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    double worst = 0;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            worst = std::max(worst, std::abs(A(i, j) - B(i, j)) / std::max(1.0, std::abs(B(i, j))));
    return worst;
}

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v)
{
    std::sort(v.begin(), v.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

}  // namespace

TEST_CASE("layout sizes")
{
    auto c = load_case(kCases + "/wscc9.json");
    DaeLayout L(c);
    CHECK(L.n() == 12);
    CHECK(L.size() == 36);
    auto ja = build_jacobian_affine(c, build_matrices(c));
    CHECK(ja.E.size() == 36);
    CHECK(ja.E.sum() == 12);
    CHECK(ja.E.head(12).minCoeff() == 1.0);
    CHECK(ja.E.cwiseProduct(ja.E) == ja.E);
}

TEST_CASE("equilibrium satisfies the stator relations and the Park identity")
{
    for (const char* f : {"/wscc9.json", "/ne39.json"}) {
        auto p = make_point(f, 3);
        for (const auto& r : stator_residual(p.c, p.st, p.Pg, p.Qg)) {
            CHECK(std::abs(r.a) <= 1e-8);
            CHECK(std::abs(r.b) <= 1e-8);
        }
        for (std::size_t i = 0; i < p.c.ng(); ++i) {
            const auto k = p.c.gen_bus_pos(i);
            CHECK(std::abs(p.st.Vd(i) * p.st.Vd(i) + p.st.Vq(i) * p.st.Vq(i) - std::norm(p.V(k))) <= 1e-12);
            CHECK(p.st.omega(i) == 0.0);
            CHECK(p.st.Pm(i) == doctest::Approx(p.Pg(i)));
        }
        // dynamic rows vanish at the equilibrium
        const DaeLayout L(p.c);
        Eigen::VectorXd F = dae_residual(p.c, p.net, p.st, p.st.z(L));
        CHECK(F.head(L.n()).cwiseAbs().maxCoeff() <= 1e-9);
        for (std::size_t i = 0; i < p.c.ng(); ++i) {
            CHECK(std::abs(F(L.row_park_d(i))) <= 1e-12);
            CHECK(std::abs(F(L.row_park_q(i))) <= 1e-12);
        }
    }
}

TEST_CASE("analytic Jacobian matches finite differences on both cases")
{
    for (const char* f : {"/wscc9.json", "/ne39.json"}) {
        auto p = make_point(f, 11);
        auto ja = build_jacobian_affine(p.c, p.net);
        Eigen::MatrixXd J = build_jacobian(ja, p.st);
        Eigen::MatrixXd Jfd = finite_difference_jacobian(p.c, p.net, p.st, 1e-6);
        CAPTURE(f);
        CHECK(rel_err(J, Jfd) <= 1e-6);
    }
}

TEST_CASE("Jacobian is affine in its parameters")
{
    auto p = make_point("/wscc9.json", 5);
    auto ja = build_jacobian_affine(p.c, p.net);
    std::mt19937 rng(1);
    std::normal_distribution<double> nd;
    Eigen::VectorXd p0 = ja.params_of(p.st);
    Eigen::VectorXd dp = p0.unaryExpr([&](double) { return 0.1 * nd(rng); });
    Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(ja.J0.rows(), ja.J0.cols());
    for (std::size_t t = 0; t < ja.terms.size(); ++t) lin += dp(t) * Eigen::MatrixXd(ja.terms[t].Jk);
    CHECK(((ja.evaluate(p0 + dp) - ja.evaluate(p0)) - lin).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zeroing the algebraic dependence on states gives C = 0 and J_r = A")
{
    auto p = make_point("/wscc9.json", 5);
    auto ja = build_jacobian_affine(p.c, p.net);
    Eigen::MatrixXd J = build_jacobian(ja, p.st);
    const auto n = ja.n();
    J.bottomLeftCorner(J.rows() - n, n).setZero();
    auto blk = split_blocks(J, n);
    CHECK(blk.C.norm() == 0.0);
    CHECK((reduced_jacobian(J, n) - blk.A).norm() == 0.0);
}

TEST_CASE("reduced Jacobian eigenvalues equal the finite generalized eigenvalues of (J, E)")
{
    std::mt19937 rng(42);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5, m = 4, N = n + m;
        Eigen::MatrixXd J = Eigen::MatrixXd::NullaryExpr(N, N, [&]() { return nd(rng); });
        J.bottomRightCorner(m, m) += 5.0 * Eigen::MatrixXd::Identity(m, m);
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(N, N);
        E.topLeftCorner(n, n).setIdentity();

        Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(J, E);
        std::vector<std::complex<double>> gen;
        for (Eigen::Index i = 0; i < N; ++i)
            if (std::abs(ges.betas()(i)) > 1e-10) gen.push_back(ges.alphas()(i) / ges.betas()(i));
        auto red = spectral_abscissa(reduced_jacobian(J, n)).eigenvalues;
        REQUIRE(gen.size() == red.size());
        auto a = sorted(gen), b = sorted(red);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8 * std::max(1.0, std::abs(a[i])));
    }
}

TEST_CASE("singular algebraic block is reported")
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(4, 4);
    J.bottomRightCorner(2, 2).setZero();
    CHECK_THROWS_AS(reduced_jacobian(J, 2), SingularityError);
}

TEST_CASE("spectral abscissa examples")
{
    Eigen::MatrixXd A(2, 2);
    A << -1, 0, 0, -2;
    auto s = spectral_abscissa(A);
    CHECK(s.sigma_max == doctest::Approx(-1.0));
    CHECK(s.n_rhp == 0);

    A << 0, 1, -1, 0;
    s = spectral_abscissa(A);
    CHECK(std::abs(s.sigma_max) <= 1e-14);
    CHECK(s.n_rhp == 0);

    A << 1, 5, 0, 2;
    s = spectral_abscissa(A);
    CHECK(s.sigma_max == doctest::Approx(2.0));
    CHECK(s.n_rhp == 2);
}

TEST_CASE("angle reference removes exactly the rigid rotation")
{
    auto p = make_point("/wscc9.json", 9);
    auto ja = build_jacobian_affine(p.c, p.net);
    Eigen::MatrixXd Jr = reduced_jacobian(build_jacobian(ja, p.st), ja.n());
    auto full = spectral_abscissa(Jr).eigenvalues;
    auto ref = spectral_abscissa(angle_referenced(Jr, p.c.ng())).eigenvalues;
    REQUIRE(ref.size() + 1 == full.size());
    // the dropped eigenvalue is the zero one
    auto near_zero = std::min_element(full.begin(), full.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
    CHECK(std::abs(*near_zero) <= 1e-8);
    full.erase(near_zero);
    auto a = sorted(full), b = sorted(ref);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-7 * std::max(1.0, std::abs(a[i])));
}
