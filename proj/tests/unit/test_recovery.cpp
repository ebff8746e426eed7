#include <cmath>
#include <random>

#include <Eigen/QR>
#include <doctest.h>

#include "cscopf/pipeline.hpp"

using namespace cscopf;

namespace {

const std::string kCases = CSCOPF_CASE_DIR;

Eigen::MatrixXd random_orthogonal(int n, std::mt19937& rng)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return nd(rng); });
    return Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
}

struct Opf9 {
    PreparedCase pc;
    OpfRun run;
};

const Opf9& opf9()
{
    static const Opf9 s = [] {
        Opf9 o{prepare_case(std::filesystem::path(kCases + "/wscc9.json")), {}};
        o.run = run_relaxed_opf(o.pc, {});
        return o;
    }();
    return s;
}

}  // namespace

TEST_CASE("rank-one decomposition on constructed spectra")
{
    std::mt19937 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 6;
        Eigen::MatrixXd Q = random_orthogonal(n, rng);
        Eigen::VectorXd lam(n);
        lam << 0, 1e-6, 1e-4, 0.01 * trial, 0.5 + 0.01 * trial, 4.0 + trial;
        Eigen::MatrixXd W = Q * lam.asDiagonal() * Q.transpose();
        auto r = rank_one_decompose(W, 2);
        CHECK(r.lambda1 == doctest::Approx(lam(5)).epsilon(1e-10));
        CHECK(r.lambda2 == doctest::Approx(lam(4)).epsilon(1e-10));
        CHECK(r.eps == doctest::Approx(lam(4) / lam(5)).epsilon(1e-10));
        CHECK(!r.degenerate);
        // x = sqrt(lambda1) q1 up to the sign fixed by x(ref) >= 0
        Eigen::VectorXd q = Q.col(5);
        if (q(2) < 0) q = -q;
        CHECK((r.x - std::sqrt(lam(5)) * q).norm() <= 1e-9);
        CHECK(r.x(2) >= 0);
    }
}

TEST_CASE("exact rank one gives eps = 0 and recovers the vector")
{
    Eigen::VectorXd v(4);
    v << 1.0, -0.2, 0.0, 0.3;
    auto r = rank_one_decompose(v * v.transpose());
    CHECK(std::abs(r.eps) <= 1e-15);
    CHECK((r.x - v).norm() <= 1e-12);
}

TEST_CASE("sign falls back to the largest entry when the reference is zero")
{
    Eigen::VectorXd v(3);
    v << 0.0, -2.0, 0.5;
    auto r = rank_one_decompose(v * v.transpose(), 0);
    CHECK(r.x(1) == doctest::Approx(2.0));
}

TEST_CASE("degenerate and non-positive spectra")
{
    CHECK(rank_one_decompose(Eigen::MatrixXd::Identity(3, 3)).degenerate);
    CHECK_THROWS_AS(rank_one_decompose(Eigen::MatrixXd::Zero(3, 3)), RecoveryError);
    CHECK_THROWS_AS(rank_one_decompose(-Eigen::MatrixXd::Identity(2, 2)), RecoveryError);
    CHECK_THROWS_AS(rank_one_decompose(Eigen::MatrixXd::Zero(2, 3)), RecoveryError);
}

TEST_CASE("verdict classification")
{
    CHECK(classify(-1e-3) == Verdict::Stable);
    CHECK(classify(1e-3) == Verdict::Unstable);
    CHECK(classify(0.0) == Verdict::Marginal);
    CHECK(classify(-1e-12) == Verdict::Marginal);
    CHECK(classify(NAN) == Verdict::Unstable);
    StabilityVerdict v;
    v.sigma_max = 0.0;
    CHECK(!v.stable());
    CHECK(std::string(to_string(v.verdict())) == "marginal");
}

TEST_CASE("verifier flags the 9-bus relaxed-OPF point as unstable")
{
    const auto& o = opf9();
    REQUIRE(o.run.verdict.has_value());
    CHECK(o.run.verdict->sigma_max > 0);
    CHECK(o.run.verdict->n_rhp >= 1);
    CHECK(!o.run.verdict->stable());
    // V and its rank-one recovery give the same verdict
    CHECK(std::abs(o.run.verdict->gap) <= 1e-4);
}

TEST_CASE("error report on the base point is zero-shift")
{
    const auto& o = opf9();
    auto e = compute_error_report(o.run.sol, o.run.sol, o.pc.c, o.run.verdict);
    CHECK(e.delta_p == doctest::Approx(0.0));
    CHECK(e.delta_ploss == doctest::Approx(0.0));
    CHECK(e.eps_w < 1e-2);
    CHECK(e.loss_mw == doctest::Approx(o.run.sol.loss_mw(o.pc.c)));
}

TEST_CASE("solution json round trip")
{
    const auto& o = opf9();
    auto j = solution_json(o.run.sol, o.pc.c, "opf");
    auto back = solution_from_json(j, o.pc.c);
    CHECK((back.V - o.run.sol.V).norm() == 0.0);
    CHECK((back.Pg - o.run.sol.Pg).norm() == 0.0);
    CHECK((back.W - o.run.sol.W).norm() == 0.0);
    CHECK(back.status == o.run.sol.status);
    auto v1 = verify_stability(o.pc.c, o.pc.net, o.pc.ja, back);
    CHECK(v1.sigma_max == doctest::Approx(o.run.verdict->sigma_max).epsilon(1e-12));
}

TEST_CASE("foreign or stale solution files are rejected")
{
    const auto& o = opf9();
    auto j = solution_json(o.run.sol, o.pc.c);
    auto stale = j;
    stale["version"] = kSolutionVersion + 1;
    CHECK_THROWS_AS(solution_from_json(stale, o.pc.c), SolutionFormatError);
    auto other = j;
    other["format"] = "something-else";
    CHECK_THROWS_AS(solution_from_json(other, o.pc.c), SolutionFormatError);
    auto c39 = load_case(kCases + "/ne39.json");
    CHECK_THROWS_AS(solution_from_json(j, c39), SolutionFormatError);
    auto broken = j;
    broken["V"] = "nope";
    CHECK_THROWS_AS(solution_from_json(broken, o.pc.c), SolutionFormatError);
}

TEST_CASE("report row formats")
{
    ReportRow r;
    r.case_name = "wscc9";
    r.command = "opf";
    r.mode = "none";
    r.status = "optimal";
    const auto header = report_csv_header();
    const auto line = report_csv_line(r);
    auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    CHECK(commas(header) == commas(line));
    CHECK(header.rfind("case,command,mode,gamma1", 0) == 0);
    auto j = report_json(r);
    CHECK(j["case"] == "wscc9");
}
