#include <cmath>

#include <doctest.h>

#include "cscopf/solver.hpp"

using namespace cscopf;

namespace {

RawSolution run(const ConicProgram& p, double tol = 1e-8)
{
    SolveSettings s;
    s.tol = tol;
    return solve_program(p, s);
}

}  // namespace

TEST_CASE("trace minimisation over X >= I")
{
    ConicProgram p;
    auto X = p.add_symmetric("X", 2);
    p.add_objective(X(0, 0) + X(1, 1));
    p.add_psd(2, [&](int i, int j) { return X(i, j) - (i == j ? 1.0 : 0.0); }, "X-I");
    auto r = run(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_objective == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(r.res.verified <= 1e-7);
}

TEST_CASE("largest eigenvalue as an SDP")
{
    ConicProgram p;
    auto z = p.add_scalar("zeta");
    p.add_objective(z(0));
    const double d[2] = {3.0, -1.0};
    p.add_psd(2, [&](int i, int j) { return i == j ? z(0) - d[i] : LinExpr(0.0); }, "zeta I - M");
    auto r = run(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("two by two max cut")
{
    ConicProgram p;
    auto X = p.add_symmetric("X", 2);
    p.add_objective(2.0 * X(1, 0));
    p.add_eq(X(0, 0) - 1.0, "d0");
    p.add_eq(X(1, 1) - 1.0, "d1");
    p.add_psd(2, [&](int i, int j) { return X(i, j); }, "X");
    auto r = run(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_objective == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("linear program")
{
    ConicProgram p;
    auto v = p.add_vector("v", 2);
    p.add_objective(-v(0) - 2.0 * v(1));
    p.add_ge(v(0), "x>=0");
    p.add_ge(v(1), "y>=0");
    p.add_le(v(0) + v(1), 1.0, "sum");
    p.add_le(v(1), 0.75, "ycap");
    auto r = run(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_objective == doctest::Approx(-1.75).epsilon(1e-7));
    CHECK(r.x(1) == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("second order cone")
{
    ConicProgram p;
    auto v = p.add_vector("v", 2);
    p.add_objective(v(0) + v(1));
    p.add_soc({1.0, v(0), v(1)}, "disk");
    auto r = run(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("quadratic cost through a rotated cone with an equality")
{
    ConicProgram p;
    auto v = p.add_vector("v", 3);  // x, y, t
    p.add_objective(v(2));
    p.add_rotated_soc(v(2), 1.0, v(0), "t>=x^2");
    p.add_eq(v(0) + v(1) - 2.0, "x+y=2");
    p.add_le(v(1), 0.5, "y<=0.5");
    auto r = run(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.primal_objective == doctest::Approx(2.25).epsilon(1e-7));
}

TEST_CASE("infeasibility is a typed result")
{
    ConicProgram p;
    auto v = p.add_scalar("x");
    p.add_objective(v(0));
    p.add_ge(v(0) - 1.0, "x>=1");
    p.add_le(v(0), 0.0, "x<=0");
    RawSolution r;
    CHECK_NOTHROW(r = run(p));
    CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("infeasible PSD program")
{
    ConicProgram p;
    auto X = p.add_symmetric("X", 2);
    p.add_objective(X(0, 0));
    p.add_eq(X(0, 0) + X(1, 1) + 1.0, "trace=-1");
    p.add_psd(2, [&](int i, int j) { return X(i, j); }, "X");
    auto r = run(p);
    CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded program")
{
    ConicProgram p;
    auto v = p.add_scalar("x");
    p.add_objective(v(0));
    p.add_le(v(0), 0.0, "x<=0");
    auto r = run(p);
    CHECK(r.status == SolveStatus::Unbounded);
}

namespace {

// claims optimality for a point that violates the constraints
class LyingSolver final : public ConicSolver {
public:
    explicit LyingSolver(double x) : x_(x) {}
    std::string name() const override { return "liar"; }
    RawSolution solve(const ConicForm& f, const SolveSettings&) const override
    {
        RawSolution r;
        r.status = SolveStatus::Optimal;
        r.x = Eigen::VectorXd::Constant(f.c.size(), x_);
        return r;
    }

private:
    double x_;
};

}  // namespace

TEST_CASE("optimal claims are re-verified")
{
    ConicProgram p;
    auto v = p.add_scalar("x");
    p.add_objective(v(0));
    p.add_ge(v(0) - 1.0, "x>=1");
    SolveSettings s;
    auto bad = solve_program(p, s, LyingSolver(0.5));
    CHECK(bad.status != SolveStatus::Optimal);
    CHECK(bad.res.worst_block == 0);
    auto slightly = solve_program(p, s, LyingSolver(1.0 - 1e-6));
    CHECK(slightly.status == SolveStatus::NearOptimal);
    auto fine = solve_program(p, s, LyingSolver(1.0));
    CHECK(fine.status == SolveStatus::Optimal);
}

TEST_CASE("reference solver agrees on tiny programs")
{
    ConicProgram p;
    auto v = p.add_vector("v", 2);
    p.add_objective(v(0) + 0.5 * v(1));
    p.add_soc({2.0, v(0) - 1.0, v(1)}, "ball");
    p.add_psd(2, [&](int i, int j) {
        if (i == j) return i == 0 ? v(0) + 1.0 : v(1) + 2.0;
        return LinExpr(0.3);
    }, "lmi");
    SolveSettings s;
    s.tol = 1e-7;
    auto a = solve_program(p, s);
    auto b = solve_program(p, s, ReferenceSolver());
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE((b.status == SolveStatus::Optimal || b.status == SolveStatus::NearOptimal));
    CHECK(a.primal_objective == doctest::Approx(b.primal_objective).epsilon(1e-5));
}

TEST_CASE("svec round trip")
{
    Eigen::MatrixXd M(3, 3);
    M << 1, 2, 3, 2, 4, 5, 3, 5, 6;
    CHECK((smat(svec(M)) - M).norm() < 1e-14);
    Eigen::MatrixXd N = Eigen::MatrixXd::Identity(3, 3) * 2;
    CHECK(svec(M).dot(svec(N)) == doctest::Approx((M * N).trace()));
}
