#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "cscopf/program.hpp"

namespace cscopf {

enum class SolveStatus {
    Optimal,
    NearOptimal,     // stopped with residuals within the relaxed thresholds only
    Infeasible,      // primal infeasibility certificate
    Unbounded,       // dual infeasibility certificate
    MaxIterations,
    NumericalError,
};

std::string_view to_string(SolveStatus s);

struct SolveSettings {
    double tol = 1e-8;          // feasibility and relative gap
    double near_factor = 1e3;   // NearOptimal when within tol * near_factor
    int max_iter = 200;
    bool equilibrate = true;
    bool verbose = false;
};

struct Residuals {
    double primal = 0;      // max of scaled ||Ax-b|| and ||Gx+s-h||
    double dual = 0;
    double gap = 0;         // relative duality gap
    double verified = 0;    // independent max block violation at x (see ConicProgram::violation)
    int worst_block = -1;   // index into program constraints
};

struct RawSolution {
    SolveStatus status = SolveStatus::NumericalError;
    Eigen::VectorXd x, y, z, s;
    double primal_objective = 0, dual_objective = 0;
    int iterations = 0;
    double wall_time = 0;
    Residuals res;
    std::string message;
};

// Backend seam: a solver consumes a lowered conic form.
class ConicSolver {
public:
    virtual ~ConicSolver() = default;
    virtual std::string name() const = 0;
    virtual RawSolution solve(const ConicForm& f, const SolveSettings& s) const = 0;
};

// Homogeneous self-dual primal-dual interior point method with Nesterov-Todd scaling.
class InteriorPointSolver final : public ConicSolver {
public:
    std::string name() const override { return "ipm"; }
    RawSolution solve(const ConicForm& f, const SolveSettings& s) const override;
};

// Slow derivative-free solver for programs with a handful of scalars; used to cross-check.
class ReferenceSolver final : public ConicSolver {
public:
    explicit ReferenceSolver(int max_vars = 6) : max_vars_(max_vars) {}
    std::string name() const override { return "reference"; }
    RawSolution solve(const ConicForm& f, const SolveSettings& s) const override;

private:
    int max_vars_;
};

std::unique_ptr<ConicSolver> make_solver(std::string_view name);

// Lowers, solves, and re-verifies every constraint block at the returned x. An Optimal
// result whose verified residual exceeds 10 tol is downgraded to NearOptimal or worse.
RawSolution solve_program(const ConicProgram& p, const SolveSettings& s,
                          const ConicSolver& solver);
RawSolution solve_program(const ConicProgram& p, const SolveSettings& s = {});

}  // namespace cscopf
