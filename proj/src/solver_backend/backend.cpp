#include <cmath>
#include <stdexcept>

#include "cscopf/solver.hpp"

namespace cscopf {

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near_optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalError: return "numerical_error";
    }
    return "unknown";
}

std::unique_ptr<ConicSolver> make_solver(std::string_view name)
{
    if (name == "ipm") return std::make_unique<InteriorPointSolver>();
    if (name == "reference") return std::make_unique<ReferenceSolver>();
    throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

namespace {

// which constraint block carries most of an infeasibility certificate
int dominant_block(const ConicForm& f, const RawSolution& r)
{
    std::vector<double> mass;
    auto bump = [&](int blk, double v) {
        if (blk < 0) return;
        if (static_cast<std::size_t>(blk) >= mass.size()) mass.resize(blk + 1, 0.0);
        mass[blk] += std::abs(v);
    };
    for (Eigen::Index i = 0; i < r.y.size() && i < static_cast<Eigen::Index>(f.a_block_of_row.size()); ++i)
        bump(f.a_block_of_row[i], r.y(i));
    for (Eigen::Index i = 0; i < r.z.size() && i < static_cast<Eigen::Index>(f.g_block_of_row.size()); ++i)
        bump(f.g_block_of_row[i], r.z(i));
    int best = -1;
    double bv = 0;
    for (std::size_t i = 0; i < mass.size(); ++i)
        if (mass[i] > bv) {
            bv = mass[i];
            best = static_cast<int>(i);
        }
    return best;
}

}  // namespace

RawSolution solve_program(const ConicProgram& p, const SolveSettings& s, const ConicSolver& solver)
{
    const ConicForm f = p.lower();
    RawSolution r = solver.solve(f, s);
    const auto& cons = p.constraints();

    if (r.status == SolveStatus::Infeasible) {
        const int b = dominant_block(f, r);
        r.res.worst_block = b;
        if (b >= 0) r.message += "; certificate concentrated on '" + cons[b].tag + "'";
        return r;
    }
    if (r.x.size() != p.num_vars()) return r;

    // independent check, straight from the program's affine expressions
    double worst = 0;
    int wb = -1;
    for (std::size_t i = 0; i < cons.size(); ++i) {
        const double v = p.violation(cons[i], r.x);
        if (!(v <= worst)) {
            worst = v;
            wb = static_cast<int>(i);
        }
    }
    r.res.verified = worst;
    r.res.worst_block = wb;
    r.primal_objective = p.objective().eval(r.x);

    const double lim = 10 * s.tol;
    if (r.status == SolveStatus::Optimal && !(worst <= lim)) {
        r.status = worst <= lim * s.near_factor ? SolveStatus::NearOptimal : SolveStatus::NumericalError;
        r.message = "verified residual " + std::to_string(worst) + " in block '" + cons[wb].tag +
                    "' exceeds 10 tol";
    } else if (r.status == SolveStatus::NearOptimal && !(worst <= lim * s.near_factor)) {
        r.status = SolveStatus::NumericalError;
        r.message = "verified residual " + std::to_string(worst) + " in block '" + cons[wb].tag + "'";
    }
    return r;
}

RawSolution solve_program(const ConicProgram& p, const SolveSettings& s)
{
    return solve_program(p, s, InteriorPointSolver{});
}

}  // namespace cscopf
