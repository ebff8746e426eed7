// Derivative-free barrier search. Only meant for programs with a few scalars,
// where it gives an independent check on the interior point method.

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "cones.hpp"
#include "cscopf/solver.hpp"

namespace cscopf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

// log-det barrier of the cone at v, -inf outside; margin = smallest cone eigenvalue
struct ConeEval {
    double logdet = 0, margin = kInf;
};

ConeEval cone_eval(const detail::Cones& K, const VectorXd& v)
{
    const auto& d = K.dims();
    ConeEval r;
    for (int i = 0; i < d.nonneg; ++i) {
        r.margin = std::min(r.margin, v(i));
        r.logdet += v(i) > 0 ? std::log(v(i)) : -kInf;
    }
    for (std::size_t i = 0; i < d.soc.size(); ++i) {
        const int o = K.soc_offset(i), q = d.soc[i];
        const double t = v(o), nr = v.segment(o + 1, q - 1).norm();
        r.margin = std::min(r.margin, t - nr);
        r.logdet += t > nr ? std::log((t - nr) * (t + nr)) : -kInf;
    }
    for (std::size_t i = 0; i < d.psd.size(); ++i) {
        const int o = K.psd_offset(i), n = d.psd[i];
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(v.segment(o, svec_size(n))), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        r.margin = std::min(r.margin, ev(0));
        r.logdet += ev(0) > 0 ? ev.array().log().sum() : -kInf;
    }
    return r;
}

// opportunistic pattern search with coordinate and random directions
template <class F>
double pattern_search(const F& fn, VectorXd& xi, double step, double min_step, std::mt19937& rng,
                      long& evals, long max_evals)
{
    const auto k = xi.size();
    std::normal_distribution<double> gauss;
    double fx = fn(xi);
    while (step > min_step && evals < max_evals) {
        std::vector<VectorXd> dirs;
        for (Eigen::Index i = 0; i < k; ++i) {
            dirs.push_back(VectorXd::Unit(k, i));
            dirs.push_back(-VectorXd::Unit(k, i));
        }
        for (Eigen::Index i = 0; i < 2 * k; ++i) {
            VectorXd d = VectorXd::NullaryExpr(k, [&] { return gauss(rng); });
            dirs.push_back(d / d.norm());
        }
        bool improved = false;
        for (const auto& d : dirs) {
            VectorXd trial = xi + step * d;
            const double ft = fn(trial);
            ++evals;
            if (ft < fx) {
                // keep going while it pays off
                VectorXd further = xi + 2 * step * d;
                const double ff = fn(further);
                ++evals;
                if (ff < ft) {
                    xi = further;
                    fx = ff;
                } else {
                    xi = trial;
                    fx = ft;
                }
                improved = true;
                break;
            }
        }
        step = improved ? std::min(step * 2, 1e6) : step * 0.5;
    }
    return fx;
}

}  // namespace

RawSolution ReferenceSolver::solve(const ConicForm& f, const SolveSettings& set) const
{
    const auto t0 = std::chrono::steady_clock::now();
    RawSolution out;
    auto done = [&]() -> RawSolution {
        out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    };
    const int n = static_cast<int>(f.c.size());
    if (n > max_vars_) {
        out.status = SolveStatus::NumericalError;
        out.message = "reference solver limited to " + std::to_string(max_vars_) + " scalars";
        return done();
    }
    const detail::Cones K(f.dims);

    // x = x0 + N xi spans the affine equality set
    VectorXd x0 = VectorXd::Zero(n);
    MatrixXd N = MatrixXd::Identity(n, n);
    if (f.A.rows() > 0) {
        MatrixXd A(f.A);
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
        x0 = cod.solve(f.b);
        if ((A * x0 - f.b).lpNorm<Eigen::Infinity>() > 1e-9 * (1 + f.b.lpNorm<Eigen::Infinity>())) {
            out.status = SolveStatus::Infeasible;
            out.message = "linear equalities are inconsistent";
            return done();
        }
        Eigen::FullPivLU<MatrixXd> lu(A);
        N = lu.kernel();
        if (lu.rank() == n) N.resize(n, 0);
    }
    const auto k = N.cols();
    auto xof = [&](const VectorXd& xi) -> VectorXd { return k ? VectorXd(x0 + N * xi) : x0; };
    auto slack = [&](const VectorXd& xi) -> VectorXd { return f.h - f.G * xof(xi); };

    std::mt19937 rng(12345);
    long evals = 0;
    const long max_evals = 4'000'000;
    VectorXd xi = VectorXd::Zero(k);

    // phase one: push the smallest cone eigenvalue above zero
    double margin = cone_eval(K, slack(xi)).margin;
    if (K.rows() > 0 && margin <= 0 && k > 0) {
        auto neg_margin = [&](const VectorXd& v) { return -std::min(cone_eval(K, slack(v)).margin, 1.0); };
        pattern_search(neg_margin, xi, 1.0, 1e-12, rng, evals, max_evals);
        margin = cone_eval(K, slack(xi)).margin;
    }
    if (K.rows() > 0 && margin <= 0) {
        out.status = margin > -set.tol ? SolveStatus::NearOptimal : SolveStatus::Infeasible;
        out.message = "no strictly feasible point found";
        if (out.status == SolveStatus::Infeasible) return done();
    }

    // phase two: barrier path t c'x - logdet(h - G x)
    const double nu = K.degree();
    for (double t = 1.0; k > 0; t *= 10) {
        auto barrier = [&](const VectorXd& v) {
            const auto ce = cone_eval(K, slack(v));
            if (!(ce.logdet > -kInf)) return kInf;
            return t * f.c.dot(xof(v)) - ce.logdet;
        };
        pattern_search(barrier, xi, 1.0, 1e-13, rng, evals, max_evals);
        if (f.c.dot(xof(xi)) < -1e11) {
            out.status = SolveStatus::Unbounded;
            out.message = "objective decreased without bound";
            out.x = xof(xi);
            return done();
        }
        if (nu / t < 1e-3 * set.tol || evals >= max_evals) break;
    }

    out.x = xof(xi);
    out.s = f.h - f.G * out.x;
    out.primal_objective = out.dual_objective = f.c.dot(out.x) + f.c0;
    const double m = std::min(0.0, cone_eval(K, out.s).margin);
    out.res.primal = -m / (1 + f.h.lpNorm<Eigen::Infinity>());
    out.iterations = static_cast<int>(evals);
    if (out.res.primal <= set.tol)
        out.status = SolveStatus::Optimal;
    else if (out.res.primal <= set.tol * set.near_factor)
        out.status = SolveStatus::NearOptimal;
    else {
        out.status = SolveStatus::Infeasible;
        out.message = "no point with zero cone violation found";
    }
    return done();
}

}  // namespace cscopf
