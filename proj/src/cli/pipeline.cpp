#include <chrono>

#include "cscopf/pipeline.hpp"

namespace cscopf {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool has_point(const SolutionBundle& s)
{
    return s.V.size() > 0 && (s.status == SolveStatus::Optimal || s.status == SolveStatus::NearOptimal);
}

}  // namespace

PreparedCase prepare_case(CaseSystem c)
{
    PreparedCase pc;
    pc.c = add_transformer_resistance(std::move(c));
    pc.net = build_matrices(pc.c);
    pc.ja = build_jacobian_affine(pc.c, pc.net);
    return pc;
}

PreparedCase prepare_case(const std::filesystem::path& path)
{
    return prepare_case(load_case(path));
}

OpfRun run_relaxed_opf(const PreparedCase& pc, const SolveSettings& s, const RelaxOptions& ro)
{
    OpfRun r;
    auto t0 = Clock::now();
    ConicProgram p;
    const OpfVars opf = build_relaxed_opf(p, pc.c, pc.net, ro);
    r.t.build = since(t0);

    t0 = Clock::now();
    const RawSolution raw = solve_program(p, s);
    r.t.solve = since(t0);

    t0 = Clock::now();
    r.sol = extract_opf_solution(p, opf, raw);
    if (has_point(r.sol)) {
        try {
            r.verdict = verify_stability(pc.c, pc.net, pc.ja, r.sol);
        } catch (const std::exception& e) {
            r.verdict_error = e.what();
        }
    }
    r.t.recover = since(t0);
    return r;
}

CscopfProgram build_cscopf_program(const PreparedCase& pc, const OpfRun& base, const CscopfOptions& opt)
{
    if (!has_point(base.sol)) throw RecoveryError("relaxed OPF has no solution to anchor the penalties");
    return assemble_cscopf(pc.c, pc.net, pc.ja, make_base_solution(pc.c, base.sol), opt);
}

ScopfRun run_cscopf(const PreparedCase& pc, const OpfRun& base, const CscopfOptions& opt, const SolveSettings& s,
                    bool keep_dump)
{
    ScopfRun r;
    auto t0 = Clock::now();
    CscopfProgram cp = build_cscopf_program(pc, base, opt);
    r.audit = cp.jac->audit;
    r.t.build = since(t0);

    t0 = Clock::now();
    const RawSolution raw = solve_program(cp.prog, s);
    r.t.solve = since(t0);

    t0 = Clock::now();
    r.sol = extract_cscopf_solution(cp, raw);
    if (keep_dump) r.dump = cp.prog.dump(raw.x.size() == cp.prog.num_vars() ? &raw.x : nullptr);
    if (has_point(r.sol)) {
        try {
            r.verdict = verify_stability(pc.c, pc.net, pc.ja, r.sol);
        } catch (const std::exception& e) {
            r.verdict_error = e.what();
        }
    }
    r.err = compute_error_report(r.sol, base.sol, pc.c, r.verdict);
    r.t.recover = since(t0);
    return r;
}

}  // namespace cscopf
