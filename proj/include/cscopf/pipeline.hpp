#pragma once

#include <filesystem>
#include <optional>

#include "cscopf/recovery.hpp"

namespace cscopf {

// a case ready to solve: zero-resistance branches patched, matrices and Jacobian built
struct PreparedCase {
    CaseSystem c;
    NetworkMatrices net;
    JacobianAffine ja;
};

PreparedCase prepare_case(CaseSystem c);
PreparedCase prepare_case(const std::filesystem::path& path);

struct StageTiming {
    double build = 0, solve = 0, recover = 0;
};

struct OpfRun {
    SolutionBundle sol;
    std::optional<StabilityVerdict> verdict;  // empty if the equilibrium could not be initialised
    std::string verdict_error;
    StageTiming t;
};

OpfRun run_relaxed_opf(const PreparedCase& pc, const SolveSettings& s, const RelaxOptions& ro = {});

struct ScopfRun {
    SolutionBundle sol;
    std::optional<StabilityVerdict> verdict;
    std::string verdict_error;
    ErrorReport err;
    StageTiming t;
    std::vector<JacobianAuditRow> audit;
    std::optional<nlohmann::json> dump;  // program with the solution point, on request
};

// builds the program around the relaxed-OPF base
CscopfProgram build_cscopf_program(const PreparedCase& pc, const OpfRun& base, const CscopfOptions& opt);

ScopfRun run_cscopf(const PreparedCase& pc, const OpfRun& base, const CscopfOptions& opt, const SolveSettings& s,
                    bool keep_dump = false);

}  // namespace cscopf
