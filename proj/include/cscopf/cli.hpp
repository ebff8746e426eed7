#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cscopf/pipeline.hpp"

namespace cscopf {

enum class Command { Opf, Scopf, Sweep, Verify };
const char* to_string(Command c);
Command parse_command(const std::string& s);  // throws ConfigError

enum class OutputFormat { Csv, Json };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepGrid {
    double min = 1e-2, max = 1e2;
    int points = 9;

    // log-spaced gamma1 values, min and max included
    std::vector<double> values() const;
};

struct RunConfig {
    Command command = Command::Opf;
    std::filesystem::path case_path;
    std::array<double, 5> gamma{1, 1, 1, 1, 1};
    StabilityMode mode = StabilityMode::PenaltyOnly;
    double eps = 1e-6;               // P >= eps I
    std::optional<ParkWindow> window;
    SolveSettings solver{};
    std::filesystem::path out_dir = "out";
    OutputFormat format = OutputFormat::Csv;
    SweepGrid sweep{};
    int jobs = 0;                    // sweep workers, 0 = hardware concurrency
    std::filesystem::path solution;  // verify input, default <out>/solution.json
    bool dump_program = false;       // scopf: write program.json
    bool quiet = false;

    CscopfOptions cscopf_options() const;
};

// Overlays the keys present in `j` on `cfg`. Unknown keys and bad values throw ConfigError.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config_file(RunConfig cfg, const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& cfg);

// throws ConfigError
void validate_config(const RunConfig& cfg);
std::array<double, 5> parse_gamma(const std::string& s);

// Exit codes. Only kExitOk means the command finished and, for scopf and verify, the
// verdict is stable.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotStable = 1;
inline constexpr int kExitBadInput = 2;      // malformed case, config or flags
inline constexpr int kExitSolveFailed = 3;   // no usable solution
inline constexpr int kExitIncompatible = 4;  // solution file of another version or case

// Runs one command; files go to cfg.out_dir, human-readable lines to `log`.
int run_command(const RunConfig& cfg, std::ostream& log);

int cmd_opf(const RunConfig& cfg, std::ostream& log);
int cmd_scopf(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);

}  // namespace cscopf
