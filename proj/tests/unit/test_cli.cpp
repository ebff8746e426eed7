#include <fstream>
#include <sstream>

#include <doctest.h>

#include "cscopf/cli.hpp"

using namespace cscopf;
namespace fs = std::filesystem;

namespace {

const std::string kCases = CSCOPF_CASE_DIR;

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("cscopf_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& s)
{
    std::ofstream(p) << s;
}

nlohmann::json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("gamma parsing")
{
    auto g = parse_gamma("15,1,1,0.5,1e-2");
    CHECK(g[0] == 15);
    CHECK(g[3] == 0.5);
    CHECK(g[4] == 1e-2);
    CHECK_THROWS_AS(parse_gamma("1,2"), ConfigError);
    CHECK_THROWS_AS(parse_gamma("1,2,3,4,5,6"), ConfigError);
    CHECK_THROWS_AS(parse_gamma("1,2,x,4,5"), ConfigError);
    CHECK_THROWS_AS(parse_gamma("1,2,3,4,5abc"), ConfigError);
}

TEST_CASE("config file overlays defaults and unknown keys fail")
{
    auto dir = scratch("config");
    write(dir / "c.json", R"({"case": "a.json", "gamma": [2, 1, 1, 1, 1], "mode": "zeta", "tol": 1e-7,
                              "sweep": {"points": 3}, "format": "json"})");
    RunConfig cfg = load_config_file(RunConfig{}, dir / "c.json");
    CHECK(cfg.case_path == "a.json");
    CHECK(cfg.gamma[0] == 2);
    CHECK(cfg.mode == StabilityMode::Zeta);
    CHECK(cfg.solver.tol == 1e-7);
    CHECK(cfg.sweep.points == 3);
    CHECK(cfg.sweep.min == SweepGrid{}.min);  // untouched keys keep their defaults
    CHECK(cfg.format == OutputFormat::Json);
    CHECK(cfg.out_dir == "out");

    write(dir / "bad.json", R"({"gama": [1,1,1,1,1]})");
    CHECK_THROWS_AS(load_config_file(RunConfig{}, dir / "bad.json"), ConfigError);
    write(dir / "type.json", R"({"tol": "small"})");
    CHECK_THROWS_AS(load_config_file(RunConfig{}, dir / "type.json"), ConfigError);
    write(dir / "broken.json", "{");
    CHECK_THROWS_AS(load_config_file(RunConfig{}, dir / "broken.json"), ConfigError);
}

TEST_CASE("flags applied after the file win")
{
    RunConfig cfg;
    apply_config_json(cfg, {{"gamma", "3,1,1,1,1"}, {"out", "from_file"}, {"tol", 1e-6}});
    // what the executable does for --gamma and --out after loading the file
    apply_config_json(cfg, {{"gamma", "9,1,1,1,1"}, {"out", "from_flag"}});
    CHECK(cfg.gamma[0] == 9);
    CHECK(cfg.out_dir == "from_flag");
    CHECK(cfg.solver.tol == 1e-6);
}

TEST_CASE("config round trips through json")
{
    RunConfig cfg;
    cfg.case_path = "x.json";
    cfg.gamma = {5, 4, 3, 2, 1};
    cfg.window = ParkWindow{0.2, 0.1};
    RunConfig back;
    apply_config_json(back, config_to_json(cfg));
    CHECK(back.gamma == cfg.gamma);
    REQUIRE(back.window.has_value());
    CHECK(back.window->r_uv == 0.1);
}

TEST_CASE("validation")
{
    RunConfig cfg;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // no case
    cfg.case_path = "x.json";
    validate_config(cfg);
    cfg.gamma[2] = -1;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg.gamma[2] = 1;
    cfg.sweep.min = 0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("sweep grid is log spaced with exact ends")
{
    SweepGrid g{0.1, 10, 3};
    auto v = g.values();
    REQUIRE(v.size() == 3);
    CHECK(v[0] == 0.1);
    CHECK(v[1] == doctest::Approx(1.0));
    CHECK(v[2] == 10);
    CHECK(SweepGrid{2, 5, 1}.values() == std::vector<double>{2});
}

TEST_CASE("malformed case exits with 2")
{
    auto dir = scratch("badcase");
    write(dir / "case.json", R"({"base_mva": 100, "buses": [{"id": 1}], "branches": [], "generators": []})");
    RunConfig cfg;
    cfg.case_path = dir / "case.json";
    cfg.out_dir = dir / "out";
    std::ostringstream log;
    CHECK(run_command(cfg, log) == kExitBadInput);
    CHECK(log.str().find("buses[0]") != std::string::npos);
    cfg.case_path = dir / "missing.json";
    CHECK(run_command(cfg, log) == kExitBadInput);
}

TEST_CASE("opf then verify on the 9-bus case")
{
    auto dir = scratch("opf");
    RunConfig cfg;
    cfg.case_path = kCases + "/wscc9.json";
    cfg.out_dir = dir;
    cfg.quiet = true;
    std::ostringstream log;
    CHECK(run_command(cfg, log) == kExitOk);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "solution.json"));
    CHECK(fs::exists(dir / "config.json"));

    // the relaxed-OPF point is unstable, so verify exits non-zero
    cfg.command = Command::Verify;
    CHECK(run_command(cfg, log) == kExitNotStable);
    auto v = read_json(dir / "verify.json");
    CHECK(v["verdict"] == "unstable");

    // a solution file from another version is refused
    auto sol = read_json(dir / "solution.json");
    sol["version"] = kSolutionVersion + 1;
    std::ofstream(dir / "stale.json") << sol.dump();
    cfg.solution = dir / "stale.json";
    CHECK(run_command(cfg, log) == kExitIncompatible);
}

TEST_CASE("scopf stabilises the 9-bus case and json format works")
{
    auto dir = scratch("scopf");
    RunConfig cfg;
    cfg.command = Command::Scopf;
    cfg.case_path = kCases + "/wscc9.json";
    cfg.gamma = {15, 1, 1, 1, 1};
    cfg.out_dir = dir;
    cfg.format = OutputFormat::Json;
    std::ostringstream log;
    CHECK(run_command(cfg, log) == kExitOk);
    auto rep = read_json(dir / "report.json");
    CHECK(rep["sigma_max"].get<double>() < 0);
    CHECK(fs::exists(dir / "jacobian_audit.csv"));
    CHECK(log.str().find("verdict: stable") != std::string::npos);
}
