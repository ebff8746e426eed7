#include <cmath>
#include <fstream>
#include <sstream>

#include "cscopf/cli.hpp"

namespace cscopf {

const char* to_string(Command c)
{
    switch (c) {
    case Command::Opf: return "opf";
    case Command::Scopf: return "scopf";
    case Command::Sweep: return "sweep";
    case Command::Verify: return "verify";
    }
    return "?";
}

Command parse_command(const std::string& s)
{
    for (auto c : {Command::Opf, Command::Scopf, Command::Sweep, Command::Verify})
        if (s == to_string(c)) return c;
    throw ConfigError("unknown command '" + s + "'");
}

std::vector<double> SweepGrid::values() const
{
    std::vector<double> g;
    if (points == 1) return {min};
    const double a = std::log10(min), b = std::log10(max);
    for (int i = 0; i < points; ++i) g.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
    g.front() = min;
    g.back() = max;
    return g;
}

CscopfOptions RunConfig::cscopf_options() const
{
    CscopfOptions o;
    o.gamma = gamma;
    o.mode = mode;
    o.eps = eps;
    o.window = window;
    return o;
}

std::array<double, 5> parse_gamma(const std::string& s)
{
    std::array<double, 5> g{};
    std::stringstream in(s);
    std::string item;
    int k = 0;
    while (std::getline(in, item, ',')) {
        if (k == 5) throw ConfigError("--gamma takes five comma-separated weights");
        try {
            std::size_t used = 0;
            g[k] = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad gamma weight '" + item + "'");
        }
        ++k;
    }
    if (k != 5) throw ConfigError("--gamma takes five comma-separated weights, got " + std::to_string(k));
    return g;
}

namespace {

OutputFormat parse_format(const std::string& s)
{
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ConfigError("unknown output format '" + s + "' (csv or json)");
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key)
{
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace

void apply_config_json(RunConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "command")
            cfg.command = parse_command(get_as<std::string>(v, key));
        else if (key == "case")
            cfg.case_path = get_as<std::string>(v, key);
        else if (key == "gamma") {
            if (v.is_string())
                cfg.gamma = parse_gamma(v.get<std::string>());
            else {
                const auto g = get_as<std::vector<double>>(v, key);
                if (g.size() != 5) throw ConfigError("config 'gamma' needs five weights");
                std::copy(g.begin(), g.end(), cfg.gamma.begin());
            }
        } else if (key == "mode") {
            try {
                cfg.mode = parse_stability_mode(get_as<std::string>(v, key));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "eps")
            cfg.eps = get_as<double>(v, key);
        else if (key == "window") {
            if (v.is_null() || (v.is_boolean() && !v.get<bool>()))
                cfg.window.reset();
            else if (v.is_boolean())
                cfg.window = ParkWindow{};
            else {
                ParkWindow w;
                for (const auto& [wk, wv] : v.items()) {
                    if (wk == "r_v")
                        w.r_v = get_as<double>(wv, "window.r_v");
                    else if (wk == "r_uv")
                        w.r_uv = get_as<double>(wv, "window.r_uv");
                    else
                        throw ConfigError("unknown config key 'window." + wk + "'");
                }
                cfg.window = w;
            }
        } else if (key == "tol")
            cfg.solver.tol = get_as<double>(v, key);
        else if (key == "max_iter")
            cfg.solver.max_iter = get_as<int>(v, key);
        else if (key == "verbose")
            cfg.solver.verbose = get_as<bool>(v, key);
        else if (key == "out")
            cfg.out_dir = get_as<std::string>(v, key);
        else if (key == "format")
            cfg.format = parse_format(get_as<std::string>(v, key));
        else if (key == "sweep") {
            if (!v.is_object()) throw ConfigError("config 'sweep' must be an object");
            for (const auto& [sk, sv] : v.items()) {
                if (sk == "min")
                    cfg.sweep.min = get_as<double>(sv, "sweep.min");
                else if (sk == "max")
                    cfg.sweep.max = get_as<double>(sv, "sweep.max");
                else if (sk == "points")
                    cfg.sweep.points = get_as<int>(sv, "sweep.points");
                else
                    throw ConfigError("unknown config key 'sweep." + sk + "'");
            }
        } else if (key == "jobs")
            cfg.jobs = get_as<int>(v, key);
        else if (key == "solution")
            cfg.solution = get_as<std::string>(v, key);
        else if (key == "dump_program")
            cfg.dump_program = get_as<bool>(v, key);
        else if (key == "quiet")
            cfg.quiet = get_as<bool>(v, key);
        else
            throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig load_config_file(RunConfig cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    apply_config_json(cfg, j);
    return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg)
{
    nlohmann::json j{
        {"command", to_string(cfg.command)},
        {"case", cfg.case_path.string()},
        {"gamma", cfg.gamma},
        {"mode", to_string(cfg.mode)},
        {"eps", cfg.eps},
        {"tol", cfg.solver.tol},
        {"max_iter", cfg.solver.max_iter},
        {"out", cfg.out_dir.string()},
        {"format", cfg.format == OutputFormat::Csv ? "csv" : "json"},
        {"sweep", {{"min", cfg.sweep.min}, {"max", cfg.sweep.max}, {"points", cfg.sweep.points}}},
        {"jobs", cfg.jobs},
    };
    j["window"] = cfg.window ? nlohmann::json{{"r_v", cfg.window->r_v}, {"r_uv", cfg.window->r_uv}} : nlohmann::json();
    return j;
}

void validate_config(const RunConfig& cfg)
{
    if (cfg.case_path.empty()) throw ConfigError("no case given (--case)");
    for (double g : cfg.gamma)
        if (!(g >= 0) || !std::isfinite(g)) throw ConfigError("gamma weights must be finite and >= 0");
    if (!(cfg.solver.tol > 0)) throw ConfigError("tol must be > 0");
    if (cfg.solver.max_iter <= 0) throw ConfigError("max_iter must be > 0");
    if (!(cfg.eps > 0)) throw ConfigError("eps must be > 0");
    if (cfg.sweep.points < 1) throw ConfigError("sweep needs at least one point");
    if (!(cfg.sweep.min > 0) || !(cfg.sweep.max >= cfg.sweep.min))
        throw ConfigError("sweep range must satisfy 0 < min <= max");
    if (cfg.jobs < 0) throw ConfigError("jobs must be >= 0");
    if (cfg.window && (!(cfg.window->r_v > 0) || !(cfg.window->r_uv > 0)))
        throw ConfigError("window radii must be > 0");
}

}  // namespace cscopf
