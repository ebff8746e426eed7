#include "cscopf/case.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cscopf {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& field, const std::string& msg)
{
    throw CaseError(CaseError::Kind::Parse, field, "case parse error at '" + field + "': " + msg);
}

[[noreturn]] void invalid(const std::string& field, const std::string& msg)
{
    throw CaseError(CaseError::Kind::Validation, field,
                    "case validation error at '" + field + "': " + msg);
}

double num(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail(where + "." + key, "missing required field");
    if (!it->is_number()) parse_fail(where + "." + key, "expected a number");
    return it->get<double>();
}

double num_or(const json& obj, const char* key, double dflt, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return dflt;
    if (!it->is_number()) parse_fail(where + "." + key, "expected a number");
    return it->get<double>();
}

int integer(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail(where + "." + key, "missing required field");
    if (!it->is_number_integer()) parse_fail(where + "." + key, "expected an integer");
    return it->get<int>();
}

const json& array_field(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) parse_fail(key, "missing required array");
    if (!it->is_array()) parse_fail(key, "expected an array");
    return *it;
}

BusType parse_bus_type(const json& v, const std::string& where)
{
    if (!v.is_string()) parse_fail(where, "expected one of slack/PV/PQ");
    auto s = v.get<std::string>();
    if (s == "slack" || s == "ref") return BusType::Slack;
    if (s == "PV" || s == "pv") return BusType::PV;
    if (s == "PQ" || s == "pq") return BusType::PQ;
    parse_fail(where, "unknown bus type '" + s + "'");
}

std::string at(const char* arr, std::size_t i)
{
    return std::string(arr) + "[" + std::to_string(i) + "]";
}

}  // namespace

const char* to_string(BusType t)
{
    switch (t) {
    case BusType::Slack: return "slack";
    case BusType::PV: return "PV";
    case BusType::PQ: return "PQ";
    }
    return "?";
}

void CaseSystem::reindex()
{
    index_.clear();
    for (std::size_t i = 0; i < buses.size(); ++i) index_[buses[i].id] = i;
}

std::size_t CaseSystem::bus_pos(int id) const
{
    auto it = index_.find(id);
    if (it == index_.end())
        throw CaseError(CaseError::Kind::Validation, "bus", "unknown bus id " + std::to_string(id));
    return it->second;
}

std::size_t CaseSystem::slack_pos() const
{
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].type == BusType::Slack) return i;
    throw CaseError(CaseError::Kind::Validation, "buses", "no slack bus");
}

double CaseSystem::total_load_p() const
{
    double s = 0;
    for (const auto& b : buses) s += b.P_d;
    return s;
}

double CaseSystem::total_load_q() const
{
    double s = 0;
    for (const auto& b : buses) s += b.Q_d;
    return s;
}

double CaseSystem::total_cost(const std::vector<double>& pg) const
{
    double s = 0;
    for (std::size_t i = 0; i < generators.size() && i < pg.size(); ++i) s += generators[i].cost(pg[i]);
    return s;
}

CaseSystem parse_case(const json& j)
{
    if (!j.is_object()) parse_fail("<root>", "expected a JSON object");
    CaseSystem c;
    c.name = j.value("name", std::string{});
    c.base_mva = num(j, "base_mva", "<root>");

    std::string basis = "pu";
    if (auto it = j.find("cost_basis"); it != j.end()) {
        if (!it->is_string()) parse_fail("cost_basis", "expected \"pu\" or \"MW\"");
        basis = it->get<std::string>();
        if (basis != "pu" && basis != "MW") parse_fail("cost_basis", "expected \"pu\" or \"MW\"");
    }

    const auto& buses = array_field(j, "buses");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const auto& b = buses[i];
        auto w = at("buses", i);
        if (!b.is_object()) parse_fail(w, "expected an object");
        Bus bus;
        bus.id = integer(b, "id", w);
        if (!b.contains("type")) parse_fail(w + ".type", "missing required field");
        bus.type = parse_bus_type(b["type"], w + ".type");
        bus.P_d = num(b, "P_d", w);
        bus.Q_d = num(b, "Q_d", w);
        bus.V_min = num(b, "V_min", w);
        bus.V_max = num(b, "V_max", w);
        bus.G_s = num_or(b, "G_s", 0.0, w);
        bus.B_s = num_or(b, "B_s", 0.0, w);
        c.buses.push_back(bus);
    }

    const auto& branches = array_field(j, "branches");
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto& b = branches[i];
        auto w = at("branches", i);
        if (!b.is_object()) parse_fail(w, "expected an object");
        Branch br;
        br.from = integer(b, "from", w);
        br.to = integer(b, "to", w);
        br.r = num(b, "r", w);
        br.x = num(b, "x", w);
        br.b_charging = num_or(b, "b_charging", 0.0, w);
        br.tap = num_or(b, "tap", 1.0, w);
        if (br.tap == 0.0) br.tap = 1.0;  // MATPOWER convention
        br.S_max = num_or(b, "S_max", 0.0, w);
        c.branches.push_back(br);
    }

    const auto& gens = array_field(j, "generators");
    const double k2 = basis == "MW" ? c.base_mva * c.base_mva : 1.0;
    const double k1 = basis == "MW" ? c.base_mva : 1.0;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const auto& g = gens[i];
        auto w = at("generators", i);
        if (!g.is_object()) parse_fail(w, "expected an object");
        Generator gen;
        gen.bus = integer(g, "bus", w);
        gen.P_min = num(g, "P_min", w);
        gen.P_max = num(g, "P_max", w);
        gen.Q_min = num(g, "Q_min", w);
        gen.Q_max = num(g, "Q_max", w);
        gen.c2 = num(g, "c2", w) * k2;
        gen.c1 = num(g, "c1", w) * k1;
        gen.c0 = num(g, "c0", w);
        auto& d = gen.dyn;
        d.H = num(g, "H", w);
        d.D = num_or(g, "D", 0.0, w);
        d.x_d = num(g, "x_d", w);
        d.x_q = num(g, "x_q", w);
        d.x_d_prime = num(g, "x_d_prime", w);
        d.x_q_prime = num(g, "x_q_prime", w);
        d.T_d0_prime = num(g, "T_d0_prime", w);
        d.T_q0_prime = num(g, "T_q0_prime", w);
        c.generators.push_back(gen);
    }

    c.reindex();
    validate_case(c);
    return c;
}

void validate_case(const CaseSystem& c)
{
    if (!(c.base_mva > 0)) invalid("base_mva", "must be positive");
    if (c.buses.empty()) invalid("buses", "no buses");

    std::set<int> ids;
    int slack = 0;
    for (std::size_t i = 0; i < c.nb(); ++i) {
        const auto& b = c.buses[i];
        auto w = at("buses", i);
        if (!ids.insert(b.id).second) invalid(w + ".id", "duplicate bus id " + std::to_string(b.id));
        if (b.type == BusType::Slack) ++slack;
        if (!(b.V_min > 0)) invalid(w + ".V_min", "must be positive");
        if (b.V_min > b.V_max) invalid(w + ".V_min", "V_min > V_max");
    }
    if (slack != 1) invalid("buses", "expected exactly one slack bus, found " + std::to_string(slack));

    for (std::size_t i = 0; i < c.nl(); ++i) {
        const auto& br = c.branches[i];
        auto w = at("branches", i);
        if (!ids.count(br.from)) invalid(w + ".from", "unknown bus id " + std::to_string(br.from));
        if (!ids.count(br.to)) invalid(w + ".to", "unknown bus id " + std::to_string(br.to));
        if (br.from == br.to) invalid(w + ".to", "self loop");
        if (br.r == 0 && br.x == 0) invalid(w + ".x", "zero impedance");
        if (br.r < 0) invalid(w + ".r", "negative resistance");
        if (!(br.tap > 0)) invalid(w + ".tap", "must be positive");
        if (br.S_max < 0) invalid(w + ".S_max", "negative flow limit");
    }

    for (std::size_t i = 0; i < c.ng(); ++i) {
        const auto& g = c.generators[i];
        const auto& d = g.dyn;
        auto w = at("generators", i);
        if (!ids.count(g.bus)) invalid(w + ".bus", "unknown bus id " + std::to_string(g.bus));
        if (g.P_min > g.P_max) invalid(w + ".P_min", "P_min > P_max");
        if (g.Q_min > g.Q_max) invalid(w + ".Q_min", "Q_min > Q_max");
        if (g.c2 < 0) invalid(w + ".c2", "negative cost coefficient");
        if (g.c1 < 0) invalid(w + ".c1", "negative cost coefficient");
        if (g.c0 < 0) invalid(w + ".c0", "negative cost coefficient");
        if (!(d.x_d > 0)) invalid(w + ".x_d", "must be positive");
        if (!(d.x_q > 0)) invalid(w + ".x_q", "must be positive");
        if (!(d.x_d_prime > 0)) invalid(w + ".x_d_prime", "must be positive");
        if (!(d.x_q_prime > 0)) invalid(w + ".x_q_prime", "must be positive");
        if (d.x_d_prime > d.x_d) invalid(w + ".x_d_prime", "x_d_prime > x_d");
        if (d.x_q_prime > d.x_q) invalid(w + ".x_q_prime", "x_q_prime > x_q");
        if (!(d.H > 0)) invalid(w + ".H", "must be positive");
        if (d.D < 0) invalid(w + ".D", "negative damping");
        if (!(d.T_d0_prime > 0)) invalid(w + ".T_d0_prime", "must be positive");
        if (!(d.T_q0_prime > 0)) invalid(w + ".T_q0_prime", "must be positive");
    }
}

CaseSystem load_case(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw CaseError(CaseError::Kind::Parse, "<file>", "cannot open case file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw CaseError(CaseError::Kind::Parse, "<json>", std::string("malformed JSON: ") + e.what());
    }
    return parse_case(j);
}

json case_to_json(const CaseSystem& c)
{
    json j;
    if (!c.name.empty()) j["name"] = c.name;
    j["base_mva"] = c.base_mva;
    j["cost_basis"] = "pu";
    j["buses"] = json::array();
    for (const auto& b : c.buses)
        j["buses"].push_back({{"id", b.id}, {"type", to_string(b.type)}, {"P_d", b.P_d},
                              {"Q_d", b.Q_d}, {"V_min", b.V_min}, {"V_max", b.V_max},
                              {"G_s", b.G_s}, {"B_s", b.B_s}});
    j["branches"] = json::array();
    for (const auto& br : c.branches)
        j["branches"].push_back({{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x},
                                 {"b_charging", br.b_charging}, {"tap", br.tap}, {"S_max", br.S_max}});
    j["generators"] = json::array();
    for (const auto& g : c.generators) {
        const auto& d = g.dyn;
        j["generators"].push_back({{"bus", g.bus}, {"P_min", g.P_min}, {"P_max", g.P_max},
                                   {"Q_min", g.Q_min}, {"Q_max", g.Q_max}, {"c2", g.c2},
                                   {"c1", g.c1}, {"c0", g.c0}, {"H", d.H}, {"D", d.D},
                                   {"x_d", d.x_d}, {"x_q", d.x_q}, {"x_d_prime", d.x_d_prime},
                                   {"x_q_prime", d.x_q_prime}, {"T_d0_prime", d.T_d0_prime},
                                   {"T_q0_prime", d.T_q0_prime}});
    }
    return j;
}

void save_case(const CaseSystem& c, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << case_to_json(c).dump(2) << "\n";
}

CaseSystem add_transformer_resistance(CaseSystem c, double r_eps)
{
    if (!(r_eps > 0)) throw std::invalid_argument("r_eps must be positive");
    for (auto& br : c.branches)
        if (br.r == 0.0) br.r = r_eps;
    return c;
}

}  // namespace cscopf
