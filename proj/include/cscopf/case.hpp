#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace cscopf {

enum class BusType { Slack, PV, PQ };

struct Bus {
    int id = 0;
    BusType type = BusType::PQ;
    double P_d = 0, Q_d = 0;      // pu
    double V_min = 0.9, V_max = 1.1;
    double G_s = 0, B_s = 0;      // pu shunt
};

struct Branch {
    int from = 0, to = 0;         // bus ids
    double r = 0, x = 0, b_charging = 0;
    double tap = 1.0;             // off-nominal ratio on the from side
    double S_max = 0;             // pu, 0 = unlimited
};

// IV-order machine, all values on the system base
struct MachineParams {
    double H = 0, D = 0;
    double x_d = 0, x_q = 0, x_d_prime = 0, x_q_prime = 0;
    double T_d0_prime = 0, T_q0_prime = 0;
};

struct Generator {
    int bus = 0;
    double P_min = 0, P_max = 0, Q_min = 0, Q_max = 0;
    double c2 = 0, c1 = 0, c0 = 0;  // $/h with P in pu
    MachineParams dyn;

    double cost(double p) const { return c2 * p * p + c1 * p + c0; }
};

struct CaseSystem {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    std::size_t nb() const { return buses.size(); }
    std::size_t ng() const { return generators.size(); }
    std::size_t nl() const { return branches.size(); }

    // position of a bus id in `buses`; throws CaseError for unknown ids
    std::size_t bus_pos(int id) const;
    std::size_t slack_pos() const;
    std::size_t gen_bus_pos(std::size_t g) const { return bus_pos(generators[g].bus); }

    double total_load_p() const;
    double total_load_q() const;
    double total_cost(const std::vector<double>& pg) const;

    // rebuilds the id lookup, call after editing buses by hand
    void reindex();

private:
    std::unordered_map<int, std::size_t> index_;
};

class CaseError : public std::runtime_error {
public:
    enum class Kind { Parse, Validation };
    CaseError(Kind k, std::string field, const std::string& what)
        : std::runtime_error(what), kind_(k), field_(std::move(field)) {}
    Kind kind() const { return kind_; }
    const std::string& field() const { return field_; }

private:
    Kind kind_;
    std::string field_;
};

CaseSystem load_case(const std::filesystem::path& path);
CaseSystem parse_case(const nlohmann::json& j);
nlohmann::json case_to_json(const CaseSystem& c);
void save_case(const CaseSystem& c, const std::filesystem::path& path);

// throws CaseError(Validation) on the first broken invariant
void validate_case(const CaseSystem& c);

// every branch with r == 0 gets r = r_eps
CaseSystem add_transformer_resistance(CaseSystem c, double r_eps = 1e-5);

const char* to_string(BusType t);

}  // namespace cscopf
