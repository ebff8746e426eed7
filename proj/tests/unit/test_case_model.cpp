#include <cmath>
#include <random>

#include <doctest.h>

#include "cscopf/network.hpp"

using namespace cscopf;

namespace {

const std::string kCases = CSCOPF_CASE_DIR;

nlohmann::json tiny_case()
{
    return nlohmann::json::parse(R"({
      "name": "tiny", "base_mva": 100,
      "buses": [
        {"id": 1, "type": "slack", "P_d": 0, "Q_d": 0, "V_min": 0.9, "V_max": 1.1},
        {"id": 2, "type": "PQ", "P_d": 0.5, "Q_d": 0.1, "V_min": 0.9, "V_max": 1.1, "B_s": 0.05}
      ],
      "branches": [ {"from": 1, "to": 2, "r": 0.01, "x": 0.1, "b_charging": 0.02, "tap": 0.98} ],
      "generators": [ {"bus": 1, "P_min": 0, "P_max": 2, "Q_min": -1, "Q_max": 1,
        "c2": 0.1, "c1": 10, "c0": 0, "H": 5, "D": 1, "x_d": 1.0, "x_q": 0.9,
        "x_d_prime": 0.2, "x_q_prime": 0.3, "T_d0_prime": 6, "T_q0_prime": 0.5} ]
    })");
}

Eigen::VectorXcd random_voltage(std::size_t n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> mag(0.9, 1.1), ang(-0.5, 0.5);
    Eigen::VectorXcd V(n);
    for (std::size_t k = 0; k < n; ++k) V(k) = std::polar(mag(rng), ang(rng));
    return V;
}

std::string field_of(const nlohmann::json& j)
{
    try {
        parse_case(j);
    } catch (const CaseError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("bundled cases load")
{
    auto c9 = load_case(kCases + "/wscc9.json");
    CHECK(c9.nb() == 9);
    CHECK(c9.ng() == 3);
    CHECK(c9.nl() == 9);
    CHECK(c9.buses[c9.slack_pos()].type == BusType::Slack);
    auto c39 = load_case(kCases + "/ne39.json");
    CHECK(c39.nb() == 39);
    CHECK(c39.ng() == 10);
}

TEST_CASE("json round trip keeps every field")
{
    auto c = load_case(kCases + "/wscc9.json");
    auto d = parse_case(case_to_json(c));
    REQUIRE(d.nb() == c.nb());
    REQUIRE(d.ng() == c.ng());
    for (std::size_t i = 0; i < c.ng(); ++i) {
        CHECK(d.generators[i].c2 == c.generators[i].c2);
        CHECK(d.generators[i].dyn.H == c.generators[i].dyn.H);
        CHECK(d.generators[i].dyn.T_q0_prime == c.generators[i].dyn.T_q0_prime);
    }
    for (std::size_t l = 0; l < c.nl(); ++l) CHECK(d.branches[l].x == c.branches[l].x);
}

TEST_CASE("malformed cases name the offending field")
{
    auto j = tiny_case();
    CHECK(field_of(j) == "");

    auto a = j;
    a["buses"][1].erase("P_d");
    CHECK(field_of(a) == "buses[1].P_d");

    auto b = j;
    b["branches"][0]["to"] = 7;
    CHECK(field_of(b) == "branches[0].to");

    auto c = j;
    c["buses"][1]["type"] = "slack";
    CHECK(field_of(c) == "buses");

    auto d = j;
    d["generators"][0]["x_d_prime"] = 2.0;
    CHECK(field_of(d) == "generators[0].x_d_prime");

    auto e = j;
    e["buses"][0]["V_min"] = "low";
    CHECK(field_of(e) == "buses[0].V_min");

    CHECK_THROWS_AS(load_case("/nonexistent/case.json"), CaseError);
}

TEST_CASE("zero-resistance branches get a small resistance")
{
    auto c = load_case(kCases + "/wscc9.json");
    int zero = 0;
    for (const auto& br : c.branches) zero += br.r == 0.0;
    REQUIRE(zero > 0);
    auto d = add_transformer_resistance(c, 1e-5);
    for (std::size_t l = 0; l < c.nl(); ++l) {
        if (c.branches[l].r == 0.0)
            CHECK(d.branches[l].r == 1e-5);
        else
            CHECK(d.branches[l].r == c.branches[l].r);
    }
}

TEST_CASE("Y bus of a single branch with tap and shunt")
{
    auto c = parse_case(tiny_case());
    auto Y = build_ybus(c);
    const cplx ys = 1.0 / cplx(0.01, 0.1);
    const cplx half_b(0, 0.01);
    CHECK(std::abs(Y(0, 0) - (ys + half_b) / (0.98 * 0.98)) < 1e-12);
    CHECK(std::abs(Y(0, 1) + ys / 0.98) < 1e-12);
    CHECK(std::abs(Y(1, 1) - (ys + half_b + cplx(0, 0.05))) < 1e-12);
    CHECK(std::abs(Y(1, 0) - Y(0, 1)) < 1e-12);
}

TEST_CASE("trace form matches direct power flow on both cases")
{
    std::mt19937 rng(7);
    for (const char* name : {"/wscc9.json", "/ne39.json"}) {
        auto c = add_transformer_resistance(load_case(kCases + name));
        auto net = build_matrices(c);
        for (int trial = 0; trial < 5; ++trial) {
            auto V = random_voltage(c.nb(), rng);
            Eigen::VectorXd X = to_real(V);
            Eigen::MatrixXd W = X * X.transpose();
            auto S = bus_injections(net.Y, V);
            double worst = 0;
            for (std::size_t k = 0; k < c.nb(); ++k) {
                const double p = (Eigen::MatrixXd(net.Yk[k]).cwiseProduct(W)).sum();
                const double q = (Eigen::MatrixXd(net.Yk_bar[k]).cwiseProduct(W)).sum();
                const double m = (Eigen::MatrixXd(net.Mk[k]).cwiseProduct(W)).sum();
                worst = std::max({worst, std::abs(p - S(k).real()), std::abs(q - S(k).imag()),
                                  std::abs(m - std::norm(V(k)))});
            }
            for (const auto& f : net.flows) {
                const cplx s = branch_flow(net.branch_y[f.branch], f.from_side, V);
                worst = std::max({worst, std::abs(quad(f.Ykl, X) - s.real()), std::abs(quad(f.Ykl_bar, X) - s.imag())});
            }
            CHECK(worst <= 1e-9);
        }
    }
}

TEST_CASE("network matrices are symmetric")
{
    auto net = build_matrices(load_case(kCases + "/wscc9.json"));
    for (const auto& Y : net.Yk) CHECK((Eigen::MatrixXd(Y) - Eigen::MatrixXd(Y).transpose()).norm() == 0.0);
    for (const auto& f : net.flows) CHECK((Eigen::MatrixXd(f.Ykl_bar) - Eigen::MatrixXd(f.Ykl_bar).transpose()).norm() == 0.0);
    CHECK(net.flows.size() == 18);
}
