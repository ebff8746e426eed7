#include <cstdio>
#include <sstream>

#include "cscopf/recovery.hpp"

namespace cscopf {

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

nlohmann::json vec(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json mat(const Eigen::MatrixXd& m)
{
    auto j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(vec(m.row(i).transpose()));
    return j;
}

}  // namespace

std::string report_csv_header()
{
    return "case,command,mode,gamma1,gamma2,gamma3,gamma4,gamma5,status,iterations,cost,delta_p_pct,"
           "eps_w_pct,eps_wdq_pct,eps_vmag,eps_vdqmag,eps_p,eps_p_decomposed,eps_uv,loss_mw,delta_ploss_mw,"
           "sigma_max,n_rhp,sigma0_max,n_rhp0,sigma_gap,sigma_sdp,stable,t_build_s,t_solve_s,t_recover_s";
}

std::string report_csv_line(const ReportRow& r)
{
    const auto& e = r.err;
    std::ostringstream os;
    os << r.case_name << ',' << r.command << ',' << r.mode;
    for (double g : r.gamma) os << ',' << num(g);
    os << ',' << r.status << ',' << r.iterations << ',' << num(e.cost) << ',' << num(e.delta_p) << ','
       << num(e.eps_w) << ',' << num(e.eps_wdq) << ',' << num(e.eps_vmag) << ',' << num(e.eps_vdqmag) << ','
       << num(e.eps_p) << ',' << num(e.eps_p_w) << ',' << num(e.eps_uv) << ',' << num(e.loss_mw) << ','
       << num(e.delta_ploss) << ',' << num(e.sigma_max) << ',' << e.n_rhp << ',' << num(e.sigma0_max) << ','
       << e.n_rhp0 << ',' << num(e.gap) << ',' << (e.sigma_sdp ? num(*e.sigma_sdp) : "") << ','
       << (r.stable ? 1 : 0) << ',' << num(r.t_build) << ',' << num(r.t_solve) << ',' << num(r.t_recover);
    return os.str();
}

nlohmann::json report_json(const ReportRow& r)
{
    const auto& e = r.err;
    nlohmann::json j{
        {"case", r.case_name},
        {"command", r.command},
        {"mode", r.mode},
        {"gamma", r.gamma},
        {"status", r.status},
        {"iterations", r.iterations},
        {"cost", e.cost},
        {"delta_p_pct", e.delta_p},
        {"eps_w_pct", e.eps_w},
        {"eps_wdq_pct", e.eps_wdq},
        {"eps_vmag", e.eps_vmag},
        {"eps_vdqmag", e.eps_vdqmag},
        {"eps_p", e.eps_p},
        {"eps_p_decomposed", e.eps_p_w},
        {"eps_uv", e.eps_uv},
        {"loss_mw", e.loss_mw},
        {"delta_ploss_mw", e.delta_ploss},
        {"sigma_max", e.sigma_max},
        {"n_rhp", e.n_rhp},
        {"sigma0_max", e.sigma0_max},
        {"n_rhp0", e.n_rhp0},
        {"sigma_gap", e.gap},
        {"stable", r.stable},
        {"timing_s", {{"build", r.t_build}, {"solve", r.t_solve}, {"recover", r.t_recover}}},
    };
    j["sigma_sdp"] = e.sigma_sdp ? nlohmann::json(*e.sigma_sdp) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json solution_json(const SolutionBundle& s, const CaseSystem& c, const std::string& command)
{
    nlohmann::json j{
        {"format", "cscopf-solution"},
        {"version", kSolutionVersion},
        {"case", c.name},
        {"command", command},
        {"nb", c.nb()},
        {"ng", c.ng()},
        {"iterations", s.iterations},
        {"status", std::string(to_string(s.status))},
        {"message", s.message},
        {"objective", s.objective},
        {"cost", s.cost},
        {"Pg", vec(s.Pg)},
        {"Qg", vec(s.Qg)},
        {"V", vec(s.V)},
        {"Vw", vec(s.Vw)},
        {"W", mat(s.W)},
        {"eps_w", s.eps_w},
    };
    if (s.has_machine_vars()) {
        j["Vdq"] = vec(s.Vdq);
        j["Vdqw"] = vec(s.Vdqw);
        j["Wdq"] = mat(s.Wdq);
        j["u"] = vec(s.u);
        j["v"] = vec(s.v);
        j["Uu"] = vec(s.Uu);
        j["Uv"] = vec(s.Uv);
        j["eps_wdq"] = s.eps_wdq;
        j["h"] = s.h;
        if (s.P.size()) j["P"] = mat(s.P);
        if (s.Z.size()) j["Z"] = mat(s.Z);
        if (s.M.size()) j["M"] = mat(s.M);
        if (s.zeta) j["zeta"] = *s.zeta;
        if (s.J.size()) j["J"] = mat(s.J);
    }
    return j;
}

namespace {

Eigen::VectorXd read_vec(const nlohmann::json& j, const char* key, Eigen::Index n)
{
    if (!j.contains(key)) throw SolutionFormatError(std::string("solution file lacks '") + key + "'");
    const auto v = j.at(key).get<std::vector<double>>();
    if (n >= 0 && static_cast<Eigen::Index>(v.size()) != n)
        throw SolutionFormatError(std::string("'") + key + "' has " + std::to_string(v.size()) +
                                  " entries, the case needs " + std::to_string(n));
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd read_mat(const nlohmann::json& j, const char* key)
{
    const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m.cols())
            throw SolutionFormatError(std::string("'") + key + "' is ragged");
        for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
    }
    return m;
}

SolveStatus status_from(const std::string& s)
{
    for (auto st : {SolveStatus::Optimal, SolveStatus::NearOptimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                    SolveStatus::MaxIterations, SolveStatus::NumericalError})
        if (to_string(st) == s) return st;
    throw SolutionFormatError("unknown status '" + s + "'");
}

}  // namespace

SolutionBundle solution_from_json(const nlohmann::json& j, const CaseSystem& c)
{
    if (!j.is_object() || j.value("format", "") != "cscopf-solution")
        throw SolutionFormatError("not a cscopf solution file");
    const int ver = j.value("version", -1);
    if (ver != kSolutionVersion)
        throw SolutionFormatError("solution file version " + std::to_string(ver) + ", this build reads version " +
                                  std::to_string(kSolutionVersion));
    if (j.value("nb", std::size_t{0}) != c.nb() || j.value("ng", std::size_t{0}) != c.ng())
        throw SolutionFormatError("solution was written for a different case (" + j.value("case", std::string("?")) +
                                  ")");
    try {
        SolutionBundle s;
        s.status = status_from(j.at("status").get<std::string>());
        s.message = j.value("message", "");
        s.iterations = j.value("iterations", 0);
        s.objective = j.value("objective", 0.0);
        s.cost = j.value("cost", 0.0);
        const auto nb2 = static_cast<Eigen::Index>(2 * c.nb());
        const auto ng = static_cast<Eigen::Index>(c.ng());
        s.V = read_vec(j, "V", nb2);
        s.Vw = read_vec(j, "Vw", nb2);
        s.Pg = read_vec(j, "Pg", ng);
        s.Qg = read_vec(j, "Qg", ng);
        s.W = read_mat(j, "W");
        s.eps_w = j.value("eps_w", 0.0);
        if (j.contains("Vdq")) {
            s.Vdq = read_vec(j, "Vdq", 2 * ng);
            s.Vdqw = read_vec(j, "Vdqw", 2 * ng);
            s.Wdq = read_mat(j, "Wdq");
            s.u = read_vec(j, "u", ng);
            s.v = read_vec(j, "v", ng);
            s.Uu = read_vec(j, "Uu", ng);
            s.Uv = read_vec(j, "Uv", ng);
            s.eps_wdq = j.value("eps_wdq", 0.0);
            if (j.contains("h")) s.h = j.at("h").get<std::array<double, 5>>();
            if (j.contains("P")) s.P = read_mat(j, "P");
            if (j.contains("Z")) s.Z = read_mat(j, "Z");
            if (j.contains("M")) s.M = read_mat(j, "M");
            if (j.contains("J")) s.J = read_mat(j, "J");
            if (j.contains("zeta")) s.zeta = j.at("zeta").get<double>();
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw SolutionFormatError(std::string("malformed solution file: ") + e.what());
    }
}

}  // namespace cscopf
