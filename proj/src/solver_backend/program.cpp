#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cscopf/program.hpp"

namespace cscopf {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
}

LinExpr& LinExpr::operator+=(const LinExpr& o)
{
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o)
{
    terms.reserve(terms.size() + o.terms.size());
    for (auto [j, a] : o.terms) terms.emplace_back(j, -a);
    constant -= o.constant;
    return *this;
}

LinExpr& LinExpr::operator*=(double a)
{
    for (auto& t : terms) t.second *= a;
    constant *= a;
    return *this;
}

LinExpr& LinExpr::compress()
{
    std::sort(terms.begin(), terms.end(), [](auto& x, auto& y) { return x.first < y.first; });
    std::vector<std::pair<int, double>> out;
    out.reserve(terms.size());
    for (auto& t : terms) {
        if (!out.empty() && out.back().first == t.first)
            out.back().second += t.second;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](auto& t) { return t.second == 0.0; });
    terms = std::move(out);
    return *this;
}

double LinExpr::eval(const Eigen::VectorXd& x) const
{
    double v = constant;
    for (auto [j, a] : terms) v += a * x(j);
    return v;
}

bool LinExpr::is_constant() const
{
    return std::all_of(terms.begin(), terms.end(), [](auto& t) { return t.second == 0.0; });
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }

int VarBlock::index(int i, int j) const
{
    if (i < 0 || j < 0 || i >= rows || j >= cols)
        throw std::out_of_range("variable '" + name + "' index out of range");
    if (!symmetric) return offset + i + j * rows;
    if (i < j) std::swap(i, j);
    // lower triangle, column-major
    return offset + j * rows - j * (j - 1) / 2 + (i - j);
}

int ConeDims::rows() const
{
    int r = nonneg;
    for (int q : soc) r += q;
    for (int s : psd) r += s * (s + 1) / 2;
    return r;
}

int ConeDims::degree() const
{
    int d = nonneg + static_cast<int>(soc.size());
    for (int s : psd) d += s;
    return d;
}

int svec_size(int n) { return n * (n + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& M)
{
    const int n = static_cast<int>(M.rows());
    Eigen::VectorXd v(svec_size(n));
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) v(k++) = (i == j) ? M(i, j) : kSqrt2 * 0.5 * (M(i, j) + M(j, i));
    return v;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    const int n = static_cast<int>(std::lround((std::sqrt(8.0 * v.size() + 1) - 1) / 2));
    Eigen::MatrixXd M(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) {
            const double x = v(k++);
            if (i == j)
                M(i, i) = x;
            else
                M(i, j) = M(j, i) = x / kSqrt2;
        }
    return M;
}

VarBlock ConicProgram::add_block(const std::string& name, int r, int c, bool sym)
{
    if (find(name)) throw std::invalid_argument("duplicate variable block '" + name + "'");
    if (r <= 0 || c <= 0) throw std::invalid_argument("empty variable block '" + name + "'");
    VarBlock b{name, nvars_, r, c, sym};
    nvars_ += b.size();
    vars_.push_back(b);
    return b;
}

const VarBlock* ConicProgram::find(const std::string& name) const
{
    for (auto& b : vars_)
        if (b.name == name) return &b;
    return nullptr;
}

const VarBlock& ConicProgram::block(const std::string& name) const
{
    if (auto* b = find(name)) return *b;
    throw std::out_of_range("no variable block '" + name + "'");
}

void ConicProgram::add_eq(LinExpr e, const std::string& tag)
{
    e.compress();
    cons_.push_back({ConeKind::Zero, tag, 1, {std::move(e)}});
}

void ConicProgram::add_ge(LinExpr e, const std::string& tag)
{
    e.compress();
    cons_.push_back({ConeKind::NonNeg, tag, 1, {std::move(e)}});
}

void ConicProgram::add_soc(std::vector<LinExpr> rows, const std::string& tag)
{
    if (rows.empty()) throw std::invalid_argument("empty SOC constraint '" + tag + "'");
    for (auto& r : rows) r.compress();
    const int q = static_cast<int>(rows.size());
    cons_.push_back({ConeKind::SOC, tag, q, std::move(rows)});
}

void ConicProgram::add_rotated_soc(const LinExpr& t, const LinExpr& u, const LinExpr& a,
                                   const std::string& tag)
{
    add_soc({t + u, 2.0 * a, t - u}, tag);
}

void ConicProgram::add_psd(int order, const std::function<LinExpr(int, int)>& entry,
                           const std::string& tag)
{
    ConstraintBlock cb{ConeKind::PSD, tag, order, {}};
    cb.rows.reserve(svec_size(order));
    for (int j = 0; j < order; ++j)
        for (int i = j; i < order; ++i) cb.rows.push_back(entry(i, j).compress());
    cons_.push_back(std::move(cb));
}

ConicForm ConicProgram::lower() const
{
    ConicForm f;
    const int n = nvars_;
    f.c = Eigen::VectorXd::Zero(n);
    for (auto [j, a] : objective_.terms) f.c(j) += a;
    f.c0 = objective_.constant;

    // cone ordering: nonneg, then SOC, then PSD
    std::vector<int> lin, soc, psd, eq;
    for (int i = 0; i < static_cast<int>(cons_.size()); ++i) {
        switch (cons_[i].kind) {
        case ConeKind::Zero: eq.push_back(i); break;
        case ConeKind::NonNeg: lin.push_back(i); break;
        case ConeKind::SOC: soc.push_back(i); break;
        case ConeKind::PSD: psd.push_back(i); break;
        }
    }

    std::vector<Eigen::Triplet<double>> ta, tg;
    std::vector<double> b, h;
    for (int i : eq) {
        const auto& e = cons_[i].rows[0];
        const int r = static_cast<int>(b.size());
        for (auto [j, a] : e.terms) ta.emplace_back(r, j, a);
        b.push_back(-e.constant);
        f.a_block_of_row.push_back(i);
    }
    // h - G x = e(x)  =>  G = -coef, h = const
    auto emit = [&](int i, const LinExpr& e, double scale) {
        const int r = static_cast<int>(h.size());
        for (auto [j, a] : e.terms) tg.emplace_back(r, j, -scale * a);
        h.push_back(scale * e.constant);
        f.g_block_of_row.push_back(i);
    };
    for (int i : lin) emit(i, cons_[i].rows[0], 1.0);
    f.dims.nonneg = static_cast<int>(lin.size());
    for (int i : soc) {
        for (auto& e : cons_[i].rows) emit(i, e, 1.0);
        f.dims.soc.push_back(cons_[i].order);
    }
    for (int i : psd) {
        const int d = cons_[i].order;
        int k = 0;
        for (int j = 0; j < d; ++j)
            for (int r = j; r < d; ++r) emit(i, cons_[i].rows[k++], r == j ? 1.0 : kSqrt2);
        f.dims.psd.push_back(d);
    }

    f.A.resize(static_cast<Eigen::Index>(b.size()), n);
    f.A.setFromTriplets(ta.begin(), ta.end());
    f.b = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    f.G.resize(static_cast<Eigen::Index>(h.size()), n);
    f.G.setFromTriplets(tg.begin(), tg.end());
    f.h = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    f.A.makeCompressed();
    f.G.makeCompressed();
    return f;
}

double ConicProgram::violation(const ConstraintBlock& cb, const Eigen::VectorXd& x) const
{
    // scale: 1 + largest |term| in the block, so big-valued rows are judged relatively
    double scale = 1.0;
    for (auto& e : cb.rows) {
        scale = std::max(scale, std::abs(e.constant));
        for (auto [j, a] : e.terms) scale = std::max(scale, std::abs(a * x(j)));
    }
    switch (cb.kind) {
    case ConeKind::Zero: return std::abs(cb.rows[0].eval(x)) / scale;
    case ConeKind::NonNeg: return std::max(0.0, -cb.rows[0].eval(x)) / scale;
    case ConeKind::SOC: {
        double t = cb.rows[0].eval(x), nrm = 0;
        for (std::size_t i = 1; i < cb.rows.size(); ++i) {
            const double v = cb.rows[i].eval(x);
            nrm += v * v;
        }
        return std::max(0.0, std::sqrt(nrm) - t) / scale;
    }
    case ConeKind::PSD: {
        const int d = cb.order;
        Eigen::MatrixXd M(d, d);
        int k = 0;
        for (int j = 0; j < d; ++j)
            for (int i = j; i < d; ++i) M(i, j) = M(j, i) = cb.rows[k++].eval(x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        return std::max(0.0, -es.eigenvalues()(0)) / scale;
    }
    }
    return 0;
}

nlohmann::json ConicProgram::dump(const Eigen::VectorXd* x) const
{
    using nlohmann::json;
    auto expr = [](const LinExpr& e) {
        json t = json::array();
        for (auto [j, a] : e.terms) t.push_back({j, a});
        return json{{"terms", t}, {"const", e.constant}};
    };
    json j;
    j["num_vars"] = nvars_;
    json vb = json::array();
    for (auto& b : vars_)
        vb.push_back({{"name", b.name}, {"offset", b.offset}, {"rows", b.rows}, {"cols", b.cols},
                      {"symmetric", b.symmetric}});
    j["variables"] = vb;
    j["objective"] = expr(objective_);
    json cs = json::array();
    for (auto& cb : cons_) {
        static const char* names[] = {"eq", "ge", "soc", "psd"};
        json rows = json::array();
        for (auto& e : cb.rows) rows.push_back(expr(e));
        cs.push_back({{"kind", names[static_cast<int>(cb.kind)]}, {"tag", cb.tag},
                      {"order", cb.order}, {"rows", rows}});
    }
    j["constraints"] = cs;
    if (x) j["x"] = std::vector<double>(x->data(), x->data() + x->size());
    return j;
}

}  // namespace cscopf
