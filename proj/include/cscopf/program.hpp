#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

namespace cscopf {

// affine expression sum_j a_j x_j + c over program scalars
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0;

    LinExpr() = default;
    LinExpr(double c) : constant(c) {}  // NOLINT implicit on purpose
    static LinExpr var(int j, double a = 1.0)
    {
        LinExpr e;
        e.terms.emplace_back(j, a);
        return e;
    }

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double a);
    LinExpr& add(int j, double a)
    {
        if (a != 0.0) terms.emplace_back(j, a);
        return *this;
    }
    // merges duplicate indices and drops zeros
    LinExpr& compress();
    double eval(const Eigen::VectorXd& x) const;
    bool is_constant() const;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a);
LinExpr operator*(double s, LinExpr a);
LinExpr operator*(LinExpr a, double s);

// a named group of program scalars; symmetric blocks store the lower triangle only
struct VarBlock {
    std::string name;
    int offset = 0;
    int rows = 0, cols = 0;
    bool symmetric = false;

    int size() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
    int index(int i, int j = 0) const;
    LinExpr operator()(int i, int j = 0) const { return LinExpr::var(index(i, j)); }
};

enum class ConeKind { Zero, NonNeg, SOC, PSD };

struct ConstraintBlock {
    ConeKind kind;
    std::string tag;
    int order = 0;               // PSD matrix order; SOC / linear: number of rows
    std::vector<LinExpr> rows;   // PSD: lower triangle, column-major
};

// Standard form: min c'x + c0  s.t.  A x = b,  h - G x in K.
// K = R+^l x SOC(q_1) x ... x PSD(s_1) x ... with PSD blocks in scaled svec order
// (lower triangle column-major, off-diagonals times sqrt 2).
struct ConeDims {
    int nonneg = 0;
    std::vector<int> soc;
    std::vector<int> psd;

    int rows() const;
    int degree() const;
};

using SpMat = Eigen::SparseMatrix<double>;

struct ConicForm {
    Eigen::VectorXd c;
    double c0 = 0;
    SpMat A;
    Eigen::VectorXd b;
    SpMat G;
    Eigen::VectorXd h;
    ConeDims dims;
    // maps G rows back to program constraint blocks (for diagnostics)
    std::vector<int> g_block_of_row, a_block_of_row;
};

class ConicProgram {
public:
    VarBlock add_scalar(const std::string& name) { return add_block(name, 1, 1, false); }
    VarBlock add_vector(const std::string& name, int n) { return add_block(name, n, 1, false); }
    VarBlock add_matrix(const std::string& name, int r, int c) { return add_block(name, r, c, false); }
    VarBlock add_symmetric(const std::string& name, int n) { return add_block(name, n, n, true); }

    void add_eq(LinExpr e, const std::string& tag);
    void add_ge(LinExpr e, const std::string& tag);  // e >= 0
    void add_le(LinExpr a, const LinExpr& b, const std::string& tag) { add_ge(b - a, tag); }
    // rows[0] >= || rows[1:] ||
    void add_soc(std::vector<LinExpr> rows, const std::string& tag);
    // ||(2 a, t - u)|| <= t + u  i.e.  a^2 <= t u with t, u >= 0
    void add_rotated_soc(const LinExpr& t, const LinExpr& u, const LinExpr& a, const std::string& tag);
    // entry(i, j) for i >= j gives the lower triangle of a symmetric affine matrix
    void add_psd(int order, const std::function<LinExpr(int, int)>& entry, const std::string& tag);

    void add_objective(const LinExpr& e) { objective_ += e; }
    const LinExpr& objective() const { return objective_; }

    int num_vars() const { return nvars_; }
    const std::vector<VarBlock>& blocks() const { return vars_; }
    const VarBlock* find(const std::string& name) const;
    const VarBlock& block(const std::string& name) const;
    const std::vector<ConstraintBlock>& constraints() const { return cons_; }

    ConicForm lower() const;
    nlohmann::json dump(const Eigen::VectorXd* x = nullptr) const;

    // residual of one block at x, scaled by the magnitude of its terms (0 = satisfied)
    double violation(const ConstraintBlock& cb, const Eigen::VectorXd& x) const;

private:
    VarBlock add_block(const std::string& name, int r, int c, bool sym);
    std::vector<VarBlock> vars_;
    std::vector<ConstraintBlock> cons_;
    LinExpr objective_;
    int nvars_ = 0;
};

// helpers for svec/smat in the scaled convention
int svec_size(int n);
Eigen::VectorXd svec(const Eigen::MatrixXd& M);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace cscopf
