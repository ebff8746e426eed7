#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cscopf/case.hpp"
#include "cscopf/network.hpp"

namespace cscopf {

inline constexpr double kOmegaBase = 2.0 * 3.14159265358979323846 * 60.0;

// Index map of z = [x; y]
//   x = [delta (ng), omega (ng), Eq' (ng), Ed' (ng)]
//   y = [Vx (nb), Vy (nb), Vd (ng), Vq (ng)]
struct DaeLayout {
    std::size_t nb = 0, ng = 0;

    DaeLayout() = default;
    explicit DaeLayout(const CaseSystem& c) : nb(c.nb()), ng(c.ng()) {}

    std::size_t n() const { return 4 * ng; }
    std::size_t m() const { return 2 * nb + 2 * ng; }
    std::size_t size() const { return n() + m(); }

    std::size_t delta(std::size_t i) const { return i; }
    std::size_t omega(std::size_t i) const { return ng + i; }
    std::size_t eq(std::size_t i) const { return 2 * ng + i; }
    std::size_t ed(std::size_t i) const { return 3 * ng + i; }
    std::size_t vx(std::size_t k) const { return n() + k; }
    std::size_t vy(std::size_t k) const { return n() + nb + k; }
    std::size_t vd(std::size_t i) const { return n() + 2 * nb + i; }
    std::size_t vq(std::size_t i) const { return n() + 2 * nb + ng + i; }

    // row blocks of g
    std::size_t row_p(std::size_t k) const { return n() + k; }
    std::size_t row_q(std::size_t k) const { return n() + nb + k; }
    std::size_t row_park_d(std::size_t i) const { return n() + 2 * nb + i; }
    std::size_t row_park_q(std::size_t i) const { return n() + 2 * nb + ng + i; }
};

// omega is the rotor speed deviation in electrical rad/s (zero at equilibrium)
struct DynamicState {
    Eigen::VectorXd delta, omega, Eq, Ed, Ef, Pm;  // per generator
    Eigen::VectorXd Vx, Vy;                        // per bus
    Eigen::VectorXd Vd, Vq;                        // per generator

    Eigen::VectorXd z(const DaeLayout& L) const;
    void set_z(const DaeLayout& L, const Eigen::VectorXd& z);
};

class InitError : public std::runtime_error {
public:
    InitError(std::size_t gen, const std::string& what) : std::runtime_error(what), gen_(gen) {}
    std::size_t generator() const { return gen_; }

private:
    std::size_t gen_;
};

class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EigenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InitOptions {
    std::optional<double> ef_max;  // optional field voltage ceiling, pu
};

// Equilibrium from terminal conditions (V, Pg, Qg); omega = 0, Pm = Pg.
DynamicState init_operating_point(const CaseSystem& c, const Eigen::VectorXcd& V,
                                  const Eigen::VectorXd& Pg, const Eigen::VectorXd& Qg,
                                  const InitOptions& opt = {});

// Stacked residual F(z) = [f; g] with Pm, Ef and loads taken from `st` and the case.
Eigen::VectorXd dae_residual(const CaseSystem& c, const NetworkMatrices& net,
                             const DynamicState& st, const Eigen::VectorXd& z);

// Steady-state stator/network relations per generator, (a) real and (b) reactive.
struct StatorResidual {
    double a = 0, b = 0;
};
std::vector<StatorResidual> stator_residual(const CaseSystem& c, const DynamicState& st,
                                            const Eigen::VectorXd& Pg, const Eigen::VectorXd& Qg);

// Parameters the Jacobian is affine in. U, V stand for sin(delta), cos(delta).
enum class JParam { Vx, Vy, Vd, Vq, U, V, Eq, Ed };
const char* to_string(JParam p);

struct JSensitivity {
    JParam kind;
    std::size_t index;
    SpMat Jk;
};

struct JacobianAffine {
    DaeLayout layout;
    Eigen::MatrixXd J0;
    std::vector<JSensitivity> terms;
    Eigen::VectorXd E;  // diagonal selector, 1 on the dynamic states

    std::size_t n() const { return layout.n(); }
    std::size_t m() const { return layout.m(); }

    // parameter vector p in the order of `terms`
    Eigen::MatrixXd evaluate(const Eigen::VectorXd& p) const;
    Eigen::VectorXd params_of(const DynamicState& st) const;
};

// J(p) = J0 + sum_k p_k J_k; exact derivative of dae_residual wherever the Park relations hold
JacobianAffine build_jacobian_affine(const CaseSystem& c, const NetworkMatrices& net);
Eigen::MatrixXd build_jacobian(const JacobianAffine& ja, const DynamicState& st);

// central differences of dae_residual, for validation
Eigen::MatrixXd finite_difference_jacobian(const CaseSystem& c, const NetworkMatrices& net,
                                           const DynamicState& st, double h = 1e-7);

struct JacobianBlocks {
    Eigen::MatrixXd A, B, C, D;
};
JacobianBlocks split_blocks(const Eigen::MatrixXd& J, std::size_t n);

// J_r = A - B D^{-1} C; throws SingularityError when rcond(D) < rcond_min
Eigen::MatrixXd reduced_jacobian(const Eigen::MatrixXd& J, std::size_t n, double rcond_min = 1e-10);

// Removes the rigid rotation of all rotor angles (an exact zero eigenvalue of J_r):
// states are re-expressed relative to generator 0's angle and that angle is dropped.
Eigen::MatrixXd angle_referenced(const Eigen::MatrixXd& Jr, std::size_t ng);

struct Spectrum {
    double sigma_max = 0;
    int n_rhp = 0;
    std::vector<std::complex<double>> eigenvalues;
};

Spectrum spectral_abscissa(const Eigen::MatrixXd& A, double rhp_tol = 1e-9);

}  // namespace cscopf
