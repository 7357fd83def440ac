#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <functional>
#include <string>
#include <vector>

#include "portpmp/model.hpp"

namespace portpmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Port input values f(t), f'(t) at one instant.
struct PortInputs {
  Vector f;
  Vector fprime;
};

/// Time-gridded record of one state/costate/control history.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> q;
  std::vector<Vector> lambda;
  std::vector<Vector> u;
  std::vector<Vector> f;
  std::vector<Vector> fprime;
  std::vector<Vector> e;
  std::vector<Vector> eprime;
  std::vector<double> y;  // accumulated running cost
  std::vector<double> I;  // accumulated port integral of e.f + e'.f'

  std::size_t size() const { return t.size(); }
  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

/// Zero-initialized evaluation slots; small layouts live on the stack.
class SlotBuffer {
 public:
  explicit SlotBuffer(std::size_t size) : size_(size) {
    if (size_ > inline_.size()) heap_.assign(size_, 0.0);
  }
  SlotBuffer(const SlotBuffer&) = delete;
  SlotBuffer& operator=(const SlotBuffer&) = delete;

  double& operator[](std::size_t i) { return data()[i]; }
  std::span<const double> view() const { return {data(), size_}; }

 private:
  double* data() { return heap_.empty() ? inline_.data() : heap_.data(); }
  const double* data() const { return heap_.empty() ? inline_.data() : heap_.data(); }

  std::array<double, 32> inline_{};
  std::vector<double> heap_;
  std::size_t size_;
};

/// Evaluator for the port-controlled equations of one problem.
///
/// On construction the outputs e = A^T F are substituted into the running
/// cost and every derivative the solvers need (dF/dq, dF/du, d2F/du2 and the
/// same for the cost) is formed symbolically. The running cost held here is
/// the *minimized* integrand: it is negated when the problem maximizes.
class Dynamics {
 public:
  /// `linked_step` is the central-difference step used for f' in linked
  /// port mode; it defaults to t1/1000.
  explicit Dynamics(ControlProblem problem, double linked_step = 0.0);

  const ControlProblem& problem() const { return problem_; }
  std::size_t n() const { return problem_.n; }
  std::size_t l() const { return problem_.l; }
  std::size_t k() const { return problem_.k; }
  double linked_step() const { return linked_step_; }

  /// True when no expression depends on t and no port signal is active, so
  /// the maximized Hamiltonian is a first integral.
  bool autonomous() const { return autonomous_; }

  PortInputs inputs(double t) const;

  /// F(q,u,t) + B(q) f'.
  Vector vector_field(const Vector& q, const Vector& u, const Vector& fprime, double t) const;
  /// F(q,u,t) alone.
  Vector drift(const Vector& q, const Vector& u, double t) const;
  /// e = A(q)^T F(q,u,t).
  Vector output_e(const Vector& q, const Vector& u, double t) const;
  /// e' = B(q)^T (dF/dq)^T lambda.
  Vector output_eprime(const Vector& q, const Vector& lambda, const Vector& u, double t) const;
  /// <lambda, F(q,u,t)>.
  double hamiltonian(const Vector& lambda, const Vector& q, const Vector& u, double t) const;
  /// <lambda, F> + I + nu * phi, with the port signals taken at t.
  double extended_hamiltonian(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                              double I) const;
  /// -(dF/dq)^T lambda - nu * dphi/dq + A(q) f.
  Vector adjoint_rhs(const Vector& lambda, const Vector& q, const Vector& u, const Vector& f, double t,
                     double nu) const;

  /// Minimized integrand (phi, or -phi for maximization) with e substituted.
  double cost_integrand(const Vector& q, const Vector& u, const PortInputs& in, double t) const;
  /// Raw running cost phi(q, u, e, f, f', t) with explicit outputs.
  double running_cost(const Vector& q, const Vector& u, const Vector& e, const PortInputs& in, double t) const;

  Matrix state_jacobian(const Vector& q, const Vector& u, double t) const;  // dF/dq, n x n

  /// Pointwise maximization objective <lambda,F> + nu*phi and its first two
  /// u-derivatives (the u-independent port terms are left out).
  double control_objective(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                           const PortInputs& in) const;
  Vector control_gradient(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                          const PortInputs& in) const;
  Matrix control_hessian(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                         const PortInputs& in) const;

  /// Notes from differentiating non-smooth nodes (abs/min/max).
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Symbolic forms, exposed for inspection and tests.
  const std::vector<Expr>& drift_exprs() const { return F_; }
  const Expr& cost_expr() const { return phi_; }

 private:
  void fill_slots(SlotBuffer& s, const Vector& q, const Vector& u, const PortInputs* in, double t) const;

  ControlProblem problem_;
  SymbolLayout layout_;
  double linked_step_;
  bool autonomous_;

  std::vector<Expr> F_;                    // n
  std::vector<Expr> A_, B_;                // n*k row-major
  std::vector<std::vector<Expr>> dF_dq_;   // [i][j] = dF_i/dq_j
  std::vector<std::vector<Expr>> dF_du_;   // [i][j] = dF_i/du_j
  std::vector<std::vector<std::vector<Expr>>> d2F_du2_;  // [i][j][m]
  Expr phi_;                                // e substituted, sign-adjusted
  std::vector<Expr> dphi_dq_;
  std::vector<Expr> dphi_du_;
  std::vector<std::vector<Expr>> d2phi_du2_;
  std::vector<std::string> warnings_;
};

/// Right-hand side of a first-order system z' = rhs(t, z).
using Field = std::function<Vector(double t, const Vector& z)>;

/// Classical fourth-order Runge-Kutta on a uniform grid of `steps` steps from
/// t0 to t1. `observer(i, t_i, z_i)` is called at every node including both
/// ends. Throws IntegrationError on the first non-finite value.
void rk4(const Field& rhs, const Vector& z0, double t0, double t1, std::size_t steps,
         const std::function<void(std::size_t, double, const Vector&)>& observer);

/// Feedback law u = law(t, q, lambda) evaluated at every Runge-Kutta stage.
using ControlLaw = std::function<Vector(double t, const Vector& q, const Vector& lambda)>;

/// Integrates the coupled state/costate system
///
///   q' = F + B f',  lambda' = adjoint_rhs,  y' = phi,  I' = e.f + e'.f'
///
/// from (q0, lambda0, 0, 0) over [0, t1] in `steps` uniform steps.
Trajectory integrate_coupled(const Dynamics& dyn, const ControlLaw& law, const Vector& lambda0, double nu,
                             std::size_t steps);

}  // namespace portpmp
