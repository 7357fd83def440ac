#include "portpmp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "portpmp/error.hpp"

namespace portpmp {

namespace {

bool signal_is_zero(const Signal& s) {
  if (s.is_table()) {
    for (const auto& row : s.rows()) {
      if (row.second != 0.0) return false;
    }
    return true;
  }
  return s.expr().is_constant() && s.expr().constant_value() == 0.0;
}

}  // namespace

Dynamics::Dynamics(ControlProblem problem, double linked_step)
    : problem_(std::move(problem)),
      layout_(problem_.layout()),
      linked_step_(linked_step > 0.0 ? linked_step : problem_.t1 / 1000.0) {
  const std::size_t n = problem_.n, l = problem_.l, k = problem_.k;
  const SymbolTable symbols = layout_.all();

  for (const auto& e : problem_.dynamics) F_.push_back(e.rebind(symbols));
  for (const auto& e : problem_.port_A) A_.push_back(e.rebind(symbols));
  for (const auto& e : problem_.port_B) B_.push_back(e.rebind(symbols));

  // phi with every output e_p replaced by sum_i A_ip F_i.
  Expr phi = problem_.running_cost;
  for (std::size_t p = 0; p < k; ++p) {
    Expr effort = Expr::constant(0.0);
    for (std::size_t i = 0; i < n; ++i) effort = effort + problem_.A(i, p) * problem_.dynamics[i];
    phi = phi.substitute(layout_.effort_name(p), effort);
  }
  if (problem_.sense == Sense::kMaximize) phi = -phi;
  phi_ = phi.rebind(symbols);

  dF_dq_.assign(n, std::vector<Expr>(n));
  dF_du_.assign(n, std::vector<Expr>(l));
  d2F_du2_.assign(n, std::vector<std::vector<Expr>>(l, std::vector<Expr>(l)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dF_dq_[i][j] = F_[i].diff(layout_.state_name(j), &warnings_).rebind(symbols);
    for (std::size_t j = 0; j < l; ++j) {
      Expr d = F_[i].diff(layout_.control_name(j), &warnings_);
      dF_du_[i][j] = d.rebind(symbols);
      for (std::size_t m = 0; m < l; ++m) {
        d2F_du2_[i][j][m] = d.diff(layout_.control_name(m), &warnings_).rebind(symbols);
      }
    }
  }
  dphi_dq_.resize(n);
  for (std::size_t j = 0; j < n; ++j) dphi_dq_[j] = phi_.diff(layout_.state_name(j), &warnings_).rebind(symbols);
  dphi_du_.resize(l);
  d2phi_du2_.assign(l, std::vector<Expr>(l));
  for (std::size_t j = 0; j < l; ++j) {
    Expr d = phi_.diff(layout_.control_name(j), &warnings_);
    dphi_du_[j] = d.rebind(symbols);
    for (std::size_t m = 0; m < l; ++m) d2phi_du2_[j][m] = d.diff(layout_.control_name(m), &warnings_).rebind(symbols);
  }

  autonomous_ = !phi_.depends_on("t");
  for (const auto& e : F_) autonomous_ = autonomous_ && !e.depends_on("t");
  for (const auto& s : problem_.signal_f) autonomous_ = autonomous_ && signal_is_zero(s);
  if (problem_.port_mode == PortMode::kIndependent) {
    for (const auto& s : problem_.signal_fprime) autonomous_ = autonomous_ && signal_is_zero(s);
  }
}

PortInputs Dynamics::inputs(double t) const {
  const std::size_t k = problem_.k;
  PortInputs in{Vector::Zero(k), Vector::Zero(k)};
  for (std::size_t p = 0; p < k; ++p) {
    in.f[p] = problem_.signal_f[p](t);
    if (problem_.port_mode == PortMode::kLinked) {
      const double h = linked_step_;
      in.fprime[p] = (problem_.signal_f[p](t + h) - problem_.signal_f[p](t - h)) / (2.0 * h);
    } else {
      in.fprime[p] = problem_.signal_fprime[p](t);
    }
  }
  return in;
}

void Dynamics::fill_slots(SlotBuffer& s, const Vector& q, const Vector& u, const PortInputs* in, double t) const {
  s[layout_.time()] = t;
  for (std::size_t i = 0; i < problem_.n; ++i) s[layout_.state(i)] = q[static_cast<Eigen::Index>(i)];
  const std::size_t l = std::min<std::size_t>(problem_.l, static_cast<std::size_t>(u.size()));
  for (std::size_t j = 0; j < l; ++j) s[layout_.control(j)] = u[static_cast<Eigen::Index>(j)];
  if (in != nullptr) {
    for (std::size_t p = 0; p < problem_.k; ++p) {
      s[layout_.flow(p)] = in->f[static_cast<Eigen::Index>(p)];
      s[layout_.lift(p)] = in->fprime[static_cast<Eigen::Index>(p)];
    }
  }
}

Vector Dynamics::drift(const Vector& q, const Vector& u, double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, nullptr, t);
  Vector out(problem_.n);
  for (std::size_t i = 0; i < problem_.n; ++i) out[i] = F_[i].eval(s.view());
  return out;
}

Vector Dynamics::vector_field(const Vector& q, const Vector& u, const Vector& fprime, double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, nullptr, t);
  const std::size_t n = problem_.n, k = problem_.k;
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = F_[i].eval(s.view());
    for (std::size_t p = 0; p < k; ++p) v += B_[i * k + p].eval(s.view()) * fprime[p];
    out[i] = v;
  }
  return out;
}

Vector Dynamics::output_e(const Vector& q, const Vector& u, double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, nullptr, t);
  const std::size_t n = problem_.n, k = problem_.k;
  Vector F(n);
  for (std::size_t i = 0; i < n; ++i) F[i] = F_[i].eval(s.view());
  Vector e = Vector::Zero(k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < n; ++i) e[p] += A_[i * k + p].eval(s.view()) * F[i];
  }
  return e;
}

Matrix Dynamics::state_jacobian(const Vector& q, const Vector& u, double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, nullptr, t);
  const std::size_t n = problem_.n;
  Matrix J(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) J(i, j) = dF_dq_[i][j].eval(s.view());
  }
  return J;
}

Vector Dynamics::output_eprime(const Vector& q, const Vector& lambda, const Vector& u, double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, nullptr, t);
  const std::size_t n = problem_.n, k = problem_.k;
  Vector dh = state_jacobian(q, u, t).transpose() * lambda;
  Vector out = Vector::Zero(k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < n; ++i) out[p] += B_[i * k + p].eval(s.view()) * dh[i];
  }
  return out;
}

double Dynamics::hamiltonian(const Vector& lambda, const Vector& q, const Vector& u, double t) const {
  return lambda.dot(drift(q, u, t));
}

double Dynamics::cost_integrand(const Vector& q, const Vector& u, const PortInputs& in, double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, &in, t);
  return phi_.eval(s.view());
}

double Dynamics::running_cost(const Vector& q, const Vector& u, const Vector& e, const PortInputs& in,
                              double t) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, &in, t);
  for (std::size_t p = 0; p < problem_.k; ++p) s[layout_.effort(p)] = e[p];
  return problem_.running_cost.rebind(layout_.all()).eval(s.view());
}

double Dynamics::extended_hamiltonian(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                                      double I) const {
  const PortInputs in = inputs(t);
  return hamiltonian(lambda, q, u, t) + I + nu * cost_integrand(q, u, in, t);
}

Vector Dynamics::adjoint_rhs(const Vector& lambda, const Vector& q, const Vector& u, const Vector& f, double t,
                             double nu) const {
  PortInputs in = inputs(t);
  in.f = f;
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, &in, t);
  const std::size_t n = problem_.n, k = problem_.k;
  Vector out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v -= dF_dq_[i][j].eval(s.view()) * lambda[i];
    if (nu != 0.0) v -= nu * dphi_dq_[j].eval(s.view());
    for (std::size_t p = 0; p < k; ++p) v += A_[j * k + p].eval(s.view()) * f[p];
    out[j] = v;
  }
  return out;
}

double Dynamics::control_objective(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                                   const PortInputs& in) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, &in, t);
  double v = 0.0;
  for (std::size_t i = 0; i < problem_.n; ++i) v += lambda[i] * F_[i].eval(s.view());
  if (nu != 0.0) v += nu * phi_.eval(s.view());
  return v;
}

Vector Dynamics::control_gradient(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                                  const PortInputs& in) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, &in, t);
  const std::size_t n = problem_.n, l = problem_.l;
  Vector g(l);
  for (std::size_t j = 0; j < l; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += lambda[i] * dF_du_[i][j].eval(s.view());
    if (nu != 0.0) v += nu * dphi_du_[j].eval(s.view());
    g[j] = v;
  }
  return g;
}

Matrix Dynamics::control_hessian(const Vector& lambda, const Vector& q, const Vector& u, double t, double nu,
                                 const PortInputs& in) const {
  SlotBuffer s(layout_.size());
  fill_slots(s, q, u, &in, t);
  const std::size_t n = problem_.n, l = problem_.l;
  Matrix H(l, l);
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t m = 0; m < l; ++m) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += lambda[i] * d2F_du2_[i][j][m].eval(s.view());
      if (nu != 0.0) v += nu * d2phi_du2_[j][m].eval(s.view());
      H(j, m) = v;
    }
  }
  return H;
}

// ---------------------------------------------------------------- integration

void rk4(const Field& rhs, const Vector& z0, double t0, double t1, std::size_t steps,
         const std::function<void(std::size_t, double, const Vector&)>& observer) {
  const double h = (t1 - t0) / static_cast<double>(steps);
  // Library errors inside a step surface as IntegrationError naming the step.
  auto guarded = [](std::size_t step, double t, auto&& body) {
    try {
      body();
    } catch (const IntegrationError&) {
      throw;
    } catch (const UnboundedHamiltonian&) {
      throw;
    } catch (const Error& err) {
      throw IntegrationError(err.what(), step, t);
    }
  };
  Vector z = z0;
  guarded(0, t0, [&] { observer(0, t0, z); });
  for (std::size_t i = 0; i < steps; ++i) {
    // Nodes are computed from the index so the grid carries no drift.
    const double t = t0 + static_cast<double>(i) * h;
    const double t_next = i + 1 == steps ? t1 : t0 + static_cast<double>(i + 1) * h;
    guarded(i, t, [&] {
      Vector k1 = rhs(t, z);
      Vector k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
      Vector k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
      Vector k4 = rhs(t + h, z + h * k3);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    });
    if (!z.allFinite()) throw IntegrationError("non-finite state", i + 1, t_next);
    guarded(i + 1, t_next, [&] { observer(i + 1, t_next, z); });
  }
}

Trajectory integrate_coupled(const Dynamics& dyn, const ControlLaw& law, const Vector& lambda0, double nu,
                             std::size_t steps) {
  if (steps < 2) throw ValidationError("integration needs at least 2 steps");
  const ControlProblem& p = dyn.problem();
  const std::size_t n = p.n;
  const Eigen::Index ni = static_cast<Eigen::Index>(n);

  // z = (q, lambda, y, I)
  Field rhs = [&](double t, const Vector& z) -> Vector {
    Vector q = z.head(ni);
    Vector lambda = z.segment(ni, ni);
    Vector u = law(t, q, lambda);
    PortInputs in = dyn.inputs(t);
    Vector dz(2 * ni + 2);
    dz.head(ni) = dyn.vector_field(q, u, in.fprime, t);
    dz.segment(ni, ni) = dyn.adjoint_rhs(lambda, q, u, in.f, t, nu);
    dz[2 * ni] = dyn.cost_integrand(q, u, in, t);
    double port = 0.0;
    if (p.k > 0) port = dyn.output_e(q, u, t).dot(in.f) + dyn.output_eprime(q, lambda, u, t).dot(in.fprime);
    dz[2 * ni + 1] = port;
    return dz;
  };

  Vector z0(2 * ni + 2);
  z0.head(ni) = Eigen::Map<const Vector>(p.q0.data(), ni);
  z0.segment(ni, ni) = lambda0;
  z0[2 * ni] = 0.0;
  z0[2 * ni + 1] = 0.0;

  Trajectory traj;
  auto reserve = [&](auto& v) { v.reserve(steps + 1); };
  reserve(traj.t), reserve(traj.q), reserve(traj.lambda), reserve(traj.u), reserve(traj.f);
  reserve(traj.fprime), reserve(traj.e), reserve(traj.eprime), reserve(traj.y), reserve(traj.I);

  rk4(rhs, z0, 0.0, p.t1, steps, [&](std::size_t i, double t, const Vector& z) {
    Vector q = z.head(ni);
    Vector lambda = z.segment(ni, ni);
    Vector u;
    PortInputs in;
    try {
      u = law(t, q, lambda);
      in = dyn.inputs(t);
    } catch (const IntegrationError&) {
      throw;
    } catch (const UnboundedHamiltonian&) {
      throw;
    } catch (const Error& err) {
      throw IntegrationError(err.what(), i, t);
    }
    traj.t.push_back(t);
    traj.e.push_back(dyn.output_e(q, u, t));
    traj.eprime.push_back(dyn.output_eprime(q, lambda, u, t));
    traj.q.push_back(std::move(q));
    traj.lambda.push_back(std::move(lambda));
    traj.u.push_back(std::move(u));
    traj.f.push_back(std::move(in.f));
    traj.fprime.push_back(std::move(in.fprime));
    traj.y.push_back(z[2 * ni]);
    traj.I.push_back(z[2 * ni + 1]);
  });
  return traj;
}

}  // namespace portpmp
