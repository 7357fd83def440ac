#include "portpmp/indirect.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace portpmp {

std::vector<std::string> SolverConfig::problems() const {
  std::vector<std::string> out;
  if (steps < 2) out.emplace_back("steps");
  if (!(tol > 0.0)) out.emplace_back("tol");
  if (max_newton == 0) out.emplace_back("max_newton");
  if (!(fd_step > 0.0)) out.emplace_back("fd_step");
  if (grid_points < 2) out.emplace_back("grid_points");
  if (refine_iterations == 0) out.emplace_back("refine_iterations");
  return out;
}

namespace {

constexpr double kGolden = 0.6180339887498949;

std::string control_label(std::size_t j) { return "u" + std::to_string(j + 1); }

std::string time_label(double t) {
  std::ostringstream s;
  s << t;
  return s.str();
}

// Objective restricted to the maximization at one instant.
struct PointObjective {
  const Dynamics& dyn;
  const Vector& lambda;
  const Vector& q;
  double t;
  double nu;
  PortInputs in;

  double operator()(const Vector& u) const { return dyn.control_objective(lambda, q, u, t, nu, in); }
  Vector gradient(const Vector& u) const { return dyn.control_gradient(lambda, q, u, t, nu, in); }
  Matrix hessian(const Vector& u) const { return dyn.control_hessian(lambda, q, u, t, nu, in); }
};

bool inside(const std::vector<Interval>& box, const Vector& u) {
  for (std::size_t j = 0; j < box.size(); ++j) {
    if (!box[j].contains(u[j])) return false;
  }
  return true;
}

// Box-constrained maximum of a strictly concave quadratic by cyclic exact
// coordinate maximization.
Vector coordinate_ascent(const PointObjective& obj, const std::vector<Interval>& box, Vector u, const Matrix& H) {
  for (std::size_t j = 0; j < box.size(); ++j) u[j] = box[j].clamp(u[j]);
  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (std::size_t j = 0; j < box.size(); ++j) {
      const Eigen::Index jj = static_cast<Eigen::Index>(j);
      double g = obj.gradient(u)[jj];
      double next = box[j].clamp(u[jj] - g / H(jj, jj));
      change = std::max(change, std::fabs(next - u[jj]));
      u[jj] = next;
    }
    if (change <= 1e-15 * (1.0 + u.lpNorm<Eigen::Infinity>())) break;
  }
  return u;
}

struct NewtonPoint {
  Vector u;
  bool quadratic = false;
};

std::optional<NewtonPoint> concave_maximum(const PointObjective& obj, const std::vector<Interval>& box,
                                           const Vector& u0) {
  Matrix H0 = obj.hessian(u0);
  Eigen::LLT<Matrix> llt(-H0);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Vector u1 = u0 + llt.solve(obj.gradient(u0));
  if (!u1.allFinite()) return std::nullopt;
  Matrix H1 = obj.hessian(u1);
  const bool quadratic = (H1 - H0).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + H0.lpNorm<Eigen::Infinity>());
  if (quadratic) {
    if (inside(box, u1)) return NewtonPoint{u1, true};
    return NewtonPoint{coordinate_ascent(obj, box, u1, H0), true};
  }
  // Concave but not quadratic: continue Newton while concavity holds.
  Vector u = u1;
  for (int it = 0; it < 50; ++it) {
    Matrix H = obj.hessian(u);
    Eigen::LLT<Matrix> step(-H);
    if (step.info() != Eigen::Success) return std::nullopt;
    Vector du = step.solve(obj.gradient(u));
    u += du;
    if (!u.allFinite()) return std::nullopt;
    if (du.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + u.lpNorm<Eigen::Infinity>())) {
      if (!inside(box, u)) return std::nullopt;
      return NewtonPoint{u, false};
    }
  }
  return std::nullopt;
}

// Local concavity at a Newton point says nothing about the rest of the box:
// probe each coordinate on the grid (bounded) or far out (unbounded).
bool beats_probes(const PointObjective& obj, const std::vector<Interval>& box, const Vector& u, std::size_t points) {
  const double best = obj(u);
  const double slack = 1e-12 * (1.0 + std::fabs(best));
  for (std::size_t j = 0; j < box.size(); ++j) {
    std::vector<double> probes;
    if (box[j].bounded()) {
      for (std::size_t i = 0; i < points; ++i) {
        probes.push_back(points < 2 ? box[j].lo : box[j].lo + (box[j].hi - box[j].lo) * static_cast<double>(i) /
                                                                   static_cast<double>(points - 1));
      }
    } else {
      for (double d : {-1e6, -1e3, 1e3, 1e6}) probes.push_back(box[j].clamp(u[static_cast<Eigen::Index>(j)] + d));
    }
    Vector trial = u;
    for (double x : probes) {
      trial[static_cast<Eigen::Index>(j)] = x;
      double value;
      try {
        value = obj(trial);
      } catch (const DomainError&) {
        continue;  // overflow far out only lowers H
      }
      if (value > best + slack) return false;
    }
  }
  return true;
}

double golden_max(const std::function<double(double)>& f, double a, double b, std::size_t iterations) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  for (std::size_t i = 0; i < iterations; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double grid_node(const Interval& b, std::size_t i, std::size_t points) {
  if (points < 2 || b.lo == b.hi) return b.lo;
  if (i + 1 == points) return b.hi;
  return b.lo + (b.hi - b.lo) * static_cast<double>(i) / static_cast<double>(points - 1);
}

Vector grid_maximum(const PointObjective& obj, const std::vector<Interval>& box, Vector u,
                    const std::vector<std::size_t>& search, const SolverConfig& config) {
  const std::size_t G = config.grid_points;
  double best = -std::numeric_limits<double>::infinity();
  Vector best_u = u;

  double tensor_size = std::pow(static_cast<double>(G), static_cast<double>(search.size()));
  if (tensor_size <= 1e5) {
    // Lexicographic sweep; strict improvement keeps the smallest tie.
    std::vector<std::size_t> idx(search.size(), 0);
    bool done = false;
    while (!done) {
      for (std::size_t s = 0; s < search.size(); ++s) u[search[s]] = grid_node(box[search[s]], idx[s], G);
      double v = obj(u);
      if (v > best) {
        best = v;
        best_u = u;
      }
      done = true;
      for (std::size_t s = search.size(); s-- > 0;) {
        if (++idx[s] < G) {
          done = false;
          break;
        }
        idx[s] = 0;
      }
    }
  } else {
    for (std::size_t j : search) u[j] = box[j].lo;
    best_u = u;
    best = obj(u);
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (std::size_t j : search) {
        Vector trial = best_u;
        for (std::size_t i = 0; i < G; ++i) {
          trial[j] = grid_node(box[j], i, G);
          double v = obj(trial);
          if (v > best) {
            best = v;
            best_u = trial;
          }
        }
      }
    }
  }

  for (std::size_t j : search) {
    const Interval& b = box[j];
    if (b.lo == b.hi) continue;
    double spacing = (b.hi - b.lo) / static_cast<double>(G - 1);
    double a = std::max(b.lo, best_u[j] - spacing);
    double c = std::min(b.hi, best_u[j] + spacing);
    Vector trial = best_u;
    auto line = [&](double x) {
      trial[j] = x;
      return obj(trial);
    };
    double x = golden_max(line, a, c, config.refine_iterations);
    trial[j] = x;
    double v = obj(trial);
    if (v > best) {
      best = v;
      best_u = trial;
    }
  }
  return best_u;
}

}  // namespace

Vector maximize_hamiltonian(const Dynamics& dyn, const Vector& lambda, const Vector& q, double t, double nu,
                            const SolverConfig& config) {
  if (nu > 0.0) throw ValidationError("cost multiplier must be <= 0 for minimization");
  if (!lambda.allFinite()) throw Error("non-finite costate at t=" + time_label(t));

  // Joint positive rescaling: nu -> -1, or |lambda|_inf -> 1 in the abnormal case.
  const double scale = nu < 0.0 ? -nu : lambda.lpNorm<Eigen::Infinity>();
  const Vector lam = scale > 0.0 ? Vector(lambda / scale) : lambda;
  const double nu_n = scale > 0.0 ? nu / scale : nu;

  const auto& box = dyn.problem().control_bounds;
  const std::size_t l = dyn.l();
  PointObjective obj{dyn, lam, q, t, nu_n, dyn.inputs(t)};

  Vector u0(l);
  for (std::size_t j = 0; j < l; ++j) {
    u0[j] = box[j].bounded() ? 0.5 * (box[j].lo + box[j].hi) : box[j].clamp(0.0);
  }

  if (auto hit = concave_maximum(obj, box, u0)) {
    if (hit->quadratic || beats_probes(obj, box, hit->u, config.grid_points)) return hit->u;
  }

  std::vector<std::size_t> search;
  Vector u = u0;
  const double base = obj(u0);
  for (std::size_t j = 0; j < l; ++j) {
    if (box[j].bounded()) {
      search.push_back(j);
      continue;
    }
    bool flat = obj.gradient(u0)[static_cast<Eigen::Index>(j)] == 0.0;
    for (double dir : {-1.0, 1.0}) {
      if ((dir < 0 && std::isfinite(box[j].lo)) || (dir > 0 && std::isfinite(box[j].hi))) continue;
      Vector near = u0, far = u0;
      near[j] += dir * 1e3;
      far[j] += dir * 1e6;
      double v_near = obj(near), v_far = obj(far);
      if (v_far > v_near && v_near > base) {
        throw UnboundedHamiltonian("unbounded Hamiltonian: objective grows without bound along " +
                                       control_label(j) + " at t=" + time_label(t),
                                   j);
      }
      flat = flat && v_near == base && v_far == base;
    }
    if (!flat) {
      throw Error("unsupported: objective is not concave in " + control_label(j) +
                  " on an unbounded control set (t=" + time_label(t) + ")");
    }
    // Objective does not depend on this component: hold it at the default.
  }
  if (search.empty()) return u;
  return grid_maximum(obj, box, u, search, config);
}

Trajectory integrate_extremal(const Dynamics& dyn, const Vector& lambda0, double nu, const SolverConfig& config) {
  if (!lambda0.allFinite()) throw ValidationError("initial costate must be finite");
  if (static_cast<std::size_t>(lambda0.size()) != dyn.n()) {
    throw ValidationError("initial costate has " + std::to_string(lambda0.size()) + " entries, expected " +
                          std::to_string(dyn.n()));
  }
  ControlLaw law = [&](double t, const Vector& q, const Vector& lambda) {
    return maximize_hamiltonian(dyn, lambda, q, t, nu, config);
  };
  return integrate_coupled(dyn, law, lambda0, nu, config.steps);
}

Vector terminal_residual(const ControlProblem& problem, const Trajectory& traj) {
  Vector r(static_cast<Eigen::Index>(problem.terminal.size()));
  const Vector& q1 = traj.q.back();
  for (std::size_t i = 0; i < problem.terminal.size(); ++i) {
    const TerminalConstraint& c = problem.terminal[i];
    r[static_cast<Eigen::Index>(i)] = q1[static_cast<Eigen::Index>(c.index)] - c.value;
  }
  return r;
}

Vector shooting_residual(const Dynamics& dyn, const Vector& lambda0, double nu, const SolverConfig& config) {
  return terminal_residual(dyn.problem(), integrate_extremal(dyn, lambda0, nu, config));
}

double trajectory_cost(const ControlProblem& problem, const Trajectory& traj) {
  double y = traj.y.back();
  return problem.sense == Sense::kMaximize ? -y : y;
}

// ---------------------------------------------------------------- shooting

namespace {

double max_costate(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& lam : traj.lambda) m = std::max(m, lam.lpNorm<Eigen::Infinity>());
  return m;
}

struct Attempt {
  StartReport report;
  std::optional<Trajectory> trajectory;
  Vector residual;
};

Attempt shoot(const Dynamics& dyn, const Vector& start, double nu, const SolverConfig& config) {
  Attempt a;
  a.report.start = start;
  a.report.nu = nu;
  a.report.lambda0 = start;
  a.report.residual_norm = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Vector& lambda0, Trajectory* traj) -> Vector {
    Trajectory tr = integrate_extremal(dyn, lambda0, nu, config);
    Vector r = terminal_residual(dyn.problem(), tr);
    if (traj != nullptr) *traj = std::move(tr);
    return r;
  };

  Vector lambda = start;
  Trajectory traj;
  Vector r;
  try {
    r = evaluate(lambda, &traj);
  } catch (const Error& err) {
    a.report.note = err.what();
    return a;
  }
  a.report.residual_norm = r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();

  if (nu == 0.0 && max_costate(traj) <= 1e-9) {
    a.report.rejected = true;
    a.report.note = "nontriviality violated: costate identically zero";
    return a;
  }

  const Eigen::Index n = lambda.size();
  for (std::size_t it = 0;; ++it) {
    double norm = r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();
    a.report.residual_norm = std::min(a.report.residual_norm, norm);
    a.report.iterations = it;
    a.report.lambda0 = lambda;
    if (norm <= config.tol) {
      a.report.converged = true;
      break;
    }
    if (it >= config.max_newton) {
      a.report.note = "iteration limit reached";
      return a;
    }

    Matrix J(r.size(), n);
    try {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double h = config.fd_step * std::max(1.0, std::fabs(lambda[j]));
        Vector plus = lambda, minus = lambda;
        plus[j] += h;
        minus[j] -= h;
        J.col(j) = (evaluate(plus, nullptr) - evaluate(minus, nullptr)) / (2.0 * h);
      }
    } catch (const Error& err) {
      a.report.note = std::string("shooting Jacobian failed: ") + err.what();
      return a;
    }
    Vector step = -Eigen::CompleteOrthogonalDecomposition<Matrix>(J).solve(r);
    if (!step.allFinite()) {
      a.report.note = "singular shooting Jacobian";
      return a;
    }

    // Step halving on residual-norm increase.
    bool accepted = false;
    double alpha = 1.0;
    std::string last_error;
    for (std::size_t half = 0; half <= config.max_halvings; ++half, alpha *= 0.5) {
      Vector trial = lambda + alpha * step;
      Trajectory trial_traj;
      try {
        Vector trial_r = evaluate(trial, &trial_traj);
        if (trial_r.norm() < r.norm()) {
          lambda = trial;
          r = trial_r;
          traj = std::move(trial_traj);
          accepted = true;
          break;
        }
      } catch (const Error& err) {
        last_error = err.what();
      }
    }
    if (!accepted) {
      a.report.note = "line search failed" + (last_error.empty() ? std::string() : ": " + last_error);
      return a;
    }
  }

  a.report.cost = trajectory_cost(dyn.problem(), traj);
  if (nu == 0.0 && max_costate(traj) <= 1e-9) {
    a.report.rejected = true;
    a.report.converged = false;
    a.report.note = "nontriviality violated: costate identically zero";
    return a;
  }
  a.residual = r;
  a.trajectory = std::move(traj);
  return a;
}

std::vector<Vector> default_starts(std::size_t n, const std::vector<Vector>& seeds) {
  std::vector<Vector> starts;
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  starts.push_back(Vector::Zero(ni));
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (double s : {1.0, -1.0}) {
      Vector v = Vector::Zero(ni);
      v[i] = s;
      starts.push_back(v);
    }
  }
  for (const auto& seed : seeds) starts.push_back(seed);
  return starts;
}

}  // namespace

Extremal solve(const ControlProblem& problem, const SolverConfig& config) {
  if (auto bad = validate(problem); !bad.empty()) {
    throw ValidationError("invalid problem: " + bad.front().field + ": " + bad.front().message);
  }
  if (auto bad = config.problems(); !bad.empty()) throw ValidationError("invalid solver setting: " + bad.front());
  for (const auto& seed : config.seeds) {
    if (static_cast<std::size_t>(seed.size()) != problem.n) {
      throw ValidationError("seed costate has " + std::to_string(seed.size()) + " entries, expected " +
                            std::to_string(problem.n));
    }
  }

  const Dynamics dyn(problem, problem.t1 / static_cast<double>(config.steps));
  std::vector<double> classes;
  if (config.nu_mode != NuMode::kAbnormal) classes.push_back(-1.0);
  if (config.nu_mode != NuMode::kNormal) classes.push_back(0.0);

  const auto starts = default_starts(problem.n, config.seeds);
  std::vector<StartReport> all_reports;
  for (double nu : classes) {
    std::vector<Attempt> attempts(starts.size());
    const bool threaded = config.parallel && std::thread::hardware_concurrency() > 1 && starts.size() > 1;
    if (threaded) {
      std::vector<std::future<Attempt>> futures;
      for (const auto& s : starts) {
        futures.push_back(std::async(std::launch::async, [&dyn, s, nu, &config] { return shoot(dyn, s, nu, config); }));
      }
      for (std::size_t i = 0; i < futures.size(); ++i) attempts[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < starts.size(); ++i) attempts[i] = shoot(dyn, starts[i], nu, config);
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      all_reports.push_back(attempts[i].report);
      if (!attempts[i].report.converged || !attempts[i].trajectory) continue;
      if (!best || attempts[i].trajectory->y.back() < attempts[*best].trajectory->y.back()) best = i;
    }
    if (best) {
      Attempt& a = attempts[*best];
      Extremal ex;
      ex.nu = nu;
      ex.lambda0 = a.report.lambda0;
      ex.trajectory = std::move(*a.trajectory);
      ex.residual = a.residual;
      ex.cost = a.report.cost;
      ex.nontrivial = max_costate(ex.trajectory) > 1e-9;
      ex.iterations = a.report.iterations;
      ex.attempts = std::move(all_reports);
      return ex;
    }
  }

  double best_norm = std::numeric_limits<double>::infinity();
  for (const auto& r : all_reports) best_norm = std::min(best_norm, r.residual_norm);
  std::ostringstream msg;
  msg << "solver failed: no start converged to |residual| <= " << config.tol << " (best " << best_norm << ")";
  throw SolverFailed(msg.str(), std::move(all_reports));
}

// ---------------------------------------------------------------- certificate

std::string CertificateReport::summary() const {
  std::ostringstream s;
  s.precision(6);
  s << "nontriviality: " << (nontrivial ? "pass" : "FAIL") << " (min |lambda|_inf " << min_costate_norm << ")\n";
  s << "maximality: " << (maximal ? "pass" : "FAIL") << " (worst gap " << worst_maximality_gap;
  if (!failing_nodes.empty()) s << ", " << failing_nodes.size() << " failing node(s), first " << failing_nodes.front();
  s << ")\n";
  s << "nu <= 0: " << (nu_sign ? "pass" : "FAIL") << "\n";
  s << "adjoint consistency: " << (adjoint_consistent ? "pass" : "FAIL") << " (defect " << adjoint_defect << ")\n";
  if (constancy_checked) {
    s << "hamiltonian constancy: " << (constant_hamiltonian ? "pass" : "FAIL") << " (variation "
      << hamiltonian_variation << ")\n";
  } else {
    s << "hamiltonian constancy: skipped (non-autonomous)\n";
  }
  return s.str();
}

CertificateReport check_certificate(const Extremal& extremal, const ControlProblem& problem,
                                    const SolverConfig& config, const CertificateOptions& options) {
  CertificateReport rep;
  const Trajectory& tr = extremal.trajectory;
  const std::size_t nodes = tr.size();
  const std::size_t steps = nodes > 0 ? nodes - 1 : 0;
  const Dynamics dyn(problem, problem.t1 / static_cast<double>(std::max<std::size_t>(steps, 1)));
  const double nu = extremal.nu;

  // The multiplier pair (lambda(t), nu) must not vanish anywhere.
  rep.min_costate_norm = std::numeric_limits<double>::infinity();
  double min_pair = std::numeric_limits<double>::infinity();
  for (const auto& lam : tr.lambda) {
    double m = lam.lpNorm<Eigen::Infinity>();
    rep.min_costate_norm = std::min(rep.min_costate_norm, m);
    min_pair = std::min(min_pair, std::max(m, std::fabs(nu)));
  }
  rep.nontrivial = nodes > 0 && min_pair > options.nontrivial_threshold;

  rep.nu_sign = nu <= 0.0;

  // Maximality: random probes, then every node against the maximizer.
  auto H = [&](std::size_t i, const Vector& u) {
    return dyn.extended_hamiltonian(tr.lambda[i], tr.q[i], u, tr.t[i], nu, tr.I[i]);
  };
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick_node(0, nodes > 0 ? nodes - 1 : 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  rep.worst_maximality_gap = -std::numeric_limits<double>::infinity();
  bool ok = nodes > 0 && nu <= 0.0;
  if (ok) {
    try {
      for (std::size_t p = 0; p < options.probes; ++p) {
        std::size_t i = pick_node(rng);
        Vector u = tr.u[i];
        for (std::size_t j = 0; j < problem.l; ++j) {
          const Interval& b = problem.control_bounds[j];
          double x = b.bounded() ? b.lo + (b.hi - b.lo) * unit(rng)
                                 : u[j] + options.probe_radius * (2.0 * unit(rng) - 1.0);
          u[j] = b.clamp(x);
        }
        double gap = H(i, u) - H(i, tr.u[i]);
        rep.worst_maximality_gap = std::max(rep.worst_maximality_gap, gap);
        if (gap > options.maximality_tol) ok = false;
      }
      for (std::size_t i = 0; i < nodes; ++i) {
        Vector best = maximize_hamiltonian(dyn, tr.lambda[i], tr.q[i], tr.t[i], nu, config);
        double gap = H(i, best) - H(i, tr.u[i]);
        rep.worst_maximality_gap = std::max(rep.worst_maximality_gap, gap);
        if (gap > options.maximality_tol) {
          ok = false;
          rep.failing_nodes.push_back(i);
        }
      }
    } catch (const Error&) {
      ok = false;
    }
  }
  rep.maximal = ok;

  // Re-integration on a grid twice as fine must reproduce the costate.
  rep.adjoint_defect = std::numeric_limits<double>::infinity();
  if (nodes > 1) {
    try {
      SolverConfig fine = config;
      fine.steps = 2 * steps;
      const Dynamics fine_dyn(problem, problem.t1 / static_cast<double>(fine.steps));
      Trajectory ref = integrate_extremal(fine_dyn, extremal.lambda0, nu, fine);
      double defect = 0.0;
      for (std::size_t i = 0; i < nodes; ++i) {
        defect = std::max(defect, (ref.lambda[2 * i] - tr.lambda[i]).lpNorm<Eigen::Infinity>());
      }
      rep.adjoint_defect = defect;
    } catch (const Error&) {
    }
  }
  rep.adjoint_consistent = rep.adjoint_defect <= options.adjoint_tol;

  rep.constancy_checked = dyn.autonomous() && nodes > 0;
  if (rep.constancy_checked) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < nodes; ++i) {
      double h = dyn.control_objective(tr.lambda[i], tr.q[i], tr.u[i], tr.t[i], nu, dyn.inputs(tr.t[i]));
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
    rep.hamiltonian_variation = hi - lo;
    rep.constant_hamiltonian = rep.hamiltonian_variation < options.constancy_tol;
  }
  return rep;
}

}  // namespace portpmp
