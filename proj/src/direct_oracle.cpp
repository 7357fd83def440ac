#include "portpmp/direct_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "portpmp/error.hpp"

namespace portpmp {

Transcription::Transcription(const ControlProblem& problem, std::size_t intervals, std::size_t substeps)
    : dyn_(problem, problem.t1 / static_cast<double>(std::max<std::size_t>(intervals * substeps, 1))),
      intervals_(intervals),
      substeps_(substeps) {
  if (intervals < 2) throw ValidationError("transcription needs at least 2 intervals");
  if (substeps < 1) throw ValidationError("transcription needs at least 1 substep per interval");
}

std::vector<Interval> Transcription::bounds() const {
  std::vector<Interval> out;
  out.reserve(dims());
  for (std::size_t i = 0; i < intervals_; ++i) {
    for (const auto& b : dyn_.problem().control_bounds) out.push_back(b);
  }
  return out;
}

Vector Transcription::initial_guess() const {
  auto box = bounds();
  Vector x(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = box[i].bounded() ? 0.5 * (box[i].lo + box[i].hi) : box[i].clamp(0.0);
  }
  return x;
}

Transcription::Rollout Transcription::rollout(const Vector& x) const {
  const ControlProblem& p = dyn_.problem();
  const Eigen::Index n = static_cast<Eigen::Index>(p.n);
  const Eigen::Index l = static_cast<Eigen::Index>(p.l);
  const std::size_t steps = intervals_ * substeps_;
  const double h = p.t1 / static_cast<double>(steps);

  // z = (q, y)
  Vector z(n + 1);
  z.head(n) = Eigen::Map<const Vector>(p.q0.data(), n);
  z[n] = 0.0;
  Vector u(l);
  auto rhs = [&](double t, const Vector& s) {
    PortInputs in = dyn_.inputs(t);
    Vector q = s.head(n);
    Vector d(n + 1);
    d.head(n) = dyn_.vector_field(q, u, in.fprime, t);
    d[n] = dyn_.cost_integrand(q, u, in, t);
    return d;
  };
  for (std::size_t i = 0; i < intervals_; ++i) {
    u = x.segment(static_cast<Eigen::Index>(i) * l, l);
    for (std::size_t s = 0; s < substeps_; ++s) {
      const std::size_t step = i * substeps_ + s;
      const double t = static_cast<double>(step) * h;
      try {
        Vector k1 = rhs(t, z);
        Vector k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1);
        Vector k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2);
        Vector k4 = rhs(t + h, z + h * k3);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      } catch (const IntegrationError&) {
        throw;
      } catch (const Error& err) {
        throw IntegrationError(err.what(), step, t);
      }
      if (!z.allFinite()) throw IntegrationError("non-finite state", step + 1, t + h);
    }
  }
  Rollout r;
  r.cost = z[n];
  r.defect.resize(static_cast<Eigen::Index>(p.terminal.size()));
  for (std::size_t c = 0; c < p.terminal.size(); ++c) {
    r.defect[static_cast<Eigen::Index>(c)] = z[static_cast<Eigen::Index>(p.terminal[c].index)] - p.terminal[c].value;
  }
  return r;
}

double Transcription::objective(const Vector& x, double rho) const {
  Rollout r = rollout(x);
  return r.cost + rho * r.defect.squaredNorm();
}

// ---------------------------------------------------------------- optimizer

namespace {

Vector project(const Vector& x, const std::vector<Interval>& box) {
  Vector out = x;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    out[ii] = box[i].clamp(out[ii]);
  }
  return out;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, const std::vector<Interval>& box,
                   double rel_step) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Interval& b = box[static_cast<std::size_t>(i)];
    const double h = rel_step * std::max(1.0, std::fabs(x[i]));
    // Stay inside the box: one-sided at an active bound.
    double lo = std::max(b.lo, x[i] - h);
    double hi = std::min(b.hi, x[i] + h);
    if (hi <= lo) {
      g[i] = 0.0;
      continue;
    }
    probe[i] = hi;
    double fp = f(probe);
    probe[i] = lo;
    double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (hi - lo);
  }
  return g;
}

}  // namespace

OptimizeResult minimize_box(const std::function<double(const Vector&)>& f, const std::vector<Interval>& bounds,
                            const Vector& x0, const OptimizeOptions& options) {
  constexpr double kArmijo = 1e-4;
  constexpr double kStepMin = 1e-12;
  constexpr double kStepMax = 1e12;
  constexpr std::size_t kMemory = 10;

  OptimizeResult res;
  Vector x = project(x0, bounds);
  double fx = f(x);
  Vector g = fd_gradient(f, x, bounds, options.fd_step);
  auto projected_norm = [&](const Vector& at, const Vector& grad) { return (project(at - grad, bounds) - at).norm(); };

  res.x = x;
  res.value = fx;
  res.grad_norm = projected_norm(x, g);
  if (res.grad_norm < options.grad_tol) {
    res.converged = true;
    return res;
  }

  double step = std::clamp(1.0 / std::max(g.lpNorm<Eigen::Infinity>(), 1e-300), kStepMin, kStepMax);
  std::deque<double> history{fx};
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    Vector d = project(x - step * g, bounds) - x;
    const double slope = g.dot(d);
    const double reference = *std::max_element(history.begin(), history.end());

    double t = 1.0;
    Vector x_new = x + d;
    double f_new = f(x_new);
    int backtracks = 0;
    while (f_new > reference + kArmijo * t * slope && backtracks < 60) {
      t *= 0.5;
      x_new = x + t * d;
      f_new = f(x_new);
      ++backtracks;
    }
    if (f_new > reference + kArmijo * t * slope) {
      // No progress possible along the projected direction.
      res.iterations = it;
      break;
    }

    Vector g_new = fd_gradient(f, x_new, bounds, options.fd_step);
    Vector s = x_new - x;
    Vector yv = g_new - g;
    const double sy = s.dot(yv);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kStepMin, kStepMax) : kStepMax;

    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
    history.push_back(fx);
    if (history.size() > kMemory) history.pop_front();

    res.iterations = it;
    const double pg = projected_norm(x, g);
    if (fx <= res.value || pg < res.grad_norm) {
      res.x = x;
      res.value = fx;
      res.grad_norm = pg;
    }
    if (pg < options.grad_tol) {
      res.x = x;
      res.value = fx;
      res.grad_norm = pg;
      res.converged = true;
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------------- driver

Vector DirectSolution::control_at(double t) const {
  if (controls.empty()) return Vector();
  double pos = t / interval_length;
  std::size_t i = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
  if (i >= controls.size()) i = controls.size() - 1;
  return controls[i];
}

DirectSolution solve_direct(const ControlProblem& problem, const DirectOptions& options) {
  if (auto bad = validate(problem); !bad.empty()) {
    throw ValidationError("invalid problem: " + bad.front().field + ": " + bad.front().message);
  }
  if (!(options.rho_start > 0.0) || !(options.rho_end >= options.rho_start) || !(options.rho_factor > 1.0)) {
    throw ValidationError("penalty schedule must be positive and increasing");
  }
  const Transcription tr(problem, options.intervals, options.substeps);
  if (tr.dims() > 512) throw ValidationError("direct transcription is limited to 512 decision variables");
  const auto box = tr.bounds();

  DirectSolution sol;
  sol.intervals = tr.intervals();
  sol.interval_length = tr.interval_length();

  Vector x = tr.initial_guess();
  double rho = options.rho_start;
  for (;;) {
    auto f = [&](const Vector& v) { return tr.objective(v, rho); };
    OptimizeResult r = minimize_box(f, box, x, options.optimizer);
    x = r.x;
    sol.iterations += r.iterations;
    sol.converged = r.converged;
    sol.penalty = rho;
    if (rho >= options.rho_end) break;
    rho = std::min(rho * options.rho_factor, options.rho_end);
  }

  Transcription::Rollout final = tr.rollout(x);
  sol.cost = problem.sense == Sense::kMaximize ? -final.cost : final.cost;
  sol.defect_norm = final.defect.size() == 0 ? 0.0 : final.defect.lpNorm<Eigen::Infinity>();
  const Eigen::Index l = static_cast<Eigen::Index>(problem.l);
  for (std::size_t i = 0; i < sol.intervals; ++i) {
    sol.controls.push_back(x.segment(static_cast<Eigen::Index>(i) * l, l));
  }
  return sol;
}

std::string CompareReport::summary() const {
  std::ostringstream s;
  s.precision(10);
  s << "indirect J: " << indirect_cost << "\n";
  s << "direct J: " << direct_cost << "\n";
  s << "relative gap: " << relative_gap << " (tolerance " << tol_rel << ")\n";
  s << "control RMS gap: " << control_rms << "\n";
  s << "result: " << (passed ? "pass" : "FAIL") << "\n";
  return s.str();
}

CompareReport compare(const Extremal& extremal, const DirectSolution& direct, double tol_rel) {
  CompareReport rep;
  rep.indirect_cost = extremal.cost;
  rep.direct_cost = direct.cost;
  rep.tol_rel = tol_rel;
  rep.relative_gap = std::fabs(extremal.cost - direct.cost) / std::max(1.0, std::fabs(direct.cost));
  const Trajectory& tr = extremal.trajectory;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Vector ud = direct.control_at(tr.t[i]);
    if (ud.size() != tr.u[i].size()) continue;
    sum += (ud - tr.u[i]).squaredNorm();
    count += static_cast<std::size_t>(ud.size());
  }
  rep.control_rms = count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
  rep.passed = rep.relative_gap <= tol_rel;
  return rep;
}

}  // namespace portpmp
