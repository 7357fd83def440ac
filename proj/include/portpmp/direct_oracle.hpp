#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "portpmp/dynamics.hpp"
#include "portpmp/indirect.hpp"
#include "portpmp/model.hpp"

namespace portpmp {

/// Piecewise-constant control parameterization of a problem: the decision
/// vector holds u on each of `intervals` equal intervals, interval-major
/// (x[i*l + j] is component j on interval i).
class Transcription {
 public:
  struct Rollout {
    double cost = 0.0;  // integral of the minimized integrand
    Vector defect;      // terminal constraint defects
  };

  /// Throws ValidationError when intervals < 2 or substeps < 1.
  Transcription(const ControlProblem& problem, std::size_t intervals, std::size_t substeps = 2);

  std::size_t intervals() const { return intervals_; }
  std::size_t dims() const { return intervals_ * dyn_.l(); }
  double interval_length() const { return dyn_.problem().t1 / static_cast<double>(intervals_); }
  double midpoint(std::size_t i) const { return (static_cast<double>(i) + 0.5) * interval_length(); }

  /// Box for every decision variable.
  std::vector<Interval> bounds() const;
  /// Default starting grid: interval midpoint of each bounded component, the
  /// clamped origin otherwise.
  Vector initial_guess() const;

  /// RK4 rollout of the state and cost quadrature under the control grid.
  Rollout rollout(const Vector& x) const;
  /// Quadrature cost plus rho * |terminal defect|^2.
  double objective(const Vector& x, double rho) const;

 private:
  Dynamics dyn_;
  std::size_t intervals_;
  std::size_t substeps_;
};

struct OptimizeOptions {
  double grad_tol = 1e-6;         // on the projected gradient norm
  std::size_t max_iterations = 10000;
  double fd_step = 1e-6;          // relative central-difference step
};

struct OptimizeResult {
  Vector x;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Projected gradient descent with central-difference gradients,
/// Barzilai-Borwein step lengths and a nonmonotone backtracking line search.
/// Deterministic for a given start.
OptimizeResult minimize_box(const std::function<double(const Vector&)>& f, const std::vector<Interval>& bounds,
                            const Vector& x0, const OptimizeOptions& options = {});

struct DirectOptions {
  std::size_t intervals = 50;
  std::size_t substeps = 2;     // RK4 steps per control interval
  double rho_start = 1e2;
  double rho_end = 1e8;
  double rho_factor = 10.0;
  OptimizeOptions optimizer;
};

/// Control grid and achieved cost found by direct transcription.
struct DirectSolution {
  std::size_t intervals = 0;
  double interval_length = 0.0;
  std::vector<Vector> controls;  // one l-vector per interval
  double cost = 0.0;             // J in the problem's own sense (no penalty)
  double defect_norm = 0.0;      // infinity norm of the terminal defect
  double penalty = 0.0;          // final rho
  std::size_t iterations = 0;    // summed over penalty rounds
  bool converged = false;        // last round met the gradient tolerance

  /// Piecewise-constant control at time t.
  Vector control_at(double t) const;
};

/// Penalty-continuation solve: rho runs from rho_start to rho_end,
/// multiplying by rho_factor, each round warm-started from the last.
DirectSolution solve_direct(const ControlProblem& problem, const DirectOptions& options = {});

struct CompareReport {
  double indirect_cost = 0.0;
  double direct_cost = 0.0;
  double relative_gap = 0.0;  // |J_ind - J_dir| / max(1, |J_dir|)
  double control_rms = 0.0;   // over the extremal's nodes
  double tol_rel = 0.0;
  bool passed = false;

  std::string summary() const;
};

CompareReport compare(const Extremal& extremal, const DirectSolution& direct, double tol_rel);

}  // namespace portpmp
