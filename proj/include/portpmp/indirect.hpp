#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "portpmp/dynamics.hpp"
#include "portpmp/error.hpp"
#include "portpmp/model.hpp"

namespace portpmp {

/// Which cost-multiplier classes `solve` tries. Normal is nu = -1, abnormal
/// is nu = 0; auto tries normal first and falls back to abnormal.
enum class NuMode { kAuto, kNormal, kAbnormal };

struct SolverConfig {
  std::size_t steps = 1000;
  double tol = 1e-9;             // on the infinity norm of the terminal residual
  std::size_t max_newton = 50;
  double fd_step = 1e-6;         // relative step of the shooting Jacobian
  std::size_t max_halvings = 30;
  std::size_t grid_points = 64;  // coarse control grid per coordinate
  std::size_t refine_iterations = 30;
  NuMode nu_mode = NuMode::kAuto;
  std::vector<Vector> seeds;     // extra initial costates tried after the defaults
  bool parallel = true;          // run multi-start Newton concurrently

  /// Names of fields that are not positive; empty when usable.
  std::vector<std::string> problems() const;
};

/// Outcome of Newton shooting from one initial costate.
struct StartReport {
  Vector start;
  double nu = -1.0;
  bool converged = false;
  bool rejected = false;     // converged or trivial but fails nontriviality
  double residual_norm = 0.0;  // best infinity norm seen
  std::size_t iterations = 0;
  Vector lambda0;            // last iterate
  double cost = 0.0;         // valid when converged
  std::string note;
};

/// Solved candidate satisfying the necessary conditions numerically.
struct Extremal {
  double nu = -1.0;  // 0 (abnormal) or -1 (normal)
  Vector lambda0;
  Trajectory trajectory;
  Vector residual;
  double cost = 0.0;       // J in the problem's own sense
  bool nontrivial = false;  // max over the grid of |lambda(t)|_inf > 1e-9
  std::size_t iterations = 0;
  std::vector<StartReport> attempts;

  double residual_norm() const { return residual.size() == 0 ? 0.0 : residual.lpNorm<Eigen::Infinity>(); }
};

/// No start converged to an acceptable extremal.
class SolverFailed : public Error {
 public:
  SolverFailed(const std::string& message, std::vector<StartReport> attempts)
      : Error(message), attempts_(std::move(attempts)) {}
  const std::vector<StartReport>& attempts() const { return attempts_; }

 private:
  std::vector<StartReport> attempts_;
};

/// Maximizer of <lambda, F(q,u,t)> + nu * phi over the control box.
///
/// (lambda, nu) is first rescaled by a positive factor (to nu = -1, or to
/// |lambda|_inf = 1 when nu = 0), so the result is invariant under joint
/// positive scaling. A strictly concave quadratic objective is solved from
/// its stationarity condition (projected onto the box when the stationary
/// point lies outside); anything else on a bounded box goes through a
/// coarse grid with golden-section refinement, ties resolved toward the
/// lexicographically smallest u. Throws UnboundedHamiltonian when the
/// objective grows along an unbounded component and Error for non-concave
/// objectives on unbounded components.
Vector maximize_hamiltonian(const Dynamics& dyn, const Vector& lambda, const Vector& q, double t, double nu,
                            const SolverConfig& config = {});

/// State/costate trajectory under the maximizing feedback.
Trajectory integrate_extremal(const Dynamics& dyn, const Vector& lambda0, double nu, const SolverConfig& config = {});

/// q_i(t1) - target_i for each terminal constraint.
Vector shooting_residual(const Dynamics& dyn, const Vector& lambda0, double nu, const SolverConfig& config = {});
Vector terminal_residual(const ControlProblem& problem, const Trajectory& traj);

/// Cost of a trajectory in the problem's own sense.
double trajectory_cost(const ControlProblem& problem, const Trajectory& traj);

/// Damped Newton shooting with multi-start; see SolverConfig. Throws
/// SolverFailed listing every start when nothing acceptable converges.
Extremal solve(const ControlProblem& problem, const SolverConfig& config = {});

struct CertificateOptions {
  std::size_t probes = 100;        // random (t, u) pairs for the maximality check
  double maximality_tol = 1e-7;
  double nontrivial_threshold = 1e-9;
  double adjoint_tol = 1e-6;
  double constancy_tol = 1e-4;
  double probe_radius = 10.0;      // spread of probes on unbounded components
  std::uint64_t seed = 20240611;
};

struct CertificateReport {
  bool nontrivial = false;
  double min_costate_norm = 0.0;  // min over the grid of |lambda(t)|_inf
  bool maximal = false;
  double worst_maximality_gap = 0.0;  // max of H(u) - H(u_traj) over probes and nodes
  std::vector<std::size_t> failing_nodes;
  bool nu_sign = false;
  bool adjoint_consistent = false;
  double adjoint_defect = 0.0;
  bool constancy_checked = false;  // only for autonomous problems
  bool constant_hamiltonian = true;
  double hamiltonian_variation = 0.0;

  bool passed() const { return nontrivial && maximal && nu_sign && adjoint_consistent && constant_hamiltonian; }
  std::string summary() const;
};

/// Post-hoc check of the necessary conditions on a solved trajectory.
CertificateReport check_certificate(const Extremal& extremal, const ControlProblem& problem,
                                    const SolverConfig& config = {}, const CertificateOptions& options = {});

}  // namespace portpmp
