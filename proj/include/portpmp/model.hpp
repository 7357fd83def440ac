#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "portpmp/expr.hpp"

namespace portpmp {

/// Closed interval of one control component; either end may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool bounded() const;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Scalar time signal, either an expression in `t` or a table linearly
/// interpolated between rows and held constant outside them.
class Signal {
 public:
  Signal();  // identically zero
  static Signal expression(Expr expr);
  static Signal table(std::vector<std::pair<double, double>> rows);

  double operator()(double t) const;

  bool is_table() const { return is_table_; }
  const Expr& expr() const { return expr_; }
  const std::vector<std::pair<double, double>>& rows() const { return rows_; }

  friend bool operator==(const Signal& a, const Signal& b);

 private:
  bool is_table_ = false;
  Expr expr_;
  std::vector<std::pair<double, double>> rows_;
};

/// q_index(t1) == value.
struct TerminalConstraint {
  std::size_t index = 0;
  double value = 0.0;
  friend bool operator==(const TerminalConstraint&, const TerminalConstraint&) = default;
};

/// How the lift signal f' relates to the reuse signal f.
enum class PortMode {
  kIndependent,  // f and f' are separate inputs
  kLinked,       // f' is the central difference of f on the integration grid
};

enum class Sense { kMinimize, kMaximize };

/// Slot layout shared by every expression of a problem:
///   t, q1..qn, u1..ul, f1..fk, fprime1..fprimek, e1..ek
struct SymbolLayout {
  std::size_t n = 0, l = 0, k = 0;
  std::string state_prefix = "q";

  std::size_t time() const { return 0; }
  std::size_t state(std::size_t i) const { return 1 + i; }
  std::size_t control(std::size_t j) const { return 1 + n + j; }
  std::size_t flow(std::size_t p) const { return 1 + n + l + p; }
  std::size_t lift(std::size_t p) const { return 1 + n + l + k + p; }
  std::size_t effort(std::size_t p) const { return 1 + n + l + 2 * k + p; }
  std::size_t size() const { return 1 + n + l + 3 * k; }

  std::string state_name(std::size_t i) const { return state_prefix + std::to_string(i + 1); }
  static std::string control_name(std::size_t j) { return "u" + std::to_string(j + 1); }
  static std::string flow_name(std::size_t p) { return "f" + std::to_string(p + 1); }
  static std::string lift_name(std::size_t p) { return "fprime" + std::to_string(p + 1); }
  static std::string effort_name(std::size_t p) { return "e" + std::to_string(p + 1); }

  SymbolTable all() const;
  SymbolTable dynamics_symbols() const;  // t, q, u
  SymbolTable port_symbols() const;      // t, q
  SymbolTable cost_symbols() const;      // t, q, u, f, fprime, e
};

/// Fixed-horizon optimal-control problem with k power ports:
///
///   q' = F(q, u, t) + B(q) f'(t),     e = A(q)^T F(q, u, t),
///   minimize  integral_0^t1 phi(q, u, e, f, f', t) dt
///
/// with q(0) = q0, box controls and equality constraints on selected
/// components of q(t1). Immutable once loaded.
struct ControlProblem {
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t k = 0;
  double t1 = 0.0;
  std::string state_prefix = "q";

  std::vector<Expr> dynamics;  // n entries
  std::vector<Expr> port_A;    // n*k, row-major
  std::vector<Expr> port_B;    // n*k, row-major
  Expr running_cost;
  Sense sense = Sense::kMinimize;

  std::vector<Interval> control_bounds;  // l entries
  std::vector<Signal> signal_f;          // k entries
  std::vector<Signal> signal_fprime;     // k entries, unused when linked
  PortMode port_mode = PortMode::kIndependent;

  std::vector<double> q0;
  std::vector<TerminalConstraint> terminal;

  SymbolLayout layout() const { return SymbolLayout{n, l, k, state_prefix}; }
  const Expr& A(std::size_t row, std::size_t col) const { return port_A[row * k + col]; }
  const Expr& B(std::size_t row, std::size_t col) const { return port_B[row * k + col]; }

  friend bool operator==(const ControlProblem& a, const ControlProblem& b);
};

struct Diagnostic {
  std::string field;
  std::string message;
};

/// One diagnostic per violated invariant; empty when the problem is sound.
std::vector<Diagnostic> validate(const ControlProblem& problem);

/// Parses problem-file text. Throws ParseError (with line), SymbolError or
/// ValidationError; a returned problem always validates clean.
ControlProblem load_problem(std::string_view source);
ControlProblem load_problem_file(const std::string& path);

/// Problem-file text that load_problem maps back to an equal problem.
std::string serialize(const ControlProblem& problem);

/// Copy of `problem` with one scalar replaced. Names: `t1`, `q0.<state>`,
/// `terminal.<state>` (e.g. `q0.x2`, `terminal.x1`). Throws ValidationError
/// for unknown names.
ControlProblem with_parameter(const ControlProblem& problem, std::string_view name, double value);

}  // namespace portpmp
