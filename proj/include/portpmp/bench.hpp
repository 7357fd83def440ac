#pragma once

#include <array>
#include <string>

#include "portpmp/model.hpp"

namespace portpmp {

/// Cheapest Stop: drive x'' = u from (x0, v0) to rest at x1 in time t1.
/// The port fields are only used by the ported variant; the signals are
/// expressions in t.
struct CheapestStopParams {
  double x0 = 0.0;
  double v0 = 1.0;
  double x1 = 1.0;
  double t1 = 1.0;
  std::array<double, 2> A{1.0, 0.0};
  std::array<double, 2> B{0.0, 1.0};
  std::string f = "0";
  std::string fprime = "0";
};

/// n=2, l=1, k=0: x1' = x2, x2' = u1, cost u1^2, U = R.
/// Throws ValidationError when t1 <= 0.
ControlProblem classic_problem(const CheapestStopParams& params);

/// Same plant with one port: x' = F + B fprime1, e1 = A^T F, and cost
/// u1^2 + (e1 + e2) * f1 where e2 = B^T x' is written out in terms of the
/// state, control and fprime1.
ControlProblem ported_problem(const CheapestStopParams& params);

/// Problem-file text of either variant.
std::string classic_problem_text(const CheapestStopParams& params);
std::string ported_problem_text(const CheapestStopParams& params);

/// Optimal classic control u(t) = alpha*t + beta and its cost.
struct AnalyticSolution {
  double alpha = 0.0;
  double beta = 0.0;
  double cost = 0.0;
};

AnalyticSolution analytic_classic(const CheapestStopParams& params);

}  // namespace portpmp
