#pragma once

#include <cmath>
#include <random>
#include <string>

#include "portpmp/expr.hpp"

namespace testsupport {

// Random smooth expression over x1..x3. Denominators, logs and roots are
// shaped so that every point of R^3 is in the domain.
inline std::string random_expression(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 11);
  std::uniform_int_distribution<int> var(1, 3);
  std::uniform_int_distribution<int> eighths(-16, 16);
  auto leaf = [&]() -> std::string {
    if (pick(rng) % 3 == 0) {
      double c = eighths(rng) / 8.0;
      return c < 0 ? "(" + std::to_string(c) + ")" : std::to_string(c);
    }
    return "x" + std::to_string(var(rng));
  };
  if (depth <= 0) return leaf();
  auto sub = [&] { return random_expression(rng, depth - 1); };
  switch (pick(rng)) {
    case 0: return leaf();
    case 1: return "(" + sub() + " + " + sub() + ")";
    case 2: return "(" + sub() + " - " + sub() + ")";
    case 3: return "(" + sub() + " * " + sub() + ")";
    case 4: return "(" + sub() + " / (1.5 + (" + sub() + ")^2))";
    case 5: return "(" + sub() + ")^2";
    case 6: return "(" + sub() + ")^3";
    case 7: return "(1 + (" + sub() + ")^2)^0.5";
    case 8: return "sin(" + sub() + ")";
    case 9: return "cos(" + sub() + ")";
    case 10: return "exp(0.5*sin(" + sub() + "))";
    default: return "log(1 + (" + sub() + ")^2)";
  }
}

// Central difference with one Richardson step.
template <class F>
double fd_derivative(F&& f, double x, double h = 1e-3) {
  auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
  return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

}  // namespace testsupport
