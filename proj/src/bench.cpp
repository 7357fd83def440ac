#include "portpmp/bench.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "portpmp/error.hpp"

namespace portpmp {
namespace {

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void check(const CheapestStopParams& p) {
  if (!(p.t1 > 0.0) || !std::isfinite(p.t1)) throw ValidationError("t1: horizon must be positive, got " + num(p.t1));
  for (double v : {p.x0, p.v0, p.x1}) {
    if (!std::isfinite(v)) throw ValidationError("boundary values must be finite");
  }
}

void common_head(std::ostringstream& out, const CheapestStopParams& p, int k) {
  out << "[dims]\nn = 2\nl = 1\nk = " << k << "\nt1 = " << num(p.t1) << "\nstate = x\n\n";
  out << "[dynamics]\nx2\nu1\n\n";
}

void common_tail(std::ostringstream& out) {
  out << "\n[bounds]\n-inf inf\n";
}

void boundary(std::ostringstream& out, const CheapestStopParams& p) {
  out << "\n[boundary]\nq0 = " << num(p.x0) << " " << num(p.v0) << "\n";
  out << "terminal x1 = " << num(p.x1) << "\nterminal x2 = 0\n";
}

}  // namespace

std::string classic_problem_text(const CheapestStopParams& p) {
  check(p);
  std::ostringstream out;
  out << "# Cheapest Stop\n";
  common_head(out, p, 0);
  out << "[cost]\nu1^2\n";
  common_tail(out);
  boundary(out, p);
  return out.str();
}

std::string ported_problem_text(const CheapestStopParams& p) {
  check(p);
  const std::array<const char*, 2> drift{"x2", "u1"};
  // e2 = B^T (F + B fprime1), skipping zero entries.
  std::string e2;
  for (std::size_t i = 0; i < 2; ++i) {
    if (p.B[i] == 0.0) continue;
    if (!e2.empty()) e2 += " + ";
    const std::string b = p.B[i] == 1.0 ? "" : num(p.B[i]) + "*";
    e2 += b + "(" + drift[i] + " + " + b + "fprime1)";
  }
  if (e2.empty()) e2 = "0";

  std::ostringstream out;
  out << "# Cheapest Stop with one port\n";
  common_head(out, p, 1);
  out << "[port_A]\n" << num(p.A[0]) << "\n" << num(p.A[1]) << "\n\n";
  out << "[port_B]\n" << num(p.B[0]) << "\n" << num(p.B[1]) << "\n\n";
  out << "[cost]\nu1^2 + (e1 + " << e2 << ")*f1\n";
  common_tail(out);
  out << "\n[signals]\nmode = independent\nf1 = " << p.f << "\nfprime1 = " << p.fprime << "\n";
  boundary(out, p);
  return out.str();
}

ControlProblem classic_problem(const CheapestStopParams& params) { return load_problem(classic_problem_text(params)); }

ControlProblem ported_problem(const CheapestStopParams& params) { return load_problem(ported_problem_text(params)); }

AnalyticSolution analytic_classic(const CheapestStopParams& p) {
  check(p);
  const double T = p.t1;
  // v0 + beta*T + alpha*T^2/2 = 0
  // x0 + v0*T + beta*T^2/2 + alpha*T^3/6 = x1
  const double a11 = T * T / 2.0, a12 = T, r1 = -p.v0;
  const double a21 = T * T * T / 6.0, a22 = T * T / 2.0, r2 = p.x1 - p.x0 - p.v0 * T;
  const double det = a11 * a22 - a12 * a21;  // T^4 / 12
  AnalyticSolution s;
  s.alpha = (r1 * a22 - a12 * r2) / det;
  s.beta = (a11 * r2 - r1 * a21) / det;
  s.cost = s.alpha * s.alpha * T * T * T / 3.0 + s.alpha * s.beta * T * T + s.beta * s.beta * T;
  return s;
}

}  // namespace portpmp
