// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "cli.hpp"
#include "portpmp/bench.hpp"
#include "portpmp/direct_oracle.hpp"
#include "portpmp/indirect.hpp"
#include "support.hpp"

using namespace portpmp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Max residual of a least-squares line through (t, u).
double linear_fit_residual(const Trajectory& tr) {
  const Eigen::Index m = static_cast<Eigen::Index>(tr.size());
  Matrix X(m, 2);
  Vector y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = tr.t[static_cast<std::size_t>(i)];
    X(i, 1) = 1.0;
    y[i] = tr.u[static_cast<std::size_t>(i)][0];
  }
  Vector c = X.colPivHouseholderQr().solve(y);
  return (X * c - y).lpNorm<Eigen::Infinity>();
}

std::vector<CheapestStopParams> random_params() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), horizon(0.5, 2.0);
  std::vector<CheapestStopParams> out;
  for (int i = 0; i < 20; ++i) {
    CheapestStopParams p;
    p.x0 = pos(rng);
    p.v0 = pos(rng);
    p.x1 = pos(rng);
    p.t1 = horizon(rng);
    out.push_back(p);
  }
  return out;
}

CheapestStopParams ported_params() {
  CheapestStopParams p;
  p.A = {1.0, 0.0};
  p.B = {0.0, 1.0};
  p.fprime = "0.1";
  p.f = "0.1*t";
  return p;
}

Outcome criterion1() {
  ControlProblem p = classic_problem({});
  AnalyticSolution s = analytic_classic({});
  const auto start = Clock::now();
  Extremal ex = solve(p);
  const double elapsed = seconds(start);
  double worst = 0.0;
  for (std::size_t i = 0; i < ex.trajectory.size(); ++i) {
    worst = std::max(worst, std::fabs(ex.trajectory.u[i][0] - (s.alpha * ex.trajectory.t[i] + s.beta)));
  }
  const double cost_err = std::fabs(ex.cost - 4.0);
  DirectSolution d = solve_direct(p);
  const bool oracle = std::fabs(d.cost - s.cost) <= 0.02 * std::max(1.0, s.cost);
  const bool analytic = std::fabs(s.alpha + 6.0) < 1e-12 && std::fabs(s.beta - 2.0) < 1e-12;
  return {ex.nu == -1.0 && analytic && worst < 1e-6 && cost_err < 1e-6 && elapsed < 1.0 && oracle,
          "nu=" + fmt(ex.nu) + " max|u-(-6t+2)|=" + fmt(worst) + " |J-4|=" + fmt(cost_err) +
              " direct J=" + fmt(d.cost) + " time=" + fmt(elapsed) + "s"};
}

Outcome criterion2() {
  double worst_fit = 0.0, worst_costate = 0.0;
  int converged = 0;
  for (const auto& params : random_params()) {
    Extremal ex = solve(classic_problem(params));
    ++converged;
    worst_fit = std::max(worst_fit, linear_fit_residual(ex.trajectory));
    for (std::size_t i = 0; i < ex.trajectory.size(); ++i) {
      worst_costate =
          std::max(worst_costate, std::fabs(ex.trajectory.u[i][0] - ex.trajectory.lambda[i][1] / 2.0));
    }
  }
  return {converged == 20 && worst_fit < 1e-6 && worst_costate < 1e-8,
          std::to_string(converged) + "/20 converged, fit residual " + fmt(worst_fit) + ", |u - xi2/2| " +
              fmt(worst_costate)};
}

Outcome criterion3() {
  SolverConfig c;
  c.nu_mode = NuMode::kAbnormal;
  bool rejected = false;
  std::string reasons;
  try {
    solve(classic_problem({}), c);
  } catch (const SolverFailed& e) {
    rejected = true;
    for (const auto& a : e.attempts()) {
      const bool explained = a.note.find("unbounded Hamiltonian") != std::string::npos ||
                             a.note.find("nontriviality violated") != std::string::npos;
      rejected = rejected && a.nu == 0.0 && !a.converged && explained;
    }
    reasons = std::to_string(e.attempts().size()) + " abnormal starts rejected";
  }

  const fs::path dir = fs::temp_directory_path() / ("portpmp_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "bench_classic.ocp") << classic_problem_text({});
  std::ostringstream out, err;
  int code = cli::run({"solve", (dir / "bench_classic.ocp").string(), "--nu", "abnormal", "--out", dir.string()}, out,
                      err);
  fs::remove_all(dir);
  const bool reported =
      code == cli::kSolverFailed && out.str().find("abnormal case (nu = 0): rejected") != std::string::npos;
  return {rejected && reported,
          reasons + ", CLI exit " + std::to_string(code) + (reported ? " with explicit report" : "")};
}

Outcome criterion4() {
  CheapestStopParams zero;
  zero.A = {0.0, 0.0};
  zero.B = {0.0, 0.0};
  zero.f = "0";
  zero.fprime = "0";
  Extremal a = solve(classic_problem({}));
  Extremal b = solve(ported_problem(zero));
  double worst = 0.0;
  bool same_grid = a.trajectory.size() == b.trajectory.size();
  for (std::size_t i = 0; same_grid && i < a.trajectory.size(); ++i) {
    const auto& x = a.trajectory;
    const auto& y = b.trajectory;
    worst = std::max({worst, std::fabs(x.t[i] - y.t[i]), (x.q[i] - y.q[i]).lpNorm<Eigen::Infinity>(),
                      (x.lambda[i] - y.lambda[i]).lpNorm<Eigen::Infinity>(),
                      (x.u[i] - y.u[i]).lpNorm<Eigen::Infinity>(), std::fabs(x.y[i] - y.y[i]),
                      std::fabs(x.I[i] - y.I[i])});
  }
  return {same_grid && worst < 1e-10, "max per-node difference " + fmt(worst)};
}

Outcome criterion5() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (const auto& [name, problem] : {std::pair{"classic", classic_problem({})},
                                      std::pair{"ported", ported_problem(ported_params())}}) {
    Extremal ex = solve(problem);
    DirectOptions o;
    o.intervals = 50;
    DirectSolution d = solve_direct(problem, o);
    CompareReport rep = compare(ex, d, 0.02);
    pass = pass && rep.passed;
    detail += std::string(name) + " gap " + fmt(rep.relative_gap);
    detail += " (J " + fmt(ex.cost) + " vs " + fmt(d.cost) + "), ";
  }
  const double elapsed = seconds(start);
  return {pass && elapsed < 30.0, detail + "time " + fmt(elapsed) + "s"};
}

Outcome criterion6() {
  std::vector<ControlProblem> problems{classic_problem({}), ported_problem(ported_params())};
  for (const auto& p : random_params()) problems.push_back(classic_problem(p));
  int passed = 0, constancy = 0;
  double worst_gap = 0.0, worst_variation = 0.0;
  for (const auto& p : problems) {
    Extremal ex = solve(p);
    CertificateOptions opts;
    opts.probes = 100;
    CertificateReport rep = check_certificate(ex, p, {}, opts);
    if (rep.passed() && rep.nontrivial && rep.maximal && rep.nu_sign) ++passed;
    if (rep.constancy_checked) ++constancy;
    worst_gap = std::max(worst_gap, rep.worst_maximality_gap);
    worst_variation = std::max(worst_variation, rep.hamiltonian_variation);
  }
  const int total = static_cast<int>(problems.size());
  return {passed == total && constancy == total - 1,
          std::to_string(passed) + "/" + std::to_string(total) + " certificates pass, worst maximality gap " +
              fmt(worst_gap) + ", worst H variation " + fmt(worst_variation) + " over " + std::to_string(constancy) +
              " autonomous"};
}

Outcome criterion7() {
  std::vector<std::string> names{"x1", "x2", "x3"};
  SymbolTable sym(names);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> point(-2.0, 2.0);
  int checked = 0, failed = 0;
  double worst = 0.0;
  for (int attempt = 0; attempt < 20000 && checked < 1000; ++attempt) {
    Expr e = parse(testsupport::random_expression(rng, 3), sym);
    const std::size_t slot = static_cast<std::size_t>(attempt % 3);
    std::vector<double> x{point(rng), point(rng), point(rng)};
    auto f = [&](double v) {
      std::vector<double> y = x;
      y[slot] = v;
      return e.eval(y);
    };
    double exact = 0.0, fd = 0.0;
    try {
      if (std::fabs(e.eval(x)) > 1e4) continue;
      exact = e.diff(names[slot]).eval(x);
      fd = testsupport::fd_derivative(f, x[slot]);
    } catch (const DomainError&) {
      continue;
    }
    const double rel = std::fabs(exact - fd) / (1.0 + std::fabs(fd));
    worst = std::max(worst, rel);
    if (rel >= 1e-6) ++failed;
    ++checked;
  }

  auto terminal_error = [](std::size_t n) {
    double end = 0.0;
    rk4([](double, const Vector& z) { return z; }, Vector::Ones(1), 0.0, 1.0, n,
        [&](std::size_t, double, const Vector& z) { end = z[0]; });
    return std::fabs(end - std::exp(1.0));
  };
  const double ratio = terminal_error(10) / terminal_error(20);
  return {checked == 1000 && failed == 0 && ratio >= 12.0 && ratio <= 20.0,
          std::to_string(checked) + " pairs, worst relative error " + fmt(worst) + ", RK4 ratio " + fmt(ratio)};
}

Outcome criterion8() {
  ControlProblem boxed = classic_problem({});
  boxed.control_bounds[0] = Interval{-1.0, 1.0};
  const Dynamics classic(classic_problem({}));
  const Dynamics ported(ported_problem(ported_params()));
  const Dynamics box(boxed);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> sixteenths(-64, 64);
  auto dyadic = [&] { return sixteenths(rng) / 16.0; };
  int compared = 0, mismatched = 0;
  for (int i = 0; i < 100; ++i) {
    Vector lam(2), q(2);
    lam << dyadic(), dyadic();
    q << dyadic(), dyadic();
    const double t = std::fabs(dyadic()) / 4.0;
    for (double c : {0.5, 3.0, 10.0}) {
      for (const Dynamics* d : {&classic, &ported}) {
        ++compared;
        if (maximize_hamiltonian(*d, c * lam, q, t, -c) != maximize_hamiltonian(*d, lam, q, t, -1.0)) ++mismatched;
      }
      ++compared;
      if (maximize_hamiltonian(box, c * lam, q, t, 0.0) != maximize_hamiltonian(box, lam, q, t, 0.0)) ++mismatched;
    }
  }
  return {mismatched == 0, std::to_string(compared) + " comparisons, " + std::to_string(mismatched) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 Cheapest Stop exactness", criterion1},
      {"2 linear optimal control over 20 draws", criterion2},
      {"3 abnormal case rejected", criterion3},
      {"4 zero-port reduction", criterion4},
      {"5 direct oracle agreement", criterion5},
      {"6 certificate suite", criterion6},
      {"7 derivative and integrator hygiene", criterion7},
      {"8 argmax scale invariance", criterion8},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
