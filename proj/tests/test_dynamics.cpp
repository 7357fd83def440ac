#include <doctest.h>

#include <cmath>
#include <random>

#include "portpmp/bench.hpp"
#include "portpmp/dynamics.hpp"
#include "portpmp/error.hpp"
#include "support.hpp"

using namespace portpmp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ControlProblem ported(std::array<double, 2> A, std::array<double, 2> B, const char* f = "0",
                      const char* fprime = "0") {
  CheapestStopParams p;
  p.A = A;
  p.B = B;
  p.f = f;
  p.fprime = fprime;
  return ported_problem(p);
}

// q' = q on [0, 1], q(0) = 1.
ControlProblem exponential() {
  return load_problem(
      "[dims]\nn = 1\nl = 1\nt1 = 1\n[dynamics]\nq1\n[cost]\nu1^2\n[boundary]\nq0 = 1\n");
}

}  // namespace

TEST_CASE("vector_field") {
  Dynamics classic(classic_problem({}));
  CHECK(classic.vector_field(vec({0, 1}), vec({2}), Vector(), 0.0) == vec({1, 2}));

  Dynamics port(ported({1, 0}, {0, 1}));
  CHECK(port.vector_field(vec({0, 1}), vec({2}), vec({0.5}), 0.0) == vec({1, 2.5}));

  ControlProblem lin = load_problem(
      "[dims]\nn = 2\nl = 1\nt1 = 1\n[dynamics]\n2*q1 - q2\nq1 + u1\n[cost]\nu1^2\n[boundary]\nq0 = 0 0\n");
  CHECK(Dynamics(lin).vector_field(vec({0, 0}), vec({0}), Vector(), 0.3) == vec({0, 0}));
}

TEST_CASE("output_e") {
  Dynamics zero(ported({0, 0}, {0, 1}));
  CHECK(zero.output_e(vec({0, 3}), vec({1}), 0.0) == vec({0}));

  Dynamics a(ported({1, 0}, {0, 1}));
  CHECK(a.output_e(vec({0, 3}), vec({1}), 0.0) == vec({3}));

  // k = n with identity columns gives e = F.
  ControlProblem id = load_problem(R"([dims]
n = 2
l = 1
k = 2
t1 = 1
[dynamics]
q2
u1
[port_A]
1; 0
0; 1
[port_B]
0; 0
0; 0
[cost]
u1^2
[signals]
f1 = 0
f2 = 0
fprime1 = 0
fprime2 = 0
[boundary]
q0 = 0 0
)");
  Dynamics d(id);
  Vector q = vec({0.3, -1.7}), u = vec({2.5});
  CHECK(d.output_e(q, u, 0.0) == d.drift(q, u, 0.0));
}

TEST_CASE("output_eprime") {
  Dynamics zero(ported({1, 0}, {0, 0}));
  CHECK(zero.output_eprime(vec({0, 1}), vec({12, 4}), vec({1}), 0.0) == vec({0}));

  Dynamics b(ported({1, 0}, {0, 1}));
  CHECK(b.output_eprime(vec({0, 1}), vec({12, 4}), vec({1}), 0.0) == vec({12}));
  CHECK(b.output_eprime(vec({0, 1}), vec({0, 0}), vec({1}), 0.0) == vec({0}));
}

TEST_CASE("hamiltonian") {
  Dynamics d(classic_problem({}));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(-3, 3);
  for (int i = 0; i < 20; ++i) {
    Vector lam = vec({r(rng), r(rng)}), q = vec({r(rng), r(rng)}), u = vec({r(rng)});
    CHECK(d.hamiltonian(lam, q, u, 0.0) == doctest::Approx(lam[0] * q[1] + lam[1] * u[0]));
  }
  CHECK(d.hamiltonian(vec({0, 0}), vec({1, 2}), vec({3}), 0.0) == 0.0);
  CHECK(d.hamiltonian(vec({1, 2}), vec({0, 3}), vec({4}), 0.0) == 11.0);
}

TEST_CASE("extended_hamiltonian") {
  Dynamics classic(classic_problem({}));
  Vector lam = vec({1, 0}), q = vec({0, 3}), u = vec({2});
  CHECK(classic.extended_hamiltonian(lam, q, u, 0.0, 0.0, 0.0) == classic.hamiltonian(lam, q, u, 0.0));
  CHECK(classic.extended_hamiltonian(lam, q, u, 0.0, -1.0, 0.5) == doctest::Approx(-0.5));

  // xi1 x2 + xi2 u - (u^2 + (e1 + e2) f) with e1 = x2, e2 = u + f'.
  Dynamics port(ported({1, 0}, {0, 1}, "0.5", "0.2"));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(-2, 2);
  for (int i = 0; i < 20; ++i) {
    Vector xi = vec({r(rng), r(rng)}), x = vec({r(rng), r(rng)}), w = vec({r(rng)});
    const double e1 = x[1], e2 = w[0] + 0.2;
    const double by_hand = xi[0] * x[1] + xi[1] * w[0] - (w[0] * w[0] + (e1 + e2) * 0.5);
    CHECK(port.extended_hamiltonian(xi, x, w, 0.4, -1.0, 0.0) == doctest::Approx(by_hand).epsilon(1e-14));
  }
}

TEST_CASE("adjoint_rhs") {
  Dynamics classic(classic_problem({}));
  CHECK(classic.adjoint_rhs(vec({12, 4}), vec({0, 1}), vec({2}), Vector(), 0.0, -1.0) == vec({0, -12}));

  Dynamics port(ported({1, 0}, {0, 1}));
  CHECK(port.adjoint_rhs(vec({0, 0}), vec({1, 1}), vec({1}), vec({0}), 0.0, 0.0) == vec({0, 0}));
  CHECK(port.adjoint_rhs(vec({0, 0}), vec({1, 1}), vec({1}), vec({2}), 0.0, 0.0) == vec({2, 0}));
}

TEST_CASE("adjoint_rhs is linear in lambda for nu = 0 and f = 0") {
  ControlProblem p = load_problem(R"([dims]
n = 3
l = 1
t1 = 1
[dynamics]
sin(q1)*q2 + u1
q3^2 - q1*u1
exp(0.3*q2) - t
[cost]
u1^2 + q1^2
[boundary]
q0 = 0 0 0
)");
  Dynamics d(p);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r(-2, 2);
  for (int i = 0; i < 50; ++i) {
    Vector l1 = Vector::NullaryExpr(3, [&] { return r(rng); });
    Vector l2 = Vector::NullaryExpr(3, [&] { return r(rng); });
    Vector q = Vector::NullaryExpr(3, [&] { return r(rng); });
    Vector u = vec({r(rng)});
    const double a = r(rng), b = r(rng), t = 0.5;
    Vector lhs = d.adjoint_rhs(a * l1 + b * l2, q, u, Vector(), t, 0.0);
    Vector rhs = a * d.adjoint_rhs(l1, q, u, Vector(), t, 0.0) + b * d.adjoint_rhs(l2, q, u, Vector(), t, 0.0);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("state jacobian agrees with finite differences") {
  ControlProblem p = load_problem(R"([dims]
n = 3
l = 2
t1 = 1
[dynamics]
sin(q1)*q2 + u1*q3
q3^2 - q1*u2 + log(1 + q2^2)
exp(0.3*q2)*cos(t) - u1^2
[cost]
u1^2 + u2^2
[boundary]
q0 = 0 0 0
)");
  Dynamics d(p);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> r(-2, 2);
  for (int i = 0; i < 100; ++i) {
    Vector q = Vector::NullaryExpr(3, [&] { return r(rng); });
    Vector u = Vector::NullaryExpr(2, [&] { return r(rng); });
    const double t = r(rng);
    Matrix J = d.state_jacobian(q, u, t);
    for (Eigen::Index row = 0; row < 3; ++row) {
      for (Eigen::Index col = 0; col < 3; ++col) {
        double fd = testsupport::fd_derivative(
            [&](double v) {
              Vector y = q;
              y[col] = v;
              return d.drift(y, u, t)[row];
            },
            q[col]);
        CHECK(std::fabs(J(row, col) - fd) <= 1e-6 * (1.0 + std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("zero-port problems have zero outputs and no port integral") {
  Dynamics d(ported({0, 0}, {0, 0}));
  Vector lam = vec({1.5, -2}), q = vec({0.3, 0.7}), u = vec({0.9});
  CHECK(d.output_e(q, u, 0.2) == vec({0}));
  CHECK(d.output_eprime(q, lam, u, 0.2) == vec({0}));
  Dynamics c(classic_problem({}));
  CHECK(d.hamiltonian(lam, q, u, 0.2) == c.hamiltonian(lam, q, u, 0.2));
  CHECK(d.adjoint_rhs(lam, q, u, vec({0}), 0.2, -1.0) == c.adjoint_rhs(lam, q, u, Vector(), 0.2, -1.0));

  Trajectory tr = integrate_coupled(
      d, [](double, const Vector&, const Vector& l) { return vec({l[1] / 2}); }, vec({12, 4}), -1.0, 100);
  for (double I : tr.I) CHECK(I == 0.0);
}

TEST_CASE("linked port mode differentiates f") {
  ControlProblem p = ported({1, 0}, {0, 1}, "sin(t)");
  p.port_mode = PortMode::kLinked;
  Dynamics d(p);
  for (double t : {0.1, 0.4, 0.9}) {
    CHECK(d.inputs(t).fprime[0] == doctest::Approx(std::cos(t)).epsilon(1e-6));
  }
}

TEST_CASE("rk4 on constant and exponential fields") {
  std::vector<Vector> nodes;
  rk4([](double, const Vector& z) { return Vector::Zero(z.size()).eval(); }, vec({1, 2}), 0.0, 1.0, 10,
      [&](std::size_t, double, const Vector& z) { nodes.push_back(z); });
  REQUIRE(nodes.size() == 11);
  for (const auto& z : nodes) CHECK(z == vec({1, 2}));

  Dynamics d(exponential());
  Trajectory tr = integrate_coupled(d, [](double, const Vector&, const Vector&) { return vec({0}); }, vec({0}),
                                    -1.0, 100);
  CHECK(std::fabs(tr.q.back()[0] - std::exp(1.0)) < 1e-8);
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == 1.0);
  CHECK(tr.y.front() == 0.0);
  CHECK(tr.I.front() == 0.0);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.t[i] > tr.t[i - 1]);
}

TEST_CASE("rk4 is fourth order") {
  auto error = [](std::size_t n) {
    double end = 0.0;
    rk4([](double, const Vector& z) { return z; }, vec({1}), 0.0, 1.0, n,
        [&](std::size_t, double, const Vector& z) { end = z[0]; });
    return std::fabs(end - std::exp(1.0));
  };
  const double ratio = error(10) / error(20);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("integrating the benchmark control reaches the target") {
  Dynamics d(classic_problem({}));
  Trajectory tr = integrate_coupled(
      d, [](double t, const Vector&, const Vector&) { return vec({-6 * t + 2}); }, vec({12, 4}), -1.0, 1000);
  CHECK(std::fabs(tr.q.back()[0] - 1.0) < 1e-8);
  CHECK(std::fabs(tr.q.back()[1] - 0.0) < 1e-8);
  CHECK(tr.y.back() == doctest::Approx(4.0).epsilon(1e-10));
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.y[i] >= tr.y[i - 1]);
}

TEST_CASE("integration errors") {
  Dynamics d(exponential());
  auto zero = [](double, const Vector&, const Vector&) { return vec({0}); };
  CHECK_THROWS_AS(integrate_coupled(d, zero, vec({0}), -1.0, 1), ValidationError);

  ControlProblem blow = load_problem(
      "[dims]\nn = 1\nl = 1\nt1 = 1\n[dynamics]\nq1^2\n[cost]\nu1^2\n[boundary]\nq0 = 1e200\n");
  try {
    integrate_coupled(Dynamics(blow), zero, vec({0}), -1.0, 10);
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.step() < 10);
  }
}
