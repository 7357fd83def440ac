#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "portpmp/bench.hpp"

namespace fs = std::filesystem;
using portpmp::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("portpmp_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    write("bench_classic.ocp", portpmp::classic_problem_text({}));
    portpmp::CheapestStopParams ported;
    ported.f = "0.1*t";
    ported.fprime = "0.1";
    write("bench_ported.ocp", portpmp::ported_problem_text(ported));
    portpmp::CheapestStopParams rest;
    rest.x0 = 0.5;
    rest.v0 = 0.0;
    rest.x1 = 0.5;
    write("zero_motion.ocp", portpmp::classic_problem_text(rest));
  }
  ~Workspace() { fs::remove_all(dir); }
  void write(const std::string& name, const std::string& text) { std::ofstream(dir / name) << text; }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("solve writes the trajectory") {
  Workspace ws;
  Result r = call({"solve", ws.path("bench_classic.ocp"), "--out", ws.path("out")});
  CHECK(r.code == 0);
  CHECK(r.out.find("status: converged") != std::string::npos);
  CHECK(r.out.find("wall time:") != std::string::npos);

  std::string csv = slurp(ws.dir / "out" / "bench_classic.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,q1,q2,lambda1,lambda2,u1,y,I");
  std::size_t rows = 0;
  double worst = 0.0;
  for (std::string line; std::getline(lines, line); ++rows) {
    std::istringstream cells(line);
    std::vector<double> v;
    for (std::string c; std::getline(cells, c, ',');) v.push_back(std::stod(c));
    REQUIRE(v.size() == 8);
    worst = std::max(worst, std::fabs(v[5] - (-6 * v[0] + 2)));
  }
  CHECK(rows == 1001);
  CHECK(worst < 1e-6);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(fs::exists(ws.dir / "out" / "bench_classic.report.txt"));

  // Byte-identical on a second run.
  call({"solve", ws.path("bench_classic.ocp"), "--out", ws.path("again")});
  CHECK(slurp(ws.dir / "again" / "bench_classic.csv") == csv);
}

TEST_CASE("ported trajectory header") {
  Workspace ws;
  Result r = call({"solve", ws.path("bench_ported.ocp"), "--out", ws.path("out"), "--steps", "200"});
  CHECK(r.code == 0);
  std::string csv = slurp(ws.dir / "out" / "bench_ported.csv");
  CHECK(csv.rfind("t,q1,q2,lambda1,lambda2,u1,f1,fprime1,e1,eprime1,y,I\n", 0) == 0);
}

TEST_CASE("solve exit codes") {
  Workspace ws;
  CHECK(call({"solve", ws.path("missing.ocp")}).code == 1);
  CHECK(call({"solve"}).code == 1);
  CHECK(call({"solve", ws.path("bench_classic.ocp"), "--nu", "sideways"}).code == 1);
  CHECK(call({"solve", ws.path("bench_classic.ocp"), "--steps", "1", "--out", ws.path("o")}).code == 1);
  CHECK(call({"solve", ws.path("bench_classic.ocp"), "--seed-lambda", "1,2,3", "--out", ws.path("o")}).code == 1);

  Result r = call({"solve", ws.path("bench_classic.ocp"), "--steps", "10", "--tol", "1e-300", "--out", ws.path("o")});
  CHECK(r.code == 2);
  CHECK(r.out.find("best_residual=") != std::string::npos);
  CHECK(fs::exists(ws.dir / "o" / "bench_classic.report.txt"));

  Result seeded = call({"solve", ws.path("bench_classic.ocp"), "--seed-lambda", "11,3", "--seed-lambda", "5,5",
                        "--nu", "normal", "--out", ws.path("o")});
  CHECK(seeded.code == 0);
  CHECK(seeded.out.find("seeds=2") != std::string::npos);
}

TEST_CASE("abnormal rejection is reported") {
  Workspace ws;
  Result r = call({"solve", ws.path("bench_classic.ocp"), "--nu", "abnormal", "--out", ws.path("o")});
  CHECK(r.code == 2);
  CHECK(r.out.find("abnormal case (nu = 0): rejected") != std::string::npos);
  CHECK(r.out.find("nontriviality violated") != std::string::npos);
}

TEST_CASE("compare") {
  Workspace ws;
  Result r = call({"compare", ws.path("bench_classic.ocp")});
  CHECK(r.code == 0);
  CHECK(r.out.find("result: pass") != std::string::npos);
  CHECK(call({"compare", ws.path("zero_motion.ocp")}).code == 0);
  Result strict = call({"compare", ws.path("bench_classic.ocp"), "--tol-rel", "0"});
  CHECK(strict.code == 3);
  CHECK(strict.out.find("result: FAIL") != std::string::npos);
}

TEST_CASE("sweep") {
  Workspace ws;
  Result r = call({"sweep", ws.path("bench_classic.ocp"), "--param", "t1", "--values", "0.5,1,2"});
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t1,J,nu,converged");
  std::vector<double> costs;
  std::vector<double> ts{0.5, 1.0, 2.0};
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string t, j, nu, ok;
    std::getline(cells, t, ',');
    std::getline(cells, j, ',');
    std::getline(cells, nu, ',');
    std::getline(cells, ok, ',');
    CHECK(ok == "true");
    costs.push_back(std::stod(j));
  }
  REQUIRE(costs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    portpmp::CheapestStopParams p;
    p.t1 = ts[i];
    CHECK(costs[i] == doctest::Approx(portpmp::analytic_classic(p).cost).epsilon(1e-8));
  }
  CHECK(costs[0] > costs[1]);
  CHECK(costs[1] > costs[2]);

  Result empty = call({"sweep", ws.path("bench_classic.ocp"), "--param", "t1", "--values", ""});
  CHECK(empty.code == 0);
  CHECK(empty.out == "t1,J,nu,converged\n");
  Result none = call({"sweep", ws.path("bench_classic.ocp"), "--param", "t1", "--range", "1:2:0"});
  CHECK(none.code == 0);
  CHECK(none.out == "t1,J,nu,converged\n");

  CHECK(call({"sweep", ws.path("bench_classic.ocp"), "--param", "mass", "--values", "1"}).code == 1);

  Result bad = call({"sweep", ws.path("bench_classic.ocp"), "--param", "t1", "--values", "-1,1"});
  CHECK(bad.code == 0);
  CHECK(bad.out.find("-1,nan,nan,false") != std::string::npos);

  Result ranged = call({"sweep", ws.path("bench_classic.ocp"), "--param", "q0.x2", "--range", "0:1:3"});
  CHECK(ranged.code == 0);
  CHECK(ranged.out.find("\n0.5,") != std::string::npos);
}

TEST_CASE("validate") {
  Workspace ws;
  CHECK(call({"validate", ws.path("bench_ported.ocp")}).code == 0);
  ws.write("broken.ocp", "[dims]\nn = 2\nl = 1\nt1 = 1\n[dynamics]\nx9\nu1\n[cost]\nu1^2\n[boundary]\nq0 = 0 0\n");
  Result r = call({"validate", ws.path("broken.ocp")});
  CHECK(r.code == 1);
  CHECK(r.err.find("x9") != std::string::npos);
}

TEST_CASE("bench emits loadable problem files") {
  Result r = call({"bench", "ported", "--fprime", "0.1", "--f", "0.1*t"});
  CHECK(r.code == 0);
  portpmp::CheapestStopParams p;
  p.f = "0.1*t";
  p.fprime = "0.1";
  CHECK(portpmp::load_problem(r.out) == portpmp::ported_problem(p));
}
