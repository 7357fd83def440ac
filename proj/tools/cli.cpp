#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "portpmp/bench.hpp"
#include "portpmp/direct_oracle.hpp"
#include "portpmp/indirect.hpp"
#include "portpmp/model.hpp"

namespace portpmp::cli {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

// Shortest round-trip text, for reports.
std::string short_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Thrown for bad flags or files; maps to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  if (text.find_first_not_of(' ') == std::string_view::npos) return out;
  std::size_t pos = 0;
  for (;;) {
    std::size_t comma = text.find(',', pos);
    out.push_back(parse_double(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& args) {
  std::string s = "portpmp";
  for (const auto& a : args) s += " " + a;
  return s;
}

std::string vector_text(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + short_number(v[i]);
  return s.empty() ? "(empty)" : s;
}

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// ---------------------------------------------------------------- options

struct SolveFlags {
  std::string file;
  std::size_t steps = 1000;
  double tol = 1e-9;
  std::vector<std::string> seeds;
  std::string nu = "auto";
  std::string out;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("file", f.file, "problem file")->required();
  cmd->add_option("--steps", f.steps, "RK4 steps on [0, t1]");
  cmd->add_option("--tol", f.tol, "shooting tolerance on the terminal residual");
  cmd->add_option("--seed-lambda", f.seeds, "extra initial costate v1,..,vn (repeatable)");
  cmd->add_option("--nu", f.nu, "cost multiplier class")->check(CLI::IsMember({"auto", "normal", "abnormal"}));
}

ControlProblem load(const std::string& path) {
  if (!fs::is_regular_file(path)) throw InputError("cannot read problem file '" + path + "'");
  return load_problem_file(path);
}

SolverConfig make_config(const SolveFlags& f, const ControlProblem& problem) {
  SolverConfig c;
  c.steps = f.steps;
  c.tol = f.tol;
  c.nu_mode = f.nu == "normal" ? NuMode::kNormal : f.nu == "abnormal" ? NuMode::kAbnormal : NuMode::kAuto;
  if (f.steps < 2) throw InputError("--steps must be at least 2");
  if (!(f.tol > 0.0)) throw InputError("--tol must be positive");
  for (const auto& s : f.seeds) {
    std::vector<double> v = parse_list(s);
    if (v.size() != problem.n) {
      throw InputError("--seed-lambda '" + s + "' has " + std::to_string(v.size()) + " entries, expected " +
                       std::to_string(problem.n));
    }
    c.seeds.push_back(Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return c;
}

std::string config_text(const SolverConfig& c, const SolveFlags& f) {
  std::ostringstream s;
  s << "steps=" << c.steps << " tol=" << short_number(c.tol) << " nu=" << f.nu << " max_newton=" << c.max_newton
    << " fd_step=" << short_number(c.fd_step) << " seeds=" << c.seeds.size();
  return s.str();
}

std::string attempts_text(const std::vector<StartReport>& attempts) {
  std::ostringstream s;
  for (const auto& a : attempts) {
    s << "  start [" << vector_text(a.start) << "] nu=" << short_number(a.nu)
      << (a.converged ? " converged" : a.rejected ? " rejected" : " failed")
      << " best_residual=" << short_number(a.residual_norm) << " iterations=" << a.iterations;
    if (!a.note.empty()) s << " (" << a.note << ")";
    s << "\n";
  }
  return s.str();
}

// Explicit line about the nu = 0 class when every abnormal start failed.
std::string abnormal_text(const std::vector<StartReport>& attempts) {
  std::vector<std::string> reasons;
  bool any = false;
  for (const auto& a : attempts) {
    if (a.nu != 0.0) continue;
    any = true;
    if (a.converged && !a.rejected) return "";
    if (!a.note.empty() && std::find(reasons.begin(), reasons.end(), a.note) == reasons.end()) {
      reasons.push_back(a.note);
    }
  }
  if (!any) return "";
  std::string s = "abnormal case (nu = 0): rejected";
  for (std::size_t i = 0; i < reasons.size(); ++i) s += (i ? "; " : ": ") + reasons[i];
  return s + "\n";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

std::string trajectory_csv(const ControlProblem& p, const Trajectory& tr) {
  std::string s = "t";
  for (std::size_t i = 1; i <= p.n; ++i) s += ",q" + std::to_string(i);
  for (std::size_t i = 1; i <= p.n; ++i) s += ",lambda" + std::to_string(i);
  for (std::size_t i = 1; i <= p.l; ++i) s += ",u" + std::to_string(i);
  for (std::size_t i = 1; i <= p.k; ++i) s += ",f" + std::to_string(i);
  for (std::size_t i = 1; i <= p.k; ++i) s += ",fprime" + std::to_string(i);
  for (std::size_t i = 1; i <= p.k; ++i) s += ",e" + std::to_string(i);
  for (std::size_t i = 1; i <= p.k; ++i) s += ",eprime" + std::to_string(i);
  s += ",y,I\n";
  auto put = [&](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) s += "," + format_number(v[i]);
  };
  for (std::size_t r = 0; r < tr.size(); ++r) {
    s += format_number(tr.t[r]);
    put(tr.q[r]);
    put(tr.lambda[r]);
    put(tr.u[r]);
    put(tr.f[r]);
    put(tr.fprime[r]);
    put(tr.e[r]);
    put(tr.eprime[r]);
    s += "," + format_number(tr.y[r]) + "," + format_number(tr.I[r]) + "\n";
  }
  return s;
}

std::string extremal_text(const Extremal& ex) {
  std::ostringstream s;
  s << "nu: " << short_number(ex.nu) << (ex.nu == 0.0 ? " (abnormal)" : " (normal)") << "\n";
  s << "J: " << short_number(ex.cost) << "\n";
  s << "residual: " << short_number(ex.residual_norm()) << "\n";
  s << "lambda0: " << vector_text(ex.lambda0) << "\n";
  s << "newton iterations: " << ex.iterations << "\n";
  return s.str();
}

// ---------------------------------------------------------------- commands

int cmd_solve(const SolveFlags& f, const std::string& echo, std::ostream& out) {
  const auto start = Clock::now();
  ControlProblem problem = load(f.file);
  SolverConfig config = make_config(f, problem);

  std::ostringstream report;
  report << "command: " << echo << "\n";
  report << "config: " << config_text(config, f) << "\n";
  int code = kOk;
  std::optional<Extremal> ex;
  try {
    ex = solve(problem, config);
  } catch (const SolverFailed& e) {
    report << "status: failed (" << e.what() << ")\n";
    report << abnormal_text(e.attempts());
    report << "starts:\n" << attempts_text(e.attempts());
    code = kSolverFailed;
  } catch (const Error& e) {
    report << "status: failed (" << e.what() << ")\n";
    code = kSolverFailed;
  }
  if (ex) {
    report << "status: converged\n" << extremal_text(*ex);
    report << abnormal_text(ex->attempts);
    report << "certificate:\n";
    std::istringstream cert(check_certificate(*ex, problem, config).summary());
    for (std::string line; std::getline(cert, line);) report << "  " << line << "\n";
  }
  report << "wall time: " << short_number(seconds_since(start)) << " s\n";

  out << report.str();
  const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
  const std::string stem = fs::path(f.file).stem().string();
  if (ex) write_file(dir / (stem + ".csv"), trajectory_csv(problem, ex->trajectory));
  write_file(dir / (stem + ".report.txt"), report.str());
  return code;
}

int cmd_compare(const SolveFlags& f, double tol_rel, std::size_t intervals, const std::string& echo,
                std::ostream& out) {
  const auto start = Clock::now();
  ControlProblem problem = load(f.file);
  SolverConfig config = make_config(f, problem);
  if (!(tol_rel >= 0.0)) throw InputError("--tol-rel must be non-negative");
  if (intervals < 2) throw InputError("--intervals must be at least 2");

  std::ostringstream report;
  report << "command: " << echo << "\n";
  report << "config: " << config_text(config, f) << " intervals=" << intervals << "\n";
  int code = kOk;
  try {
    Extremal ex = solve(problem, config);
    report << "status: converged\n" << extremal_text(ex);
    DirectOptions opts;
    opts.intervals = intervals;
    DirectSolution d = solve_direct(problem, opts);
    report << "direct: J=" << short_number(d.cost) << " defect=" << short_number(d.defect_norm)
           << " iterations=" << d.iterations << (d.converged ? " converged" : " not converged") << "\n";
    CompareReport cmp = compare(ex, d, tol_rel);
    report << cmp.summary();
    code = cmp.passed ? kOk : kCompareFailed;
  } catch (const SolverFailed& e) {
    report << "status: failed (" << e.what() << ")\n" << abnormal_text(e.attempts());
    report << "starts:\n" << attempts_text(e.attempts());
    code = kSolverFailed;
  } catch (const Error& e) {
    report << "status: failed (" << e.what() << ")\n";
    code = kSolverFailed;
  }
  report << "wall time: " << short_number(seconds_since(start)) << " s\n";
  out << report.str();
  if (!f.out.empty()) write_file(fs::path(f.out) / (fs::path(f.file).stem().string() + ".compare.txt"), report.str());
  return code;
}

struct SweepRow {
  double value = 0.0;
  double cost = std::nan("");
  double nu = std::nan("");
  bool converged = false;
};

SweepRow sweep_one(const ControlProblem& base, const std::string& param, double value, SolverConfig config) {
  SweepRow row;
  row.value = value;
  try {
    ControlProblem p = with_parameter(base, param, value);
    if (!validate(p).empty()) return row;
    Extremal ex = solve(p, config);
    row.cost = ex.cost;
    row.nu = ex.nu;
    row.converged = true;
  } catch (const Error&) {
  }
  return row;
}

int cmd_sweep(const SolveFlags& f, const std::string& param, const std::optional<std::string>& values,
              const std::optional<std::string>& range, std::ostream& out) {
  ControlProblem problem = load(f.file);
  SolverConfig config = make_config(f, problem);
  try {
    (void)with_parameter(problem, param, 1.0);
  } catch (const ValidationError& e) {
    throw InputError(e.what());
  }

  std::vector<double> grid;
  if (values && range) throw InputError("give either --values or --range, not both");
  if (values) {
    grid = parse_list(*values);
  } else if (range) {
    // lo:hi:count
    std::string r = *range;
    std::size_t a = r.find(':');
    std::size_t b = a == std::string::npos ? a : r.find(':', a + 1);
    if (b == std::string::npos) throw InputError("--range expects lo:hi:count");
    double lo = parse_double(std::string_view(r).substr(0, a));
    double hi = parse_double(std::string_view(r).substr(a + 1, b - a - 1));
    double count = parse_double(std::string_view(r).substr(b + 1));
    if (count < 0 || count != std::floor(count)) throw InputError("--range count must be a non-negative integer");
    const std::size_t m = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < m; ++i) {
      grid.push_back(m == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
    }
  } else {
    throw InputError("sweep needs --values or --range");
  }

  std::vector<SweepRow> rows(grid.size());
  if (std::thread::hardware_concurrency() > 1 && grid.size() > 1) {
    config.parallel = false;
    std::vector<std::future<SweepRow>> jobs;
    for (double v : grid) {
      jobs.push_back(std::async(std::launch::async, sweep_one, std::cref(problem), param, v, config));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) rows[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) rows[i] = sweep_one(problem, param, grid[i], config);
  }

  std::string csv = param + ",J,nu,converged\n";
  for (const auto& r : rows) {
    csv += format_number(r.value) + "," + format_number(r.cost) + "," + format_number(r.nu) + "," +
           (r.converged ? "true" : "false") + "\n";
  }
  if (f.out.empty()) {
    out << csv;
  } else {
    write_file(fs::path(f.out) / (fs::path(f.file).stem().string() + ".sweep.csv"), csv);
  }
  return kOk;
}

int cmd_validate(const std::string& file, std::ostream& out) {
  ControlProblem problem = load(file);
  out << "ok: n=" << problem.n << " l=" << problem.l << " k=" << problem.k << " t1=" << format_number(problem.t1)
      << " terminal constraints=" << problem.terminal.size() << "\n";
  Dynamics dyn(problem);
  for (const auto& w : dyn.warnings()) out << "warning: " << w << "\n";
  return kOk;
}

struct BenchFlags {
  std::string variant = "classic";
  CheapestStopParams params;
  std::string A = "1,0";
  std::string B = "0,1";
  std::string out;
};

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  CheapestStopParams p = f.params;
  auto column = [](const std::string& text, const char* name) {
    std::vector<double> v = parse_list(text);
    if (v.size() != 2) throw InputError(std::string(name) + " expects two entries");
    return std::array<double, 2>{v[0], v[1]};
  };
  p.A = column(f.A, "--A");
  p.B = column(f.B, "--B");
  std::string text = f.variant == "ported" ? ported_problem_text(p) : classic_problem_text(p);
  if (f.out.empty()) {
    out << text;
  } else {
    write_file(f.out, text);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control with power ports: indirect shooting and a direct cross-check", "portpmp"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem by costate shooting");
  add_solve_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--out", solve_flags.out, "directory for <name>.csv and <name>.report.txt (default .)");

  SolveFlags compare_flags;
  double tol_rel = 0.02;
  std::size_t intervals = 50;
  auto* compare_cmd = app.add_subcommand("compare", "check the shooting solution against direct transcription");
  add_solve_flags(compare_cmd, compare_flags);
  compare_cmd->add_option("--tol-rel", tol_rel, "allowed relative cost gap");
  compare_cmd->add_option("--intervals", intervals, "control intervals of the direct method");
  compare_cmd->add_option("--out", compare_flags.out, "directory for <name>.compare.txt");

  SolveFlags sweep_flags;
  std::string param;
  std::optional<std::string> values, range;
  auto* sweep_cmd = app.add_subcommand("sweep", "re-solve over values of one scalar");
  add_solve_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", param, "t1, q0.<state> or terminal.<state>")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values");
  sweep_cmd->add_option("--range", range, "lo:hi:count, evenly spaced");
  sweep_cmd->add_option("--out", sweep_flags.out, "directory for <name>.sweep.csv (default stdout)");

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "load and check a problem file");
  validate_cmd->add_option("file", validate_file, "problem file")->required();

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "emit a Cheapest Stop problem file");
  bench_cmd->add_option("variant", bench.variant)->check(CLI::IsMember({"classic", "ported"}));
  bench_cmd->add_option("--x0", bench.params.x0);
  bench_cmd->add_option("--v0", bench.params.v0);
  bench_cmd->add_option("--x1", bench.params.x1);
  bench_cmd->add_option("--t1", bench.params.t1);
  bench_cmd->add_option("--A", bench.A, "a1,a2");
  bench_cmd->add_option("--B", bench.B, "b1,b2");
  bench_cmd->add_option("--f", bench.params.f, "f1 as an expression in t");
  bench_cmd->add_option("--fprime", bench.params.fprime, "fprime1 as an expression in t");
  bench_cmd->add_option("--out", bench.out, "output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  const std::string echo = join(args);
  try {
    if (*solve_cmd) return cmd_solve(solve_flags, echo, out);
    if (*compare_cmd) return cmd_compare(compare_flags, tol_rel, intervals, echo, out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, param, values, range, out);
    if (*validate_cmd) return cmd_validate(validate_file, out);
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace portpmp::cli
