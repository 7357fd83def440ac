#include "portpmp/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "portpmp/error.hpp"

namespace portpmp {

// ---------------------------------------------------------------- values

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

double Interval::clamp(double x) const { return std::min(std::max(x, lo), hi); }

Signal::Signal() : expr_(Expr::constant(0.0)) {}

Signal Signal::expression(Expr expr) {
  Signal s;
  s.expr_ = std::move(expr);
  return s;
}

Signal Signal::table(std::vector<std::pair<double, double>> rows) {
  Signal s;
  s.is_table_ = true;
  s.rows_ = std::move(rows);
  return s;
}

double Signal::operator()(double t) const {
  if (!is_table_) {
    const double values[] = {t};
    return expr_.eval(std::span<const double>(values));
  }
  if (rows_.empty()) return 0.0;
  if (t <= rows_.front().first) return rows_.front().second;
  if (t >= rows_.back().first) return rows_.back().second;
  auto hi = std::upper_bound(rows_.begin(), rows_.end(), t,
                             [](double x, const std::pair<double, double>& row) { return x < row.first; });
  auto lo = hi - 1;
  double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

bool operator==(const Signal& a, const Signal& b) {
  if (a.is_table_ != b.is_table_) return false;
  return a.is_table_ ? a.rows_ == b.rows_ : a.expr_ == b.expr_;
}

bool operator==(const ControlProblem& a, const ControlProblem& b) {
  return a.n == b.n && a.l == b.l && a.k == b.k && a.t1 == b.t1 && a.state_prefix == b.state_prefix &&
         a.dynamics == b.dynamics && a.port_A == b.port_A && a.port_B == b.port_B &&
         a.running_cost == b.running_cost && a.sense == b.sense && a.control_bounds == b.control_bounds &&
         a.signal_f == b.signal_f && a.signal_fprime == b.signal_fprime && a.port_mode == b.port_mode &&
         a.q0 == b.q0 && a.terminal == b.terminal;
}

// ---------------------------------------------------------------- symbols

SymbolTable SymbolLayout::all() const {
  SymbolTable s;
  s.add("t");
  for (std::size_t i = 0; i < n; ++i) s.add(state_name(i));
  for (std::size_t j = 0; j < l; ++j) s.add(control_name(j));
  for (std::size_t p = 0; p < k; ++p) s.add(flow_name(p));
  for (std::size_t p = 0; p < k; ++p) s.add(lift_name(p));
  for (std::size_t p = 0; p < k; ++p) s.add(effort_name(p));
  return s;
}

SymbolTable SymbolLayout::dynamics_symbols() const {
  SymbolTable s;
  s.add("t");
  for (std::size_t i = 0; i < n; ++i) s.add(state_name(i));
  for (std::size_t j = 0; j < l; ++j) s.add(control_name(j));
  return s;
}

SymbolTable SymbolLayout::port_symbols() const {
  SymbolTable s;
  s.add("t");
  for (std::size_t i = 0; i < n; ++i) s.add(state_name(i));
  return s;
}

SymbolTable SymbolLayout::cost_symbols() const { return all(); }

// ---------------------------------------------------------------- validate

namespace {

void check_symbols(const Expr& e, const SymbolTable& allowed, const std::string& field,
                   std::vector<Diagnostic>& out) {
  for (const auto& name : e.variables()) {
    if (!allowed.contains(name)) out.push_back({field, "undeclared symbol '" + name + "'"});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const ControlProblem& p) {
  std::vector<Diagnostic> out;
  if (p.n < 1) out.push_back({"n", "state dimension must be at least 1"});
  if (p.l < 1) out.push_back({"l", "control dimension must be at least 1"});
  if (!(p.t1 > 0.0) || !std::isfinite(p.t1)) out.push_back({"t1", "final time must be finite and > 0"});
  if (p.state_prefix.empty() || !std::isalpha(static_cast<unsigned char>(p.state_prefix[0])) ||
      p.state_prefix == "u" || p.state_prefix == "f" || p.state_prefix == "e" || p.state_prefix == "fprime") {
    out.push_back({"state", "state prefix '" + p.state_prefix + "' is not a usable symbol name"});
  }

  const SymbolLayout layout = p.layout();
  if (p.dynamics.size() != p.n) {
    out.push_back({"dynamics", "expected " + std::to_string(p.n) + " expressions, got " +
                                   std::to_string(p.dynamics.size())});
  }
  for (std::size_t i = 0; i < p.dynamics.size(); ++i) {
    check_symbols(p.dynamics[i], layout.dynamics_symbols(), "dynamics[" + std::to_string(i + 1) + "]", out);
  }
  const std::size_t entries = p.n * p.k;
  for (const auto* port : {&p.port_A, &p.port_B}) {
    std::string field = port == &p.port_A ? "port_A" : "port_B";
    if (port->size() != entries) {
      out.push_back({field, "expected " + std::to_string(entries) + " entries (n*k), got " +
                                std::to_string(port->size())});
    }
    for (std::size_t i = 0; i < port->size(); ++i) {
      check_symbols((*port)[i], layout.port_symbols(), field + "[" + std::to_string(i + 1) + "]", out);
    }
  }
  check_symbols(p.running_cost, layout.cost_symbols(), "cost", out);

  if (p.control_bounds.size() != p.l) {
    out.push_back({"bounds", "expected " + std::to_string(p.l) + " intervals, got " +
                                 std::to_string(p.control_bounds.size())});
  }
  for (std::size_t j = 0; j < p.control_bounds.size(); ++j) {
    const auto& b = p.control_bounds[j];
    if (std::isnan(b.lo) || std::isnan(b.hi) || b.lo > b.hi || b.lo == std::numeric_limits<double>::infinity() ||
        b.hi == -std::numeric_limits<double>::infinity()) {
      out.push_back({"bounds[" + std::to_string(j + 1) + "]", "empty interval"});
    }
  }

  auto check_signals = [&](const std::vector<Signal>& sigs, const std::string& field, bool required) {
    if (required && sigs.size() != p.k) {
      out.push_back({field, "expected " + std::to_string(p.k) + " signals, got " + std::to_string(sigs.size())});
    }
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      const auto& s = sigs[i];
      std::string name = field + "[" + std::to_string(i + 1) + "]";
      if (s.is_table()) {
        if (s.rows().empty()) out.push_back({name, "table has no rows"});
        for (std::size_t r = 1; r < s.rows().size(); ++r) {
          if (!(s.rows()[r].first > s.rows()[r - 1].first)) {
            out.push_back({name, "table times must be strictly increasing"});
            break;
          }
        }
      } else {
        for (const auto& v : s.expr().variables()) {
          if (v != "t") out.push_back({name, "signal may only depend on t, found '" + v + "'"});
        }
      }
    }
  };
  check_signals(p.signal_f, "signal_f", true);
  check_signals(p.signal_fprime, "signal_fprime", p.port_mode == PortMode::kIndependent);

  if (p.q0.size() != p.n) {
    out.push_back({"q0", "expected " + std::to_string(p.n) + " values, got " + std::to_string(p.q0.size())});
  }
  for (double v : p.q0) {
    if (!std::isfinite(v)) out.push_back({"q0", "initial state must be finite"});
  }
  if (p.terminal.size() > p.n) out.push_back({"terminal", "more terminal constraints than states"});
  std::vector<bool> seen(p.n, false);
  for (const auto& c : p.terminal) {
    if (c.index >= p.n) {
      out.push_back({"terminal", "constraint on nonexistent state " + std::to_string(c.index + 1)});
    } else if (seen[c.index]) {
      out.push_back({"terminal", "duplicate constraint on " + layout.state_name(c.index)});
    } else {
      seen[c.index] = true;
    }
    if (!std::isfinite(c.value)) out.push_back({"terminal", "target must be finite"});
  }
  return out;
}

// ---------------------------------------------------------------- loader

namespace {

struct Line {
  std::string text;
  std::size_t number = 0;
  std::size_t column = 0;  // byte offset of `text` within the raw line
};

std::string_view trim(std::string_view s, std::size_t* lead = nullptr) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  if (lead != nullptr) *lead = a;
  return s.substr(a, b - a);
}

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class ProblemReader {
 public:
  explicit ProblemReader(std::string_view source) { split_sections(source); }

  ControlProblem read() {
    ControlProblem p;
    read_dims(p);
    const SymbolLayout layout = p.layout();

    p.dynamics = read_expressions("dynamics", layout.dynamics_symbols(), true);
    p.port_A = read_expressions("port_A", layout.port_symbols(), false);
    p.port_B = read_expressions("port_B", layout.port_symbols(), false);
    read_cost(p, layout);
    read_bounds(p);
    read_signals(p);
    read_boundary(p);

    if (p.dynamics.size() != p.n) {
      throw ValidationError("[dynamics]: expected " + std::to_string(p.n) + " expressions, got " +
                            std::to_string(p.dynamics.size()));
    }
    for (const auto* port : {&p.port_A, &p.port_B}) {
      if (port->size() != p.n * p.k) {
        throw ValidationError(std::string(port == &p.port_A ? "[port_A]" : "[port_B]") + ": expected " +
                              std::to_string(p.n * p.k) + " entries (n*k), got " + std::to_string(port->size()));
      }
    }
    return p;
  }

 private:
  void split_sections(std::string_view source) {
    std::size_t number = 0;
    std::string current;
    std::size_t start = 0;
    while (start <= source.size()) {
      std::size_t end = source.find('\n', start);
      if (end == std::string_view::npos) end = source.size();
      std::string_view raw = source.substr(start, end - start);
      ++number;
      std::size_t hash = raw.find('#');
      std::string_view body = hash == std::string_view::npos ? raw : raw.substr(0, hash);
      std::size_t lead = 0;
      std::string_view text = trim(body, &lead);
      if (!text.empty()) {
        if (text.front() == '[') {
          if (text.back() != ']') throw ParseError("unterminated section header", lead, number);
          current = std::string(trim(text.substr(1, text.size() - 2)));
          static const char* known[] = {"dims", "dynamics", "port_A", "port_B", "cost",
                                        "bounds", "signals", "boundary"};
          if (std::find(std::begin(known), std::end(known), current) == std::end(known)) {
            throw ParseError("unknown section [" + current + "]", lead, number);
          }
          if (sections_.count(current) != 0) throw ParseError("duplicate section [" + current + "]", lead, number);
          sections_[current];
        } else {
          if (current.empty()) throw ParseError("content before the first section", lead, number);
          sections_[current].push_back({std::string(text), number, lead});
        }
      }
      if (end == source.size()) break;
      start = end + 1;
    }
  }

  const std::vector<Line>* section(const std::string& name) const {
    auto it = sections_.find(name);
    return it == sections_.end() ? nullptr : &it->second;
  }

  static std::pair<std::string, std::string> key_value(const Line& line) {
    auto eq = line.text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line.column, line.number);
    return {std::string(trim(std::string_view(line.text).substr(0, eq))),
            std::string(trim(std::string_view(line.text).substr(eq + 1)))};
  }

  static double number_or_throw(std::string_view s, const Line& line) {
    auto v = to_number(s);
    if (!v) throw ParseError("expected a number, got '" + std::string(s) + "'", line.column, line.number);
    return *v;
  }

  static Expr parse_at(std::string_view text, std::size_t column, const Line& line, const SymbolTable& symbols) {
    try {
      return parse(text, symbols);
    } catch (const ParseError& e) {
      std::string msg = e.what();
      msg = msg.substr(msg.find(": ") + 2);
      throw ParseError(msg, column + e.offset(), line.number);
    } catch (const SymbolError& e) {
      throw SymbolError("line " + std::to_string(line.number) + ": " + e.what());
    }
  }

  static std::size_t dimension(const std::string& value, const Line& line) {
    double v = number_or_throw(value, line);
    if (v < 0 || v != std::floor(v) || v > 1e6) {
      throw ParseError("dimension must be a non-negative integer", line.column, line.number);
    }
    return static_cast<std::size_t>(v);
  }

  void read_dims(ControlProblem& p) {
    const auto* lines = section("dims");
    if (lines == nullptr) throw ValidationError("missing mandatory section [dims]");
    bool have_n = false, have_l = false, have_t1 = false;
    for (const auto& line : *lines) {
      auto [key, value] = key_value(line);
      if (key == "n") {
        p.n = dimension(value, line);
        have_n = true;
      } else if (key == "l") {
        p.l = dimension(value, line);
        have_l = true;
      } else if (key == "k") {
        p.k = dimension(value, line);
      } else if (key == "t1") {
        p.t1 = number_or_throw(value, line);
        have_t1 = true;
      } else if (key == "state") {
        p.state_prefix = value;
      } else {
        throw ParseError("unknown key '" + key + "' in [dims]", line.column, line.number);
      }
    }
    if (!have_n) throw ValidationError("[dims]: missing mandatory field n");
    if (!have_l) throw ValidationError("[dims]: missing mandatory field l");
    if (!have_t1) throw ValidationError("[dims]: missing mandatory field t1");
    if (p.n < 1) throw ValidationError("[dims]: n must be at least 1");
    if (p.l < 1) throw ValidationError("[dims]: l must be at least 1");
    if (!(p.t1 > 0.0) || !std::isfinite(p.t1)) throw ValidationError("[dims]: t1 must be finite and > 0");
  }

  std::vector<Expr> read_expressions(const std::string& name, const SymbolTable& symbols, bool mandatory) const {
    std::vector<Expr> out;
    const auto* lines = section(name);
    if (lines == nullptr) {
      if (mandatory) throw ValidationError("missing mandatory section [" + name + "]");
      return out;
    }
    for (const auto& line : *lines) {
      // Several entries of one row may share a line, separated by ';'.
      std::size_t start = 0;
      std::string_view text(line.text);
      for (;;) {
        std::size_t semi = text.find(';', start);
        std::string_view piece = text.substr(start, semi == std::string_view::npos ? semi : semi - start);
        out.push_back(parse_at(piece, line.column + start, line, symbols));
        if (semi == std::string_view::npos) break;
        start = semi + 1;
      }
    }
    return out;
  }

  void read_cost(ControlProblem& p, const SymbolLayout& layout) const {
    const auto* lines = section("cost");
    if (lines == nullptr) throw ValidationError("missing mandatory section [cost]");
    bool have_expr = false;
    for (const auto& line : *lines) {
      if (line.text.find('=') != std::string::npos) {
        auto [key, value] = key_value(line);
        if (key != "sense") throw ParseError("unknown key '" + key + "' in [cost]", line.column, line.number);
        if (value == "minimize" || value == "min") {
          p.sense = Sense::kMinimize;
        } else if (value == "maximize" || value == "max") {
          p.sense = Sense::kMaximize;
        } else {
          throw ParseError("sense must be minimize or maximize", line.column, line.number);
        }
        continue;
      }
      if (have_expr) throw ParseError("[cost] takes a single expression", line.column, line.number);
      p.running_cost = parse_at(line.text, line.column, line, layout.cost_symbols());
      have_expr = true;
    }
    if (!have_expr) throw ValidationError("[cost]: missing running cost expression");
  }

  void read_bounds(ControlProblem& p) const {
    const auto* lines = section("bounds");
    if (lines == nullptr) {
      p.control_bounds.assign(p.l, Interval{});
      return;
    }
    for (const auto& line : *lines) {
      auto parts = split_ws(line.text);
      if (parts.size() != 2) throw ParseError("expected 'lo hi'", line.column, line.number);
      Interval b{number_or_throw(parts[0], line), number_or_throw(parts[1], line)};
      if (!(b.lo <= b.hi)) throw ValidationError("line " + std::to_string(line.number) + ": bounds lo > hi");
      p.control_bounds.push_back(b);
    }
    if (p.control_bounds.size() != p.l) {
      throw ValidationError("[bounds]: expected " + std::to_string(p.l) + " intervals, got " +
                            std::to_string(p.control_bounds.size()));
    }
  }

  void read_signals(ControlProblem& p) const {
    p.signal_f.assign(p.k, Signal());
    p.signal_fprime.assign(p.k, Signal());
    const auto* lines = section("signals");
    if (lines == nullptr) return;
    const SymbolTable time_only(std::vector<std::string>{"t"});
    Signal* table_target = nullptr;
    std::vector<std::pair<double, double>> rows;
    auto flush = [&] {
      if (table_target != nullptr) *table_target = Signal::table(std::move(rows));
      table_target = nullptr;
      rows.clear();
    };
    for (const auto& line : *lines) {
      if (line.text.find('=') == std::string::npos) {
        if (table_target == nullptr) throw ParseError("table row outside a table", line.column, line.number);
        auto parts = split_ws(line.text);
        if (parts.size() != 2) throw ParseError("expected 'time value'", line.column, line.number);
        rows.emplace_back(number_or_throw(parts[0], line), number_or_throw(parts[1], line));
        continue;
      }
      flush();
      auto [key, value] = key_value(line);
      if (key == "mode") {
        if (value == "independent") {
          p.port_mode = PortMode::kIndependent;
        } else if (value == "linked") {
          p.port_mode = PortMode::kLinked;
        } else {
          throw ParseError("mode must be independent or linked", line.column, line.number);
        }
        continue;
      }
      std::vector<Signal>* family = nullptr;
      std::string index;
      if (key.rfind("fprime", 0) == 0) {
        family = &p.signal_fprime;
        index = key.substr(6);
      } else if (key.rfind("f", 0) == 0) {
        family = &p.signal_f;
        index = key.substr(1);
      }
      auto idx = to_number(index);
      if (family == nullptr || !idx || *idx < 1 || *idx != std::floor(*idx) || *idx > static_cast<double>(p.k)) {
        throw SymbolError("line " + std::to_string(line.number) + ": undeclared signal '" + key + "'");
      }
      Signal& target = (*family)[static_cast<std::size_t>(*idx) - 1];
      if (value == "table") {
        table_target = &target;
      } else {
        std::size_t col = line.column + line.text.find('=') + 1;
        target = Signal::expression(parse_at(value, col, line, time_only));
      }
    }
    flush();
  }

  void read_boundary(ControlProblem& p) const {
    const auto* lines = section("boundary");
    if (lines == nullptr) throw ValidationError("missing mandatory section [boundary]");
    const SymbolLayout layout = p.layout();
    bool have_q0 = false;
    for (const auto& line : *lines) {
      auto [key, value] = key_value(line);
      if (key == "q0") {
        for (auto part : split_ws(value)) p.q0.push_back(number_or_throw(part, line));
        if (p.q0.size() != p.n) {
          throw ValidationError("line " + std::to_string(line.number) + ": q0 needs " + std::to_string(p.n) +
                                " values, got " + std::to_string(p.q0.size()));
        }
        have_q0 = true;
      } else if (key.rfind("terminal", 0) == 0) {
        std::string name(trim(std::string_view(key).substr(8)));
        std::optional<std::size_t> index;
        for (std::size_t i = 0; i < p.n; ++i) {
          if (layout.state_name(i) == name) index = i;
        }
        if (!index) {
          throw SymbolError("line " + std::to_string(line.number) + ": undeclared symbol '" + name + "'");
        }
        p.terminal.push_back({*index, number_or_throw(value, line)});
      } else {
        throw ParseError("unknown key '" + key + "' in [boundary]", line.column, line.number);
      }
    }
    if (!have_q0) throw ValidationError("[boundary]: missing mandatory field q0");
  }

  std::map<std::string, std::vector<Line>> sections_;
};

std::string number_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ControlProblem load_problem(std::string_view source) {
  ControlProblem p = ProblemReader(source).read();
  auto diagnostics = validate(p);
  if (!diagnostics.empty()) {
    std::string msg;
    for (const auto& d : diagnostics) msg += (msg.empty() ? "" : "; ") + d.field + ": " + d.message;
    throw ValidationError(msg);
  }
  return p;
}

ControlProblem load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem(buf.str());
}

std::string serialize(const ControlProblem& p) {
  std::ostringstream out;
  const SymbolLayout layout = p.layout();
  out << "[dims]\n";
  out << "n = " << p.n << "\nl = " << p.l << "\nk = " << p.k << "\nt1 = " << number_text(p.t1) << "\n";
  if (p.state_prefix != "q") out << "state = " << p.state_prefix << "\n";

  out << "\n[dynamics]\n";
  for (const auto& e : p.dynamics) out << e.str() << "\n";

  if (p.k > 0) {
    for (const auto* port : {&p.port_A, &p.port_B}) {
      out << "\n" << (port == &p.port_A ? "[port_A]" : "[port_B]") << "\n";
      for (std::size_t row = 0; row < p.n; ++row) {
        for (std::size_t col = 0; col < p.k; ++col) {
          out << (col > 0 ? "; " : "") << (*port)[row * p.k + col].str();
        }
        out << "\n";
      }
    }
  }

  out << "\n[cost]\n" << p.running_cost.str() << "\n";
  if (p.sense == Sense::kMaximize) out << "sense = maximize\n";

  out << "\n[bounds]\n";
  for (const auto& b : p.control_bounds) out << number_text(b.lo) << " " << number_text(b.hi) << "\n";

  if (p.k > 0) {
    out << "\n[signals]\n";
    out << "mode = " << (p.port_mode == PortMode::kLinked ? "linked" : "independent") << "\n";
    auto emit = [&](const Signal& s, const std::string& name) {
      if (s.is_table()) {
        out << name << " = table\n";
        for (const auto& [t, v] : s.rows()) out << number_text(t) << " " << number_text(v) << "\n";
      } else {
        out << name << " = " << s.expr().str() << "\n";
      }
    };
    for (std::size_t i = 0; i < p.k; ++i) emit(p.signal_f[i], layout.flow_name(i));
    for (std::size_t i = 0; i < p.signal_fprime.size(); ++i) emit(p.signal_fprime[i], layout.lift_name(i));
  }

  out << "\n[boundary]\nq0 =";
  for (double v : p.q0) out << " " << number_text(v);
  out << "\n";
  for (const auto& c : p.terminal) {
    out << "terminal " << layout.state_name(c.index) << " = " << number_text(c.value) << "\n";
  }
  return out.str();
}

ControlProblem with_parameter(const ControlProblem& problem, std::string_view name, double value) {
  ControlProblem p = problem;
  const SymbolLayout layout = p.layout();
  auto state_index = [&](std::string_view state) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < p.n; ++i) {
      if (layout.state_name(i) == state) return i;
    }
    return std::nullopt;
  };
  if (name == "t1") {
    p.t1 = value;
    return p;
  }
  if (name.rfind("q0.", 0) == 0) {
    if (auto i = state_index(name.substr(3))) {
      p.q0[*i] = value;
      return p;
    }
  }
  if (name.rfind("terminal.", 0) == 0) {
    if (auto i = state_index(name.substr(9))) {
      for (auto& c : p.terminal) {
        if (c.index == *i) {
          c.value = value;
          return p;
        }
      }
    }
  }
  throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

}  // namespace portpmp
