#include "portpmp/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

#include "portpmp/error.hpp"

namespace portpmp {

SymbolTable::SymbolTable(std::vector<std::string> names) {
  for (const auto& name : names) add(name);
}

std::size_t SymbolTable::add(const std::string& name) {
  if (auto slot = find(name)) return *slot;
  index_.emplace(name, names_.size());
  names_.push_back(name);
  return names_.size() - 1;
}

std::optional<std::size_t> SymbolTable::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct FuncInfo {
  Func func;
  std::string_view name;
  std::size_t arity;
};

constexpr FuncInfo kFunctions[] = {
    {Func::kSin, "sin", 1},   {Func::kCos, "cos", 1},   {Func::kExp, "exp", 1},
    {Func::kLog, "log", 1},   {Func::kSqrt, "sqrt", 1}, {Func::kAbs, "abs", 1},
    {Func::kMin, "min", 2},   {Func::kMax, "max", 2},   {Func::kSign, "sign", 1},
    {Func::kIfLe, "ifle", 4},
};

const FuncInfo* lookup_function(std::string_view name) {
  for (const auto& info : kFunctions) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

NodePtr make_node(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::kConst && n->value == v; }

std::string format_number(double v) {
  char buf[64];
  // Shortest representation that round-trips.
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Precedence used by the printer: higher binds tighter.
int precedence(const Node& n) {
  switch (n.op) {
    case Op::kAdd:
    case Op::kSub:
      return 1;
    case Op::kMul:
    case Op::kDiv:
      return 2;
    case Op::kNeg:
      return 3;
    case Op::kPow:
      return 4;
    case Op::kConst:
      return n.value < 0 || std::signbit(n.value) ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(n, out);
  if (wrap) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::kConst:
      out += format_number(n.value);
      return;
    case Op::kVar:
      out += n.name;
      return;
    case Op::kNeg:
      out += '-';
      print_wrapped(*n.args[0], precedence(*n.args[0]) < 3, out);
      return;
    case Op::kAdd:
    case Op::kSub: {
      print_wrapped(*n.args[0], false, out);
      out += n.op == Op::kAdd ? " + " : " - ";
      print_wrapped(*n.args[1], precedence(*n.args[1]) <= 1, out);
      return;
    }
    case Op::kMul:
    case Op::kDiv: {
      print_wrapped(*n.args[0], precedence(*n.args[0]) < 2, out);
      out += n.op == Op::kMul ? "*" : "/";
      print_wrapped(*n.args[1], precedence(*n.args[1]) <= 2, out);
      return;
    }
    case Op::kPow:
      print_wrapped(*n.args[0], precedence(*n.args[0]) <= 4, out);
      out += '^';
      print_wrapped(*n.args[1], false, out);
      return;
    case Op::kCall: {
      out += function_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i > 0) out += ", ";
        print(*n.args[i], out);
      }
      out += ')';
      return;
    }
  }
}

template <typename Lookup>
double eval_node(const Node& n, const Lookup& lookup) {
  switch (n.op) {
    case Op::kConst:
      return n.value;
    case Op::kVar:
      return lookup(n);
    case Op::kNeg:
      return -eval_node(*n.args[0], lookup);
    case Op::kAdd:
      return eval_node(*n.args[0], lookup) + eval_node(*n.args[1], lookup);
    case Op::kSub:
      return eval_node(*n.args[0], lookup) - eval_node(*n.args[1], lookup);
    case Op::kMul:
      return eval_node(*n.args[0], lookup) * eval_node(*n.args[1], lookup);
    case Op::kDiv: {
      double den = eval_node(*n.args[1], lookup);
      if (den == 0.0) throw DomainError("division by zero in '" + Expr(std::make_shared<Node>(n)).str() + "'");
      return eval_node(*n.args[0], lookup) / den;
    }
    case Op::kPow: {
      double base = eval_node(*n.args[0], lookup);
      double ex = n.args[1]->value;
      bool integral = ex == std::floor(ex);
      if ((!integral && base < 0.0) || (base == 0.0 && ex < 0.0)) {
        throw DomainError("power of invalid base " + format_number(base) + " in '" +
                          Expr(std::make_shared<Node>(n)).str() + "'");
      }
      if (ex == 2.0) return base * base;
      return std::pow(base, ex);
    }
    case Op::kCall: {
      double a = eval_node(*n.args[0], lookup);
      switch (n.func) {
        case Func::kSin:
          return std::sin(a);
        case Func::kCos:
          return std::cos(a);
        case Func::kExp: {
          double r = std::exp(a);
          if (!std::isfinite(r)) throw DomainError("exp overflow in '" + Expr(std::make_shared<Node>(n)).str() + "'");
          return r;
        }
        case Func::kLog:
          if (a <= 0.0) {
            throw DomainError("log of non-positive value in '" + Expr(std::make_shared<Node>(n)).str() + "'");
          }
          return std::log(a);
        case Func::kSqrt:
          if (a < 0.0) throw DomainError("sqrt of negative value in '" + Expr(std::make_shared<Node>(n)).str() + "'");
          return std::sqrt(a);
        case Func::kAbs:
          return std::fabs(a);
        case Func::kSign:
          return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        case Func::kMin: {
          double b = eval_node(*n.args[1], lookup);
          return a <= b ? a : b;
        }
        case Func::kMax: {
          double b = eval_node(*n.args[1], lookup);
          return a >= b ? a : b;
        }
        case Func::kIfLe: {
          double b = eval_node(*n.args[1], lookup);
          return a <= b ? eval_node(*n.args[2], lookup) : eval_node(*n.args[3], lookup);
        }
      }
    }
  }
  return 0.0;
}

bool nodes_equal(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::kConst:
      return a.value == b.value && std::signbit(a.value) == std::signbit(b.value);
    case Op::kVar:
      return a.name == b.name;
    case Op::kCall:
      if (a.func != b.func) return false;
      break;
    default:
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!nodes_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

void collect_variables(const Node& n, std::set<std::string>& out) {
  if (n.op == Op::kVar) out.insert(n.name);
  for (const auto& arg : n.args) collect_variables(*arg, out);
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::string_view src, const SymbolTable& symbols) : src_(src), symbols_(symbols) {}

  Expr parse() {
    skip_ws();
    if (pos_ == src_.size()) fail("empty expression");
    Expr e = sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr sum() {
    Expr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr(make_node(Op::kAdd, {lhs.node(), product().node()}));
      } else if (accept('-')) {
        lhs = Expr(make_node(Op::kSub, {lhs.node(), product().node()}));
      } else {
        return lhs;
      }
    }
  }

  Expr product() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr(make_node(Op::kMul, {lhs.node(), unary().node()}));
      } else if (accept('/')) {
        lhs = Expr(make_node(Op::kDiv, {lhs.node(), unary().node()}));
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) {
      Expr inner = unary();
      if (inner.is_constant()) return Expr::constant(-inner.constant_value());
      return Expr(make_node(Op::kNeg, {inner.node()}));
    }
    return power();
  }

  Expr power() {
    Expr base = atom();
    skip_ws();
    if (accept('^')) {
      std::size_t at = pos_;
      Expr ex = unary();
      if (!ex.variables().empty()) {
        throw ParseError("exponent must be constant", at);
      }
      double value = ex.eval(std::span<const double>{});
      return Expr(make_node(Op::kPow, {base.node(), make_const(value)}));
    }
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(value);
  }

  Expr name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    std::string id(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const FuncInfo* info = lookup_function(id);
      if (info == nullptr) {
        pos_ = start;
        fail("unknown function '" + id + "'");
      }
      ++pos_;
      std::vector<Expr> args;
      args.push_back(sum());
      while (accept(',')) args.push_back(sum());
      if (!accept(')')) fail("expected ')' or ','");
      if (args.size() != info->arity) {
        std::size_t end = pos_;
        pos_ = start;
        (void)end;
        fail("function '" + id + "' takes " + std::to_string(info->arity) + " argument(s), got " +
             std::to_string(args.size()));
      }
      std::vector<NodePtr> nodes;
      for (const auto& a : args) nodes.push_back(a.node());
      auto n = make_node(Op::kCall, std::move(nodes));
      std::const_pointer_cast<Node>(n)->func = info->func;
      return Expr(n);
    }
    auto slot = symbols_.find(id);
    if (!slot) {
      throw SymbolError("undeclared symbol '" + id + "' at offset " + std::to_string(start));
    }
    return Expr::variable(id, *slot);
  }

  std::string_view src_;
  const SymbolTable& symbols_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- rewriting

template <typename Fn>
NodePtr map_vars(const NodePtr& n, const Fn& fn) {
  if (n->op == Op::kVar) return fn(*n);
  if (n->args.empty()) return n;
  auto copy = std::make_shared<Node>(*n);
  for (auto& arg : copy->args) arg = map_vars(arg, fn);
  return copy;
}

// Rebuilds a tree bottom-up through the folding builders.
Expr rebuild(const NodePtr& n) {
  switch (n->op) {
    case Op::kConst:
    case Op::kVar:
      return Expr(n);
    case Op::kNeg:
      return -rebuild(n->args[0]);
    case Op::kAdd:
      return rebuild(n->args[0]) + rebuild(n->args[1]);
    case Op::kSub:
      return rebuild(n->args[0]) - rebuild(n->args[1]);
    case Op::kMul:
      return rebuild(n->args[0]) * rebuild(n->args[1]);
    case Op::kDiv:
      return rebuild(n->args[0]) / rebuild(n->args[1]);
    case Op::kPow:
      return pow(rebuild(n->args[0]), n->args[1]->value);
    case Op::kCall: {
      std::vector<Expr> args;
      for (const auto& a : n->args) args.push_back(rebuild(a));
      return Expr::call(n->func, std::move(args));
    }
  }
  return Expr(n);
}

Expr derivative(const NodePtr& n, std::string_view var, std::vector<std::string>* warnings) {
  auto d = [&](const NodePtr& c) { return derivative(c, var, warnings); };
  auto warn = [&](const std::string& msg) {
    if (warnings != nullptr) warnings->push_back(msg);
  };
  switch (n->op) {
    case Op::kConst:
      return Expr::constant(0.0);
    case Op::kVar:
      return Expr::constant(n->name == var ? 1.0 : 0.0);
    case Op::kNeg:
      return -d(n->args[0]);
    case Op::kAdd:
      return d(n->args[0]) + d(n->args[1]);
    case Op::kSub:
      return d(n->args[0]) - d(n->args[1]);
    case Op::kMul: {
      Expr a(n->args[0]), b(n->args[1]);
      return d(n->args[0]) * b + a * d(n->args[1]);
    }
    case Op::kDiv: {
      Expr a(n->args[0]), b(n->args[1]);
      Expr da = d(n->args[0]), db = d(n->args[1]);
      if (db.is_constant() && db.constant_value() == 0.0) return da / b;
      return da / b - a * db / pow(b, 2.0);
    }
    case Op::kPow: {
      Expr base(n->args[0]);
      double ex = n->args[1]->value;
      return Expr::constant(ex) * pow(base, ex - 1.0) * d(n->args[0]);
    }
    case Op::kCall: {
      std::vector<Expr> a;
      for (const auto& arg : n->args) a.emplace_back(arg);
      switch (n->func) {
        case Func::kSin:
          return Expr::call(Func::kCos, {a[0]}) * d(n->args[0]);
        case Func::kCos:
          return -(Expr::call(Func::kSin, {a[0]}) * d(n->args[0]));
        case Func::kExp:
          return Expr(n) * d(n->args[0]);
        case Func::kLog:
          return d(n->args[0]) / a[0];
        case Func::kSqrt:
          return d(n->args[0]) / (Expr::constant(2.0) * Expr(n));
        case Func::kAbs:
          warn("abs(" + a[0].str() + "): derivative taken as 0 at the kink");
          return Expr::call(Func::kSign, {a[0]}) * d(n->args[0]);
        case Func::kSign:
          warn("sign(" + a[0].str() + "): derivative taken as 0 everywhere");
          return Expr::constant(0.0);
        case Func::kMin:
          warn("min(" + a[0].str() + ", " + a[1].str() + "): ties follow the first argument");
          return Expr::call(Func::kIfLe, {a[0], a[1], d(n->args[0]), d(n->args[1])});
        case Func::kMax:
          warn("max(" + a[0].str() + ", " + a[1].str() + "): ties follow the first argument");
          return Expr::call(Func::kIfLe, {a[1], a[0], d(n->args[0]), d(n->args[1])});
        case Func::kIfLe:
          return Expr::call(Func::kIfLe, {a[0], a[1], d(n->args[2]), d(n->args[3])});
      }
    }
  }
  return Expr::constant(0.0);
}

}  // namespace

// ---------------------------------------------------------------- Expr

Expr::Expr() : root_(make_const(0.0)) {}
Expr::Expr(NodePtr root) : root_(std::move(root)) {}

Expr Expr::constant(double value) { return Expr(make_const(value)); }

Expr Expr::variable(const std::string& name, std::size_t slot) {
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->name = name;
  n->slot = slot;
  return Expr(n);
}

Expr Expr::call(Func func, std::vector<Expr> args) {
  bool all_const = true;
  std::vector<NodePtr> nodes;
  for (const auto& a : args) {
    all_const = all_const && a.is_constant();
    nodes.push_back(a.node());
  }
  auto n = std::make_shared<Node>();
  n->op = Op::kCall;
  n->func = func;
  n->args = std::move(nodes);
  Expr e(n);
  if (all_const) {
    // Fold only when the value is finite and defined; otherwise keep the call
    // so evaluation reports the domain error.
    try {
      double v = e.eval(std::span<const double>{});
      if (std::isfinite(v)) return constant(v);
    } catch (const DomainError&) {
    }
  }
  if (func == Func::kIfLe && args[2] == args[3]) return args[2];
  return e;
}

double Expr::eval(std::span<const double> values) const {
  double r = eval_node(*root_, [&](const Node& n) -> double {
    if (n.slot >= values.size()) throw SymbolError("unbound variable '" + n.name + "'");
    return values[n.slot];
  });
  if (!std::isfinite(r)) throw DomainError("non-finite result in '" + str() + "'");
  return r;
}

double Expr::eval(const std::map<std::string, double>& env) const {
  double r = eval_node(*root_, [&](const Node& n) -> double {
    auto it = env.find(n.name);
    if (it == env.end()) throw SymbolError("unbound variable '" + n.name + "'");
    return it->second;
  });
  if (!std::isfinite(r)) throw DomainError("non-finite result in '" + str() + "'");
  return r;
}

Expr Expr::diff(std::string_view var, std::vector<std::string>* warnings) const {
  return derivative(root_, var, warnings);
}

Expr Expr::substitute(std::string_view var, const Expr& replacement) const {
  NodePtr mapped = map_vars(root_, [&](const Node& n) -> NodePtr {
    if (n.name == var) return replacement.node();
    return std::make_shared<Node>(n);
  });
  return rebuild(mapped);
}

Expr Expr::rebind(const SymbolTable& symbols) const {
  return Expr(map_vars(root_, [&](const Node& n) -> NodePtr {
    auto slot = symbols.find(n.name);
    if (!slot) throw SymbolError("undeclared symbol '" + n.name + "'");
    auto copy = std::make_shared<Node>(n);
    copy->slot = *slot;
    return copy;
  }));
}

std::string Expr::str() const {
  std::string out;
  print(*root_, out);
  return out;
}

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect_variables(*root_, out);
  return out;
}

bool Expr::depends_on(std::string_view var) const {
  auto vars = variables();
  return vars.find(std::string(var)) != vars.end();
}

bool operator==(const Expr& a, const Expr& b) { return nodes_equal(*a.root_, *b.root_); }

// ---------------------------------------------------------------- builders

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.constant_value());
  if (a.root().op == Op::kNeg) return Expr(a.root().args[0]);
  return Expr(make_node(Op::kNeg, {a.node()}));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
  if (is_const(a.node(), 0.0)) return b;
  if (is_const(b.node(), 0.0)) return a;
  return Expr(make_node(Op::kAdd, {a.node(), b.node()}));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
  if (is_const(b.node(), 0.0)) return a;
  if (is_const(a.node(), 0.0)) return -b;
  return Expr(make_node(Op::kSub, {a.node(), b.node()}));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
  if (is_const(a.node(), 0.0) || is_const(b.node(), 0.0)) return Expr::constant(0.0);
  if (is_const(a.node(), 1.0)) return b;
  if (is_const(b.node(), 1.0)) return a;
  if (is_const(a.node(), -1.0)) return -b;
  if (is_const(b.node(), -1.0)) return -a;
  return Expr(make_node(Op::kMul, {a.node(), b.node()}));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0) {
    return Expr::constant(a.constant_value() / b.constant_value());
  }
  if (is_const(a.node(), 0.0) && !is_const(b.node(), 0.0)) return Expr::constant(0.0);
  if (is_const(b.node(), 1.0)) return a;
  return Expr(make_node(Op::kDiv, {a.node(), b.node()}));
}

Expr pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return Expr::constant(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) {
    double b = base.constant_value();
    bool integral = exponent == std::floor(exponent);
    if ((integral || b > 0.0) && !(b == 0.0 && exponent < 0.0)) return Expr::constant(std::pow(b, exponent));
  }
  if (base.root().op == Op::kPow) {
    // (x^a)^b == x^(a*b) only for integer exponents where no sign is lost.
    double inner = base.root().args[1]->value;
    if (inner == std::floor(inner) && exponent == std::floor(exponent)) {
      return pow(Expr(base.root().args[0]), inner * exponent);
    }
  }
  return Expr(make_node(Op::kPow, {base.node(), make_const(exponent)}));
}

Expr parse(std::string_view source, const SymbolTable& symbols) { return Parser(source, symbols).parse(); }

std::string_view function_name(Func func) {
  for (const auto& info : kFunctions) {
    if (info.func == func) return info.name;
  }
  return "?";
}

}  // namespace portpmp
