#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace portpmp {

/// Ordered set of variable names. The position of a name is the slot an
/// expression reads when evaluated against a value vector.
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<std::string> names);

  /// Appends `name` if absent; returns its slot either way.
  std::size_t add(const std::string& name);
  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class Op {
  kConst,
  kVar,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kCall,
};

/// Built-in functions. `sign` and `ifle` are produced by differentiation of
/// abs/min/max and are accepted by the parser so printed derivatives reload.
enum class Func { kSin, kCos, kExp, kLog, kSqrt, kAbs, kMin, kMax, kSign, kIfLe };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::kConst;
  double value = 0.0;      // kConst
  std::string name;        // kVar
  std::size_t slot = 0;    // kVar
  Func func = Func::kSin;  // kCall
  std::vector<NodePtr> args;
};

/// Immutable scalar expression tree.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(NodePtr root);

  static Expr constant(double value);
  static Expr variable(const std::string& name, std::size_t slot);
  static Expr call(Func func, std::vector<Expr> args);

  /// Evaluates with values indexed by the slots the expression was bound to.
  /// Throws DomainError instead of returning NaN/inf.
  double eval(std::span<const double> values) const;
  /// Evaluates by variable name. Throws SymbolError for an unbound variable.
  double eval(const std::map<std::string, double>& env) const;

  /// Exact symbolic derivative, lightly simplified. Differentiating abs, min,
  /// max or sign appends a note to `warnings` (when given): the derivative of
  /// abs at 0 is 0 and min/max follow their first argument on ties.
  Expr diff(std::string_view var, std::vector<std::string>* warnings = nullptr) const;

  /// Replaces every occurrence of variable `var` with `replacement`.
  Expr substitute(std::string_view var, const Expr& replacement) const;
  /// Re-resolves variable slots against `symbols`; throws SymbolError for
  /// names the table lacks.
  Expr rebind(const SymbolTable& symbols) const;

  /// Canonical text; parse(str()) reproduces the same tree.
  std::string str() const;

  std::set<std::string> variables() const;
  bool depends_on(std::string_view var) const;
  bool is_constant() const { return root_->op == Op::kConst; }
  double constant_value() const { return root_->value; }

  const Node& root() const { return *root_; }
  const NodePtr& node() const { return root_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
};

// Builders apply constant folding and the identities x+0, x*1, x*0, x^1, x^0.
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& base, double exponent);

/// Parses `source` over the names in `symbols`.
///
/// Grammar (whitespace-insensitive):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' unary)?
///   atom    := number | name | name '(' sum (',' sum)* ')' | '(' sum ')'
///
/// `^` is right associative and binds tighter than unary minus, so -x^2 is
/// -(x^2). The exponent must be free of variables. Errors carry the byte
/// offset of the offending token (ParseError) or name the unknown symbol
/// (SymbolError).
Expr parse(std::string_view source, const SymbolTable& symbols);

std::string_view function_name(Func func);

}  // namespace portpmp
