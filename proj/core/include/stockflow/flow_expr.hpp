#pragma once

// Flow functions as expression trees.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
//
// IDENT is either a bare identifier [A-Za-z_][A-Za-z0-9_]* or a backquoted
// string `...` (backslash escapes ` and \), so that any link id can be
// written. Bare `t` is the time variable; bare exp/min/max are call names.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "stockflow/schema.hpp"

namespace sfd {

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div };
enum class Builtin : std::uint8_t { Exp, Min, Max };

class FlowExpr {
 public:
  struct Node;

  /// Negative values are stored as Neg(Number(|v|)). Throws on non-finite input.
  static FlowExpr number(double value);
  static FlowExpr var(Id link);
  static FlowExpr time();
  static FlowExpr neg(FlowExpr operand);
  static FlowExpr binary(BinaryOp op, FlowExpr lhs, FlowExpr rhs);
  static FlowExpr call(Builtin fn, std::vector<FlowExpr> args);

  const Node& node() const { return *node_; }

  /// Structural equality.
  friend bool operator==(const FlowExpr& a, const FlowExpr& b);

 private:
  explicit FlowExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

namespace expr {
struct Number {
  double value;
};
struct Var {
  Id name;
};
struct Time {};
struct Neg {
  FlowExpr operand;
};
struct Binary {
  BinaryOp op;
  FlowExpr lhs;
  FlowExpr rhs;
};
struct Call {
  Builtin fn;
  std::vector<FlowExpr> args;
};
}  // namespace expr

struct FlowExpr::Node {
  std::variant<expr::Number, expr::Var, expr::Time, expr::Neg, expr::Binary, expr::Call> value;
};

FlowExpr operator+(FlowExpr a, FlowExpr b);
FlowExpr operator-(FlowExpr a, FlowExpr b);
FlowExpr operator*(FlowExpr a, FlowExpr b);
FlowExpr operator/(FlowExpr a, FlowExpr b);

/// Throws SyntaxError with the byte offset and the set of expected tokens.
FlowExpr parse(std::string_view src);

/// Canonical text; parse(to_string(e)) == e.
std::string to_string(const FlowExpr& e);

/// Prints an identifier bare when possible, backquoted otherwise.
std::string quote_identifier(std::string_view id);

struct LinkEnv {
  std::unordered_map<Id, double> values;
  std::optional<double> time;
};

/// Throws Error{MissingVariable} or Error{DivisionByZero}.
double evaluate(const FlowExpr& e, const LinkEnv& env);

std::set<Id> free_links(const FlowExpr& e);
bool uses_time(const FlowExpr& e);

/// Replaces every link variable v by rename(v). Throws Error{MissingRename}.
FlowExpr precompose(const FlowExpr& e, const std::unordered_map<Id, Id>& rename);

/// Left fold of + over es. Throws Error{EmptySum}.
FlowExpr sum_exprs(std::span<const FlowExpr> es);

/// How two flow functions are compared: sampled at pseudo-random points.
struct EqCheckConfig {
  int samples = 100;
  double tol = 1e-9;
  std::uint64_t seed = 42;
  double lo = 0.0;
  double hi = 10.0;

  void validate() const;
  friend bool operator==(const EqCheckConfig&, const EqCheckConfig&) = default;
};

struct SampleComparison {
  bool equal = true;
  double max_abs_deviation = 0.0;
  int points = 0;
};

/// Both sides are evaluated on the same sample points over the union of their
/// free links. Equal iff |a-b| <= tol * max(1, |a|, |b|) at every point.
SampleComparison compare_sampled(const FlowExpr& a, const FlowExpr& b, const EqCheckConfig& cfg);

}  // namespace sfd
