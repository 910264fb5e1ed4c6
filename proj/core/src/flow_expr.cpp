#include "stockflow/flow_expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>

#include "stockflow/error.hpp"

namespace sfd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_reserved(std::string_view s) {
  return s == "t" || s == "exp" || s == "min" || s == "max";
}

std::string_view builtin_name(Builtin fn) {
  switch (fn) {
    case Builtin::Exp: return "exp";
    case Builtin::Min: return "min";
    case Builtin::Max: return "max";
  }
  return "?";
}

std::size_t builtin_arity(Builtin fn) { return fn == Builtin::Exp ? 1 : 2; }

}  // namespace

FlowExpr FlowExpr::number(double value) {
  if (!std::isfinite(value))
    throw Error(ErrorKind::Syntax, "numeric literal must be finite");
  if (std::signbit(value) && value != 0.0) return neg(number(-value));
  return FlowExpr(std::make_shared<const Node>(Node{expr::Number{std::fabs(value)}}));
}

FlowExpr FlowExpr::var(Id link) {
  return FlowExpr(std::make_shared<const Node>(Node{expr::Var{std::move(link)}}));
}

FlowExpr FlowExpr::time() { return FlowExpr(std::make_shared<const Node>(Node{expr::Time{}})); }

FlowExpr FlowExpr::neg(FlowExpr operand) {
  return FlowExpr(std::make_shared<const Node>(Node{expr::Neg{std::move(operand)}}));
}

FlowExpr FlowExpr::binary(BinaryOp op, FlowExpr lhs, FlowExpr rhs) {
  return FlowExpr(
      std::make_shared<const Node>(Node{expr::Binary{op, std::move(lhs), std::move(rhs)}}));
}

FlowExpr FlowExpr::call(Builtin fn, std::vector<FlowExpr> args) {
  if (args.size() != builtin_arity(fn))
    throw Error(ErrorKind::Syntax, std::string(builtin_name(fn)) + " takes " +
                                       std::to_string(builtin_arity(fn)) + " argument(s)");
  return FlowExpr(std::make_shared<const Node>(Node{expr::Call{fn, std::move(args)}}));
}

bool operator==(const FlowExpr& a, const FlowExpr& b) {
  if (a.node_ == b.node_) return true;
  return std::visit(
      overloaded{
          [](const expr::Number& x, const expr::Number& y) { return x.value == y.value; },
          [](const expr::Var& x, const expr::Var& y) { return x.name == y.name; },
          [](const expr::Time&, const expr::Time&) { return true; },
          [](const expr::Neg& x, const expr::Neg& y) { return x.operand == y.operand; },
          [](const expr::Binary& x, const expr::Binary& y) {
            return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
          },
          [](const expr::Call& x, const expr::Call& y) {
            return x.fn == y.fn && x.args == y.args;
          },
          [](const auto&, const auto&) { return false; },
      },
      a.node().value, b.node().value);
}

FlowExpr operator+(FlowExpr a, FlowExpr b) {
  return FlowExpr::binary(BinaryOp::Add, std::move(a), std::move(b));
}
FlowExpr operator-(FlowExpr a, FlowExpr b) {
  return FlowExpr::binary(BinaryOp::Sub, std::move(a), std::move(b));
}
FlowExpr operator*(FlowExpr a, FlowExpr b) {
  return FlowExpr::binary(BinaryOp::Mul, std::move(a), std::move(b));
}
FlowExpr operator/(FlowExpr a, FlowExpr b) {
  return FlowExpr::binary(BinaryOp::Div, std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Number, Ident, Quoted, Plus, Minus, Star, Slash, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
  double number = 0.0;
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::Number: return "number";
    case Tok::Ident:
    case Tok::Quoted: return "identifier";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
    std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::End, start, ""};
    char c = src_[pos_];
    switch (c) {
      case '+': ++pos_; return {Tok::Plus, start, "+"};
      case '-': ++pos_; return {Tok::Minus, start, "-"};
      case '*': ++pos_; return {Tok::Star, start, "*"};
      case '/': ++pos_; return {Tok::Slash, start, "/"};
      case '(': ++pos_; return {Tok::LParen, start, "("};
      case ')': ++pos_; return {Tok::RParen, start, ")"};
      case ',': ++pos_; return {Tok::Comma, start, ","};
      case '`': return quoted(start);
      default: break;
    }
    if (is_digit(c) || c == '.') return number(start);
    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      return {Tok::Ident, start, std::string(src_.substr(start, pos_ - start))};
    }
    throw SyntaxError(start, {"expression"},
                      "unexpected character '" + std::string(1, c) + "' at offset " +
                          std::to_string(start));
  }

 private:
  Token number(std::size_t start) {
    std::size_t p = pos_;
    std::size_t digits = 0;
    while (p < src_.size() && is_digit(src_[p])) ++p, ++digits;
    if (p < src_.size() && src_[p] == '.') {
      ++p;
      while (p < src_.size() && is_digit(src_[p])) ++p, ++digits;
    }
    if (digits == 0)
      throw SyntaxError(start, {"number"}, "malformed number at offset " + std::to_string(start));
    if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      std::size_t exp_digits = 0;
      while (q < src_.size() && is_digit(src_[q])) ++q, ++exp_digits;
      if (exp_digits == 0)
        throw SyntaxError(q, {"exponent digits"},
                          "malformed exponent at offset " + std::to_string(q));
      p = q;
    }
    std::string text(src_.substr(start, p - start));
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value))
      throw SyntaxError(start, {"number"}, "number out of range at offset " + std::to_string(start));
    pos_ = p;
    Token tok{Tok::Number, start, std::move(text)};
    tok.number = value;
    return tok;
  }

  Token quoted(std::size_t start) {
    std::string out;
    std::size_t p = pos_ + 1;
    while (true) {
      if (p >= src_.size())
        throw SyntaxError(p, {"'`'"}, "unterminated quoted identifier starting at offset " +
                                          std::to_string(start));
      char c = src_[p];
      if (c == '`') break;
      if (c == '\\') {
        if (p + 1 >= src_.size())
          throw SyntaxError(p + 1, {"escaped character"}, "dangling escape");
        out.push_back(src_[p + 1]);
        p += 2;
        continue;
      }
      out.push_back(c);
      ++p;
    }
    pos_ = p + 1;
    if (out.empty()) throw SyntaxError(start, {"identifier"}, "empty quoted identifier");
    return {Tok::Quoted, start, std::move(out)};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  FlowExpr parse_all() {
    FlowExpr e = expression();
    if (cur_.kind != Tok::End) fail({"operator", "end of input"});
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string message = "syntax error at ";
    message += cur_.kind == Tok::End ? "end of input" : "'" + cur_.text + "'";
    message += " (offset " + std::to_string(cur_.offset) + "); expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i != 0) message += " or ";
      message += expected[i];
    }
    throw SyntaxError(cur_.offset, std::move(expected), message);
  }

  void expect(Tok kind) {
    if (cur_.kind != kind) fail({describe(kind)});
    advance();
  }

  FlowExpr expression() {
    FlowExpr lhs = term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      BinaryOp op = cur_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      lhs = FlowExpr::binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  FlowExpr term() {
    FlowExpr lhs = factor();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      BinaryOp op = cur_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      lhs = FlowExpr::binary(op, std::move(lhs), factor());
    }
    return lhs;
  }

  FlowExpr factor() {
    switch (cur_.kind) {
      case Tok::Minus: {
        advance();
        return FlowExpr::neg(factor());
      }
      case Tok::Number: {
        // Literals are never negative here; build the node directly.
        FlowExpr e = FlowExpr::number(cur_.number);
        advance();
        return e;
      }
      case Tok::Quoted: {
        FlowExpr e = FlowExpr::var(cur_.text);
        advance();
        return e;
      }
      case Tok::Ident: return identifier();
      case Tok::LParen: {
        advance();
        FlowExpr e = expression();
        expect(Tok::RParen);
        return e;
      }
      default: fail({"number", "identifier", "'('", "'-'"});
    }
  }

  FlowExpr identifier() {
    Token name = cur_;
    advance();
    std::optional<Builtin> fn;
    if (name.text == "exp") fn = Builtin::Exp;
    if (name.text == "min") fn = Builtin::Min;
    if (name.text == "max") fn = Builtin::Max;
    if (cur_.kind == Tok::LParen) {
      if (!fn)
        throw SyntaxError(name.offset, {"exp", "min", "max"},
                          "unknown function '" + name.text + "' at offset " +
                              std::to_string(name.offset));
      advance();
      std::vector<FlowExpr> args;
      args.push_back(expression());
      while (cur_.kind == Tok::Comma) {
        advance();
        args.push_back(expression());
      }
      expect(Tok::RParen);
      if (args.size() != builtin_arity(*fn))
        throw SyntaxError(name.offset, {std::to_string(builtin_arity(*fn)) + " argument(s)"},
                          name.text + " takes " + std::to_string(builtin_arity(*fn)) +
                              " argument(s), got " + std::to_string(args.size()));
      return FlowExpr::call(*fn, std::move(args));
    }
    if (fn) fail({"'('"});
    if (name.text == "t") return FlowExpr::time();
    return FlowExpr::var(name.text);
  }

  Lexer lexer_;
  Token cur_{Tok::End, 0, ""};
};

// ---------------------------------------------------------------------------
// Printer

int precedence(const FlowExpr& e) {
  if (const auto* b = std::get_if<expr::Binary>(&e.node().value))
    return (b->op == BinaryOp::Add || b->op == BinaryOp::Sub) ? 1 : 2;
  return 3;
}

void print(const FlowExpr& e, std::string& out);

void print_operand(const FlowExpr& e, bool parenthesize, std::string& out) {
  if (parenthesize) out.push_back('(');
  print(e, out);
  if (parenthesize) out.push_back(')');
}

void print(const FlowExpr& e, std::string& out) {
  std::visit(overloaded{
                 [&](const expr::Number& n) {
                   char buf[64];
                   auto [end, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
                   out.append(buf, end);
                 },
                 [&](const expr::Var& v) { out += quote_identifier(v.name); },
                 [&](const expr::Time&) { out += 't'; },
                 [&](const expr::Neg& n) {
                   out.push_back('-');
                   print_operand(n.operand, precedence(n.operand) < 3, out);
                 },
                 [&](const expr::Binary& b) {
                   int p = precedence(e);
                   print_operand(b.lhs, precedence(b.lhs) < p, out);
                   switch (b.op) {
                     case BinaryOp::Add: out += " + "; break;
                     case BinaryOp::Sub: out += " - "; break;
                     case BinaryOp::Mul: out += " * "; break;
                     case BinaryOp::Div: out += " / "; break;
                   }
                   print_operand(b.rhs, precedence(b.rhs) <= p, out);
                 },
                 [&](const expr::Call& c) {
                   out += builtin_name(c.fn);
                   out.push_back('(');
                   for (std::size_t i = 0; i < c.args.size(); ++i) {
                     if (i != 0) out += ", ";
                     print(c.args[i], out);
                   }
                   out.push_back(')');
                 },
             },
             e.node().value);
}

}  // namespace

FlowExpr parse(std::string_view src) { return Parser(src).parse_all(); }

std::string to_string(const FlowExpr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string quote_identifier(std::string_view id) {
  bool bare = !id.empty() && is_ident_start(id.front()) && !is_reserved(id) &&
              std::all_of(id.begin(), id.end(), is_ident_char);
  if (bare) return std::string(id);
  std::string out = "`";
  for (char c : id) {
    if (c == '`' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('`');
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

double evaluate(const FlowExpr& e, const LinkEnv& env) {
  return std::visit(
      overloaded{
          [](const expr::Number& n) { return n.value; },
          [&](const expr::Var& v) {
            auto it = env.values.find(v.name);
            if (it == env.values.end())
              throw Error(ErrorKind::MissingVariable, "no value for link '" + v.name + "'");
            return it->second;
          },
          [&](const expr::Time&) {
            if (!env.time) throw Error(ErrorKind::MissingVariable, "no value for time 't'");
            return *env.time;
          },
          [&](const expr::Neg& n) { return -evaluate(n.operand, env); },
          [&](const expr::Binary& b) {
            double x = evaluate(b.lhs, env);
            double y = evaluate(b.rhs, env);
            switch (b.op) {
              case BinaryOp::Add: return x + y;
              case BinaryOp::Sub: return x - y;
              case BinaryOp::Mul: return x * y;
              case BinaryOp::Div:
                if (y == 0.0) throw Error(ErrorKind::DivisionByZero, "division by zero");
                return x / y;
            }
            return 0.0;
          },
          [&](const expr::Call& c) {
            switch (c.fn) {
              case Builtin::Exp: return std::exp(evaluate(c.args[0], env));
              case Builtin::Min: return std::min(evaluate(c.args[0], env), evaluate(c.args[1], env));
              case Builtin::Max: return std::max(evaluate(c.args[0], env), evaluate(c.args[1], env));
            }
            return 0.0;
          },
      },
      e.node().value);
}

namespace {

void collect(const FlowExpr& e, std::set<Id>& links, bool& time) {
  std::visit(overloaded{
                 [](const expr::Number&) {},
                 [&](const expr::Var& v) { links.insert(v.name); },
                 [&](const expr::Time&) { time = true; },
                 [&](const expr::Neg& n) { collect(n.operand, links, time); },
                 [&](const expr::Binary& b) {
                   collect(b.lhs, links, time);
                   collect(b.rhs, links, time);
                 },
                 [&](const expr::Call& c) {
                   for (const auto& a : c.args) collect(a, links, time);
                 },
             },
             e.node().value);
}

}  // namespace

std::set<Id> free_links(const FlowExpr& e) {
  std::set<Id> links;
  bool time = false;
  collect(e, links, time);
  return links;
}

bool uses_time(const FlowExpr& e) {
  std::set<Id> links;
  bool time = false;
  collect(e, links, time);
  return time;
}

FlowExpr precompose(const FlowExpr& e, const std::unordered_map<Id, Id>& rename) {
  return std::visit(
      overloaded{
          [&](const expr::Number&) { return e; },
          [&](const expr::Var& v) {
            auto it = rename.find(v.name);
            if (it == rename.end())
              throw Error(ErrorKind::MissingRename, "no rename for link '" + v.name + "'");
            return FlowExpr::var(it->second);
          },
          [&](const expr::Time&) { return e; },
          [&](const expr::Neg& n) { return FlowExpr::neg(precompose(n.operand, rename)); },
          [&](const expr::Binary& b) {
            return FlowExpr::binary(b.op, precompose(b.lhs, rename), precompose(b.rhs, rename));
          },
          [&](const expr::Call& c) {
            std::vector<FlowExpr> args;
            args.reserve(c.args.size());
            for (const auto& a : c.args) args.push_back(precompose(a, rename));
            return FlowExpr::call(c.fn, std::move(args));
          },
      },
      e.node().value);
}

FlowExpr sum_exprs(std::span<const FlowExpr> es) {
  if (es.empty()) throw Error(ErrorKind::EmptySum, "sum of no flow functions");
  FlowExpr acc = es.front();
  for (std::size_t i = 1; i < es.size(); ++i) acc = acc + es[i];
  return acc;
}

void EqCheckConfig::validate() const {
  if (samples < 1) throw Error(ErrorKind::InvalidConfig, "samples must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "tol must be > 0");
  if (!(hi >= lo)) throw Error(ErrorKind::InvalidConfig, "sample domain is empty");
}

SampleComparison compare_sampled(const FlowExpr& a, const FlowExpr& b, const EqCheckConfig& cfg) {
  cfg.validate();
  std::set<Id> vars = free_links(a);
  std::set<Id> vb = free_links(b);
  vars.insert(vb.begin(), vb.end());
  bool timed = uses_time(a) || uses_time(b);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(cfg.lo, cfg.hi);
  SampleComparison result;
  LinkEnv env;
  for (int k = 0; k < cfg.samples; ++k) {
    for (const auto& v : vars) env.values[v] = dist(rng);
    if (timed) env.time = dist(rng);
    std::optional<double> x;
    std::optional<double> y;
    try {
      x = evaluate(a, env);
    } catch (const Error&) {
    }
    try {
      y = evaluate(b, env);
    } catch (const Error&) {
    }
    if (!x && !y) continue;
    ++result.points;
    if (!x || !y) {
      result.equal = false;
      result.max_abs_deviation = std::numeric_limits<double>::infinity();
      continue;
    }
    double dev = std::fabs(*x - *y);
    result.max_abs_deviation = std::max(result.max_abs_deviation, dev);
    double scale = std::max({1.0, std::fabs(*x), std::fabs(*y)});
    if (!(dev <= cfg.tol * scale)) result.equal = false;
  }
  return result;
}

}  // namespace sfd
