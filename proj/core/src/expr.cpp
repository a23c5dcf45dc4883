#include "homog/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace homog {

std::string_view var_name(Var v) {
  switch (v) {
    case Var::X1: return "X1";
    case Var::X2: return "X2";
    case Var::Y1: return "Y1";
    case Var::Y2: return "Y2";
    case Var::Eta: return "ETA";
  }
  return "?";
}

namespace detail {

enum class Func : int { Sin, Cos, Exp, Sqrt, Abs };

static std::string_view func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

struct Node {
  enum class Kind { Number, Variable, Unary, Binary, Call } kind;
  double number = 0.0;
  Var var = Var::X1;
  char op = 0;  // one of + - * / ^ for Binary; '-' for Unary
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  std::size_t offset = 0;  // byte offset of this node in the source
};

using NodePtr = std::shared_ptr<const Node>;

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Precedence levels: additive 1, multiplicative 2, unary minus 3, power 4,
// atoms 5. Matches the parser below.
static int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Binary:
      if (n.op == '+' || n.op == '-') return 1;
      if (n.op == '*' || n.op == '/') return 2;
      return 4;  // '^'
    case Node::Kind::Unary:
      return 3;
    default:
      return 5;
  }
}

static std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

static void print_node(const Node& n, std::string& out);

static void print_child(const Node& child, int parent_prec, bool needs_higher,
                        std::string& out) {
  const int p = precedence(child);
  const bool parens = needs_higher ? (p <= parent_prec) : (p < parent_prec);
  if (parens) out.push_back('(');
  print_node(child, out);
  if (parens) out.push_back(')');
}

static void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Number:
      out += format_number(n.number);
      return;
    case Node::Kind::Variable:
      out += var_name(n.var);
      return;
    case Node::Kind::Unary:
      out.push_back('-');
      // operand of unary minus must bind at least as tight as unary minus
      print_child(*n.lhs, precedence(n), false, out);
      return;
    case Node::Kind::Binary: {
      const int prec = precedence(n);
      // left-associative except '^': parenthesize accordingly
      const bool rassoc = (n.op == '^');
      print_child(*n.lhs, prec, rassoc, out);
      out.push_back(' ');
      out.push_back(n.op);
      out.push_back(' ');
      print_child(*n.rhs, prec, !rassoc, out);
      return;
    }
    case Node::Kind::Call:
      out += func_name(n.func);
      out.push_back('(');
      print_node(*n.lhs, out);
      out.push_back(')');
      return;
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

[[noreturn]] static void eval_fail(const Node& n, const std::string& what) {
  std::string text;
  print_node(n, text);
  throw EvalError(what + " in '" + text + "' (at offset " +
                  std::to_string(n.offset) + ")");
}

static double eval_node(const Node& n, const Bindings& b) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.number;
    case Node::Kind::Variable: {
      const auto v = b.get(n.var);
      if (!v) eval_fail(n, std::string("unbound variable '") + std::string(var_name(n.var)) + "'");
      return *v;
    }
    case Node::Kind::Unary:
      return -eval_node(*n.lhs, b);
    case Node::Kind::Binary: {
      const double l = eval_node(*n.lhs, b);
      const double r = eval_node(*n.rhs, b);
      double out = 0.0;
      switch (n.op) {
        case '+': out = l + r; break;
        case '-': out = l - r; break;
        case '*': out = l * r; break;
        case '/':
          if (r == 0.0) eval_fail(n, "division by zero");
          out = l / r;
          break;
        case '^':
          out = std::pow(l, r);
          break;
      }
      if (!std::isfinite(out)) eval_fail(n, "non-finite result");
      return out;
    }
    case Node::Kind::Call: {
      const double a = eval_node(*n.lhs, b);
      double out = 0.0;
      switch (n.func) {
        case Func::Sin: out = std::sin(a); break;
        case Func::Cos: out = std::cos(a); break;
        case Func::Exp: out = std::exp(a); break;
        case Func::Sqrt:
          if (a < 0.0) eval_fail(n, "sqrt of negative argument");
          out = std::sqrt(a);
          break;
        case Func::Abs: out = std::fabs(a); break;
      }
      if (!std::isfinite(out)) eval_fail(n, "non-finite result");
      return out;
    }
  }
  eval_fail(n, "corrupt expression tree");
}

static bool node_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Number:
      // exact comparison: canonical printing round-trips the value
      return a.number == b.number ||
             (std::isnan(a.number) && std::isnan(b.number));
    case Node::Kind::Variable:
      return a.var == b.var;
    case Node::Kind::Unary:
      return node_equal(*a.lhs, *b.lhs);
    case Node::Kind::Binary:
      return a.op == b.op && node_equal(*a.lhs, *b.lhs) && node_equal(*a.rhs, *b.rhs);
    case Node::Kind::Call:
      return a.func == b.func && node_equal(*a.lhs, *b.lhs);
  }
  return false;
}

static bool node_references(const Node& n, Var v) {
  switch (n.kind) {
    case Node::Kind::Number: return false;
    case Node::Kind::Variable: return n.var == v;
    case Node::Kind::Unary: return node_references(*n.lhs, v);
    case Node::Kind::Binary:
      return node_references(*n.lhs, v) || node_references(*n.rhs, v);
    case Node::Kind::Call: return node_references(*n.lhs, v);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer + recursive-descent parser
// ---------------------------------------------------------------------------

struct Token {
  enum class Kind { Number, Ident, Op, LParen, RParen, End } kind;
  double number = 0.0;
  std::string_view text;
  char op = 0;
  std::size_t offset = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
    current_ = Token{};
    current_.offset = pos_;
    if (pos_ >= src_.size()) {
      current_.kind = Token::Kind::End;
      return;
    }
    const char c = src_[pos_];
    if (c == '(') {
      current_.kind = Token::Kind::LParen;
      ++pos_;
      return;
    }
    if (c == ')') {
      current_.kind = Token::Kind::RParen;
      ++pos_;
      return;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      current_.kind = Token::Kind::Op;
      current_.op = c;
      ++pos_;
      return;
    }
    if ((c >= '0' && c <= '9') || c == '.') {
      const char* begin = src_.data() + pos_;
      const char* end = src_.data() + src_.size();
      double value = 0.0;
      const auto res = std::from_chars(begin, end, value);
      if (res.ec != std::errc{} || res.ptr == begin)
        throw ParseError("invalid numeric literal", pos_);
      current_.kind = Token::Kind::Number;
      current_.number = value;
      pos_ += static_cast<std::size_t>(res.ptr - begin);
      return;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             ((src_[end] >= 'a' && src_[end] <= 'z') ||
              (src_[end] >= 'A' && src_[end] <= 'Z') ||
              (src_[end] >= '0' && src_[end] <= '9') || src_[end] == '_'))
        ++end;
      current_.kind = Token::Kind::Ident;
      current_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) {}

  NodePtr parse_all() {
    NodePtr e = parse_sum();
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      throw ParseError("expected end of input or an operator, found " + describe(t), t.offset);
    return e;
  }

private:
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Kind::Number: return "a number";
      case Token::Kind::Ident: return "'" + std::string(t.text) + "'";
      case Token::Kind::Op: return std::string("'") + t.op + "'";
      case Token::Kind::LParen: return "'('";
      case Token::Kind::RParen: return "')'";
      case Token::Kind::End: return "end of input";
    }
    return "?";
  }

  static NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

  // sum := term (('+'|'-') term)*
  NodePtr parse_sum() {
    NodePtr lhs = parse_term();
    while (lex_.peek().kind == Token::Kind::Op &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      const Token t = lex_.take();
      NodePtr rhs = parse_term();
      Node n;
      n.kind = Node::Kind::Binary;
      n.op = t.op;
      n.lhs = std::move(lhs);
      n.rhs = std::move(rhs);
      n.offset = t.offset;
      lhs = make(std::move(n));
    }
    return lhs;
  }

  // term := unary (('*'|'/') unary)*
  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (lex_.peek().kind == Token::Kind::Op &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      const Token t = lex_.take();
      NodePtr rhs = parse_unary();
      Node n;
      n.kind = Node::Kind::Binary;
      n.op = t.op;
      n.lhs = std::move(lhs);
      n.rhs = std::move(rhs);
      n.offset = t.offset;
      lhs = make(std::move(n));
    }
    return lhs;
  }

  // unary := '-' unary | power      ('^' binds tighter than unary minus)
  NodePtr parse_unary() {
    if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '-') {
      const Token t = lex_.take();
      Node n;
      n.kind = Node::Kind::Unary;
      n.op = '-';
      n.lhs = parse_unary();
      n.offset = t.offset;
      return make(std::move(n));
    }
    return parse_power();
  }

  // power := atom ('^' unary)?      (right-associative)
  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '^') {
      const Token t = lex_.take();
      Node n;
      n.kind = Node::Kind::Binary;
      n.op = '^';
      n.lhs = std::move(base);
      n.rhs = parse_unary();
      n.offset = t.offset;
      return make(std::move(n));
    }
    return base;
  }

  NodePtr parse_atom() {
    const Token t = lex_.take();
    switch (t.kind) {
      case Token::Kind::Number: {
        Node n;
        n.kind = Node::Kind::Number;
        n.number = t.number;
        n.offset = t.offset;
        return make(std::move(n));
      }
      case Token::Kind::LParen: {
        NodePtr inner = parse_sum();
        const Token& close = lex_.peek();
        if (close.kind != Token::Kind::RParen)
          throw ParseError("expected ')', found " + describe(close), close.offset);
        lex_.take();
        return inner;
      }
      case Token::Kind::Ident:
        return parse_ident(t);
      default:
        throw ParseError("expected a number, variable, function, or '(', found " +
                             describe(t),
                         t.offset);
    }
  }

  NodePtr parse_ident(const Token& t) {
    auto variable = [&](Var v) {
      Node n;
      n.kind = Node::Kind::Variable;
      n.var = v;
      n.offset = t.offset;
      return make(std::move(n));
    };
    if (t.text == "X1") return variable(Var::X1);
    if (t.text == "X2") return variable(Var::X2);
    if (t.text == "Y1") return variable(Var::Y1);
    if (t.text == "Y2") return variable(Var::Y2);
    if (t.text == "ETA") return variable(Var::Eta);
    if (t.text == "pi") {
      Node n;
      n.kind = Node::Kind::Number;
      n.number = 3.14159265358979323846;
      n.offset = t.offset;
      return make(std::move(n));
    }

    std::optional<Func> func;
    if (t.text == "sin") func = Func::Sin;
    else if (t.text == "cos") func = Func::Cos;
    else if (t.text == "exp") func = Func::Exp;
    else if (t.text == "sqrt") func = Func::Sqrt;
    else if (t.text == "abs") func = Func::Abs;
    if (!func)
      throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);

    const Token& open = lex_.peek();
    if (open.kind != Token::Kind::LParen)
      throw ParseError("expected '(' after function '" + std::string(t.text) +
                           "', found " + describe(open),
                       open.offset);
    lex_.take();
    NodePtr arg = parse_sum();
    const Token& close = lex_.peek();
    if (close.kind != Token::Kind::RParen)
      throw ParseError("expected ')', found " + describe(close), close.offset);
    lex_.take();

    Node n;
    n.kind = Node::Kind::Call;
    n.func = *func;
    n.lhs = std::move(arg);
    n.offset = t.offset;
    return make(std::move(n));
  }

  Lexer lex_;
};

}  // namespace detail

double Expr::eval(const Bindings& bindings) const {
  if (!root_) throw EvalError("evaluating an empty expression");
  return detail::eval_node(*root_, bindings);
}

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  detail::print_node(*root_, out);
  return out;
}

bool Expr::references(Var v) const {
  return root_ && detail::node_references(*root_, v);
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.root_ == b.root_) return true;
  if (!a.root_ || !b.root_) return false;
  return detail::node_equal(*a.root_, *b.root_);
}

Expr parse(std::string_view source) {
  detail::Parser p(source);
  return Expr(p.parse_all());
}

}  // namespace homog
