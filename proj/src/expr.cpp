#include "geoforms/expr.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <sstream>

namespace geoforms {

namespace {

std::atomic<std::size_t> g_live_nodes{0};
std::atomic<std::size_t> g_node_budget{1000000};

NodeRef make_node() {
  if (ExprNode::live_count() >= expr_node_budget()) {
    throw BudgetError("expression node budget exceeded (" +
                      std::to_string(expr_node_budget()) +
                      " nodes); raise it with set_expr_node_budget");
  }
  return std::make_shared<ExprNode>();
}

bool nearly_integer(double v) { return v == std::floor(v); }

double eval_unary(UnaryFn fn, double x, bool* ok) {
  *ok = true;
  switch (fn) {
    case UnaryFn::Neg: return -x;
    case UnaryFn::Sin: return std::sin(x);
    case UnaryFn::Cos: return std::cos(x);
    case UnaryFn::Tan: return std::tan(x);
    case UnaryFn::Sinh: return std::sinh(x);
    case UnaryFn::Cosh: return std::cosh(x);
    case UnaryFn::Tanh: return std::tanh(x);
    case UnaryFn::Exp: return std::exp(x);
    case UnaryFn::Log:
      if (x <= 0.0) { *ok = false; return 0.0; }
      return std::log(x);
    case UnaryFn::Sqrt:
      if (x < 0.0) { *ok = false; return 0.0; }
      return std::sqrt(x);
  }
  *ok = false;
  return 0.0;
}

const char* fn_name(UnaryFn fn) {
  switch (fn) {
    case UnaryFn::Neg: return "-";
    case UnaryFn::Sin: return "sin";
    case UnaryFn::Cos: return "cos";
    case UnaryFn::Tan: return "tan";
    case UnaryFn::Sinh: return "sinh";
    case UnaryFn::Cosh: return "cosh";
    case UnaryFn::Tanh: return "tanh";
    case UnaryFn::Exp: return "exp";
    case UnaryFn::Log: return "log";
    case UnaryFn::Sqrt: return "sqrt";
  }
  return "?";
}

}  // namespace

ExprNode::ExprNode() { g_live_nodes.fetch_add(1, std::memory_order_relaxed); }
ExprNode::~ExprNode() { g_live_nodes.fetch_sub(1, std::memory_order_relaxed); }

std::size_t ExprNode::live_count() {
  return g_live_nodes.load(std::memory_order_relaxed);
}

std::size_t expr_node_budget() {
  return g_node_budget.load(std::memory_order_relaxed);
}

void set_expr_node_budget(std::size_t budget) {
  g_node_budget.store(budget, std::memory_order_relaxed);
}

Expression make_expr(NodeRef n) {
  Expression e;
  e.node_ = std::move(n);
  return e;
}

Expression::Expression() : Expression(0.0) {}

Expression::Expression(double v) {
  auto n = make_node();
  auto* m = const_cast<ExprNode*>(n.get());
  m->kind = ExprNode::Kind::Constant;
  m->value = v;
  node_ = std::move(n);
}

Expression Expression::variable(std::string name) {
  auto n = make_node();
  auto* m = const_cast<ExprNode*>(n.get());
  m->kind = ExprNode::Kind::Variable;
  m->name = std::move(name);
  return make_expr(std::move(n));
}

bool Expression::is_constant() const {
  return node_->kind == ExprNode::Kind::Constant;
}

bool Expression::is_constant(double v) const {
  return is_constant() && node_->value == v;
}

double Expression::constant_value() const { return node_->value; }

bool Expression::depends_on(const std::string& var) const {
  const ExprNode* n = node_.get();
  switch (n->kind) {
    case ExprNode::Kind::Constant: return false;
    case ExprNode::Kind::Variable: return n->name == var;
    case ExprNode::Kind::Unary: return make_expr(n->a).depends_on(var);
    case ExprNode::Kind::Binary:
      return make_expr(n->a).depends_on(var) || make_expr(n->b).depends_on(var);
  }
  return false;
}

namespace {

Expression unary_node(UnaryFn fn, const Expression& x) {
  if (x.is_constant()) {
    bool ok = false;
    double v = eval_unary(fn, x.constant_value(), &ok);
    if (ok && std::isfinite(v)) return Expression(v);
  }
  auto n = make_node();
  auto* m = const_cast<ExprNode*>(n.get());
  m->kind = ExprNode::Kind::Unary;
  m->fn = fn;
  m->a = x.node();
  return make_expr(std::move(n));
}

Expression binary_node(BinOp op, const Expression& a, const Expression& b) {
  auto n = make_node();
  auto* m = const_cast<ExprNode*>(n.get());
  m->kind = ExprNode::Kind::Binary;
  m->op = op;
  m->a = a.node();
  m->b = b.node();
  return make_expr(std::move(n));
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b) {
  if (a.is_constant() && b.is_constant())
    return Expression(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return binary_node(BinOp::Add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
  if (a.is_constant() && b.is_constant())
    return Expression(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return binary_node(BinOp::Sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
  if (a.is_constant() && b.is_constant())
    return Expression(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expression(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return binary_node(BinOp::Mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
    return Expression(a.constant_value() / b.constant_value());
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expression(0.0);
  if (b.is_constant(1.0)) return a;
  return binary_node(BinOp::Div, a, b);
}

Expression operator-(const Expression& a) { return unary_node(UnaryFn::Neg, a); }

Expression pow(const Expression& a, const Expression& b) {
  if (b.is_constant(0.0)) return Expression(1.0);
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant()) {
    double v = std::pow(a.constant_value(), b.constant_value());
    if (std::isfinite(v)) return Expression(v);
  }
  return binary_node(BinOp::Pow, a, b);
}

Expression pow(const Expression& a, double b) { return pow(a, Expression(b)); }

Expression apply(UnaryFn fn, const Expression& x) { return unary_node(fn, x); }
Expression sin(const Expression& x) { return unary_node(UnaryFn::Sin, x); }
Expression cos(const Expression& x) { return unary_node(UnaryFn::Cos, x); }
Expression tan(const Expression& x) { return unary_node(UnaryFn::Tan, x); }
Expression sinh(const Expression& x) { return unary_node(UnaryFn::Sinh, x); }
Expression cosh(const Expression& x) { return unary_node(UnaryFn::Cosh, x); }
Expression tanh(const Expression& x) { return unary_node(UnaryFn::Tanh, x); }
Expression exp(const Expression& x) { return unary_node(UnaryFn::Exp, x); }
Expression log(const Expression& x) { return unary_node(UnaryFn::Log, x); }
Expression sqrt(const Expression& x) { return unary_node(UnaryFn::Sqrt, x); }

// ---------------------------------------------------------------------------
// Evaluation

Evaluator::Evaluator(std::map<std::string, double> bindings)
    : bindings_(std::move(bindings)) {}

double Evaluator::operator()(const Expression& e) {
  // Pin the DAG: cache entries are keyed by raw node pointer, so every root
  // whose subtree may be cached must stay alive for the evaluator's lifetime
  // or a later allocation could reuse a freed address and hit a stale entry.
  pinned_.insert(e.node());
  return eval(e.node().get());
}

double Evaluator::eval(const ExprNode* n) {
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;

  double r = 0.0;
  switch (n->kind) {
    case ExprNode::Kind::Constant:
      r = n->value;
      break;
    case ExprNode::Kind::Variable: {
      auto b = bindings_.find(n->name);
      if (b == bindings_.end())
        throw EvalError("unbound variable '" + n->name + "'");
      r = b->second;
      break;
    }
    case ExprNode::Kind::Unary: {
      double x = eval(n->a.get());
      bool ok = false;
      r = eval_unary(n->fn, x, &ok);
      if (!ok)
        throw EvalError(std::string("domain error in ") + fn_name(n->fn) +
                        " applied to " + make_expr(n->a).str() + " = " +
                        std::to_string(x));
      break;
    }
    case ExprNode::Kind::Binary: {
      double x = eval(n->a.get());
      double y = eval(n->b.get());
      switch (n->op) {
        case BinOp::Add: r = x + y; break;
        case BinOp::Sub: r = x - y; break;
        case BinOp::Mul: r = x * y; break;
        case BinOp::Div:
          if (y == 0.0)
            throw EvalError("division by zero in " + make_expr(n->b).str());
          r = x / y;
          break;
        case BinOp::Pow:
          if (n->b->kind == ExprNode::Kind::Constant) {
            if (x < 0.0 && !nearly_integer(y))
              throw EvalError("negative base with non-integer exponent in " +
                              make_expr(n->a).str());
            if (x == 0.0 && y < 0.0)
              throw EvalError("zero base with negative exponent in " +
                              make_expr(n->a).str());
            r = std::pow(x, y);
          } else {
            // Non-literal exponent: a^b := exp(b*log a), a > 0 required.
            if (x <= 0.0)
              throw EvalError("non-positive base with symbolic exponent in " +
                              make_expr(n->a).str());
            r = std::exp(y * std::log(x));
          }
          break;
      }
      break;
    }
  }
  cache_.emplace(n, r);
  return r;
}

double Expression::evaluate(const std::map<std::string, double>& bindings) const {
  Evaluator ev(bindings);
  return ev(*this);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expression diff(const ExprNode* n, const std::string& var,
                std::unordered_map<const ExprNode*, Expression>& memo) {
  auto it = memo.find(n);
  if (it != memo.end()) return it->second;

  Expression r;
  switch (n->kind) {
    case ExprNode::Kind::Constant:
      r = Expression(0.0);
      break;
    case ExprNode::Kind::Variable:
      r = Expression(n->name == var ? 1.0 : 0.0);
      break;
    case ExprNode::Kind::Unary: {
      Expression x = make_expr(n->a);
      Expression dx = diff(n->a.get(), var, memo);
      switch (n->fn) {
        case UnaryFn::Neg: r = -dx; break;
        case UnaryFn::Sin: r = cos(x) * dx; break;
        case UnaryFn::Cos: r = -(sin(x) * dx); break;
        case UnaryFn::Tan: r = dx / (cos(x) * cos(x)); break;
        case UnaryFn::Sinh: r = cosh(x) * dx; break;
        case UnaryFn::Cosh: r = sinh(x) * dx; break;
        case UnaryFn::Tanh: r = dx / (cosh(x) * cosh(x)); break;
        case UnaryFn::Exp: r = exp(x) * dx; break;
        case UnaryFn::Log: r = dx / x; break;
        case UnaryFn::Sqrt: r = dx / (Expression(2.0) * sqrt(x)); break;
      }
      break;
    }
    case ExprNode::Kind::Binary: {
      Expression x = make_expr(n->a);
      Expression y = make_expr(n->b);
      Expression dx = diff(n->a.get(), var, memo);
      Expression dy = diff(n->b.get(), var, memo);
      switch (n->op) {
        case BinOp::Add: r = dx + dy; break;
        case BinOp::Sub: r = dx - dy; break;
        case BinOp::Mul: r = dx * y + x * dy; break;
        case BinOp::Div: r = dx / y - (x * dy) / (y * y); break;
        case BinOp::Pow:
          if (n->b->kind == ExprNode::Kind::Constant) {
            double c = n->b->value;
            r = Expression(c) * pow(x, c - 1.0) * dx;
          } else {
            // a^b with symbolic exponent: d(a^b) = a^b (db*log a + b*da/a)
            Expression p = pow(x, y);
            r = p * (dy * log(x) + y * dx / x);
          }
          break;
      }
      break;
    }
  }
  memo.emplace(n, r);
  return r;
}

}  // namespace

Expression Expression::derivative(const std::string& var) const {
  std::unordered_map<const ExprNode*, Expression> memo;
  return diff(node_.get(), var, memo);
}

Expression DiffCache::d(const Expression& e, const std::string& var) {
  // Same pointer-reuse hazard as Evaluator: keep every differentiated root
  // alive so memo keys cannot alias freed-and-reallocated nodes.
  pinned_.insert(e.node());
  return diff(e.node().get(), var, memo_[var]);
}

// ---------------------------------------------------------------------------
// Structural equality, substitution, printing

bool Expression::same_structure(const Expression& other) const {
  const ExprNode* x = node_.get();
  const ExprNode* y = other.node_.get();
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case ExprNode::Kind::Constant:
      return x->value == y->value;
    case ExprNode::Kind::Variable:
      return x->name == y->name;
    case ExprNode::Kind::Unary:
      return x->fn == y->fn && make_expr(x->a).same_structure(make_expr(y->a));
    case ExprNode::Kind::Binary:
      return x->op == y->op && make_expr(x->a).same_structure(make_expr(y->a)) &&
             make_expr(x->b).same_structure(make_expr(y->b));
  }
  return false;
}

namespace {

Expression subst(const ExprNode* n, const std::string& var, const Expression& repl,
                 std::unordered_map<const ExprNode*, Expression>& memo) {
  auto it = memo.find(n);
  if (it != memo.end()) return it->second;

  Expression r;
  switch (n->kind) {
    case ExprNode::Kind::Constant:
      r = Expression(n->value);
      break;
    case ExprNode::Kind::Variable:
      r = (n->name == var) ? repl : Expression::variable(n->name);
      break;
    case ExprNode::Kind::Unary:
      r = unary_node(n->fn, subst(n->a.get(), var, repl, memo));
      break;
    case ExprNode::Kind::Binary: {
      Expression a = subst(n->a.get(), var, repl, memo);
      Expression b = subst(n->b.get(), var, repl, memo);
      switch (n->op) {
        case BinOp::Add: r = a + b; break;
        case BinOp::Sub: r = a - b; break;
        case BinOp::Mul: r = a * b; break;
        case BinOp::Div: r = a / b; break;
        case BinOp::Pow: r = pow(a, b); break;
      }
      break;
    }
  }
  memo.emplace(n, r);
  return r;
}

}  // namespace

Expression substitute(const Expression& e, const std::string& var,
                      const Expression& repl) {
  std::unordered_map<const ExprNode*, Expression> memo;
  return subst(e.node().get(), var, repl, memo);
}

namespace {

// Precedence: add/sub 1, mul/div 2, pow 3, atoms 4. Unary minus parses as a
// `base`, binding tighter than '^', so it prints its operand parenthesized
// unless the operand is an atom.
int precedence(const ExprNode* n) {
  switch (n->kind) {
    case ExprNode::Kind::Constant:
      return n->value < 0.0 ? 2 : 4;
    case ExprNode::Kind::Variable:
      return 4;
    case ExprNode::Kind::Unary:
      return n->fn == UnaryFn::Neg ? 2 : 4;
    case ExprNode::Kind::Binary:
      switch (n->op) {
        case BinOp::Add: case BinOp::Sub: return 1;
        case BinOp::Mul: case BinOp::Div: return 2;
        case BinOp::Pow: return 3;
      }
  }
  return 4;
}

void print_node(std::ostringstream& out, const ExprNode* n, int parent_prec,
                bool right_side) {
  int prec = precedence(n);
  bool parens = prec < parent_prec || (prec == parent_prec && right_side);
  if (parens) out << '(';
  switch (n->kind) {
    case ExprNode::Kind::Constant: {
      std::ostringstream num;
      num.precision(17);
      num << n->value;
      out << num.str();
      break;
    }
    case ExprNode::Kind::Variable:
      out << n->name;
      break;
    case ExprNode::Kind::Unary:
      if (n->fn == UnaryFn::Neg) {
        out << '-';
        print_node(out, n->a.get(), 4, false);
      } else {
        out << fn_name(n->fn) << '(';
        print_node(out, n->a.get(), 0, false);
        out << ')';
      }
      break;
    case ExprNode::Kind::Binary: {
      const char* sym = "?";
      switch (n->op) {
        case BinOp::Add: sym = " + "; break;
        case BinOp::Sub: sym = " - "; break;
        case BinOp::Mul: sym = "*"; break;
        case BinOp::Div: sym = "/"; break;
        case BinOp::Pow: sym = "^"; break;
      }
      if (n->op == BinOp::Pow) {
        // right-associative
        print_node(out, n->a.get(), 4, false);
        out << sym;
        print_node(out, n->b.get(), 3, false);
      } else {
        print_node(out, n->a.get(), prec, false);
        out << sym;
        print_node(out, n->b.get(), prec, true);
      }
      break;
    }
  }
  if (parens) out << ')';
}

}  // namespace

std::string Expression::str() const {
  std::ostringstream out;
  print_node(out, node_.get(), 0, false);
  return out.str();
}

// ---------------------------------------------------------------------------
// Parser: expr := term (('+'|'-') term)*
//         term := factor (('*'|'/') factor)*
//         factor := base ('^' factor)?          (right-associative power)
//         base := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base

namespace {

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expression parse() {
    Expression e = parse_sum();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError("trailing tokens", pos_);
    return e;
  }

private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Expression parse_sum() {
    Expression e = parse_term();
    for (;;) {
      if (consume('+')) e = e + parse_term();
      else if (consume('-')) e = e - parse_term();
      else return e;
    }
  }

  Expression parse_term() {
    Expression e = parse_factor();
    for (;;) {
      if (consume('*')) e = e * parse_factor();
      else if (consume('/')) e = e / parse_factor();
      else return e;
    }
  }

  Expression parse_factor() {
    Expression base = parse_base();
    if (consume('^')) return pow(base, parse_factor());
    return base;
  }

  Expression parse_base() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      return -parse_base();
    }
    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      Expression e = parse_sum();
      if (!consume(')')) throw ParseError("unbalanced parenthesis", open);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expression parse_number() {
    std::size_t start = pos_;
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    return Expression(v);
  }

  Expression parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (peek() == '(') {
      std::size_t open = pos_;
      consume('(');
      Expression arg = parse_sum();
      if (!consume(')')) throw ParseError("unbalanced parenthesis", open);
      static const std::map<std::string, UnaryFn> kFns = {
          {"sin", UnaryFn::Sin},   {"cos", UnaryFn::Cos},   {"tan", UnaryFn::Tan},
          {"sinh", UnaryFn::Sinh}, {"cosh", UnaryFn::Cosh}, {"tanh", UnaryFn::Tanh},
          {"exp", UnaryFn::Exp},   {"log", UnaryFn::Log},   {"sqrt", UnaryFn::Sqrt}};
      auto it = kFns.find(name);
      if (it == kFns.end())
        throw ParseError("unknown function '" + name + "'", start);
      return apply(it->second, arg);
    }
    return Expression::variable(std::move(name));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse_expression(std::string_view source) {
  Parser p(source);
  return p.parse();
}

}  // namespace geoforms
