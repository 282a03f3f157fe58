#pragma once

// Scalar expression trees over named coordinates: parsing, exact symbolic
// differentiation, and pointwise IEEE-double evaluation. Trees are immutable
// and share subtrees freely (DAG), so evaluation and differentiation use
// pointer-keyed memo caches.

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace geoforms {

class ExprError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ExprError {
public:
  ParseError(const std::string& what, std::size_t offset)
      : ExprError(what + " (at byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

class EvalError : public ExprError {
public:
  using ExprError::ExprError;
};

// Thrown when the live node count exceeds the configured budget; deep
// covariant-derivative chains can otherwise grow without bound.
class BudgetError : public ExprError {
public:
  using ExprError::ExprError;
};

enum class UnaryFn { Neg, Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt };
enum class BinOp { Add, Sub, Mul, Div, Pow };

class ExprNode;
using NodeRef = std::shared_ptr<const ExprNode>;

class ExprNode {
public:
  enum class Kind { Constant, Variable, Unary, Binary };

  Kind kind;
  double value = 0.0;     // Kind::Constant
  std::string name;       // Kind::Variable
  UnaryFn fn{};           // Kind::Unary
  BinOp op{};             // Kind::Binary
  NodeRef a, b;           // children (b null for unary)

  ExprNode();
  ~ExprNode();
  ExprNode(const ExprNode&) = delete;

  static std::size_t live_count();
};

std::size_t expr_node_budget();
void set_expr_node_budget(std::size_t budget);

class Expression {
public:
  Expression();                    // the zero constant
  explicit Expression(double v);
  static Expression variable(std::string name);

  const NodeRef& node() const { return node_; }

  double evaluate(const std::map<std::string, double>& bindings) const;
  Expression derivative(const std::string& var) const;

  std::string str() const;
  bool same_structure(const Expression& other) const;

  bool is_constant() const;
  bool is_constant(double v) const;
  double constant_value() const;   // requires is_constant()

  bool depends_on(const std::string& var) const;

private:
  friend Expression make_expr(NodeRef n);
  NodeRef node_;
};

// Smart constructors; fold literal 0/1 and constant subtrees so derivative
// trees stay manageable. No general simplification.
Expression operator+(const Expression&, const Expression&);
Expression operator-(const Expression&, const Expression&);
Expression operator*(const Expression&, const Expression&);
Expression operator/(const Expression&, const Expression&);
Expression operator-(const Expression&);
Expression pow(const Expression& base, const Expression& exponent);
Expression pow(const Expression& base, double exponent);
Expression apply(UnaryFn fn, const Expression&);
Expression sin(const Expression&);
Expression cos(const Expression&);
Expression tan(const Expression&);
Expression sinh(const Expression&);
Expression cosh(const Expression&);
Expression tanh(const Expression&);
Expression exp(const Expression&);
Expression log(const Expression&);
Expression sqrt(const Expression&);

inline Expression operator+(const Expression& a, double b) { return a + Expression(b); }
inline Expression operator+(double a, const Expression& b) { return Expression(a) + b; }
inline Expression operator-(const Expression& a, double b) { return a - Expression(b); }
inline Expression operator-(double a, const Expression& b) { return Expression(a) - b; }
inline Expression operator/(double a, const Expression& b) { return Expression(a) / b; }
inline Expression operator*(double a, const Expression& b) { return Expression(a) * b; }
inline Expression operator*(const Expression& a, double b) { return a * Expression(b); }
inline Expression operator/(const Expression& a, double b) { return a / Expression(b); }

Expression parse_expression(std::string_view source);

// Replace every occurrence of `var` by `repl` (typically a constant).
Expression substitute(const Expression&, const std::string& var,
                      const Expression& repl);

// Evaluator with a cache shared across calls: evaluating many components of
// the same symbolic tensor at one point touches each DAG node once.
class Evaluator {
public:
  explicit Evaluator(std::map<std::string, double> bindings);
  double operator()(const Expression& e);

private:
  double eval(const ExprNode* n);
  std::map<std::string, double> bindings_;
  std::unordered_map<const ExprNode*, double> cache_;
  std::unordered_set<NodeRef> pinned_;  // keeps cached-key nodes alive
};

// Persistent per-variable derivative memo; lets iterated covariant
// derivatives reuse subderivatives across components.
class DiffCache {
public:
  Expression d(const Expression& e, const std::string& var);

private:
  std::map<std::string, std::unordered_map<const ExprNode*, Expression>> memo_;
  std::unordered_set<NodeRef> pinned_;  // keeps memo-key nodes alive
};

}  // namespace geoforms
