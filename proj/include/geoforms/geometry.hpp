#pragma once

// The curvature stack: Christoffel symbols, Riemann, Ricci, scalar
// curvature, Schouten, J, Weyl, Cotton, Bach, plus iterated covariant
// derivatives. Everything is built symbolically from the metric component
// expressions once per metric, then evaluated exactly at points.
//
// Conventions (pinned by the invariant suite):
//   Gamma^c_ab = 1/2 g^cd (d_a g_bd + d_b g_ad - d_d g_ab)
//   R_ab^c_d   = d_a Gamma^c_bd - d_b Gamma^c_ad
//                + Gamma^c_ae Gamma^e_bd - Gamma^c_be Gamma^e_ad
//   R_abcd     = g_ce R_ab^e_d      (gives Sc = +6 on the unit round S^3)
//   Ric_ab     = R_ca^c_b,  Sc = g^ab Ric_ab
//   P_ab = (Ric_ab - Sc g_ab / (2(d-1))) / (d-2),  J = g^ab P_ab
//   W_abcd = R_abcd - g_ac P_bd + g_ad P_bc + g_bc P_ad - g_bd P_ac
//   C_abc = nabla_a P_bc - nabla_b P_ac
//   B_ab  = Delta P_ab - nabla^c nabla_a P_bc + P^cd W_acbd

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geoforms/expr.hpp"
#include "geoforms/tensor.hpp"

namespace geoforms {

class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Point = std::map<std::string, double>;

// Symmetric matrix of component expressions over named coordinates.
class MetricField {
public:
  MetricField(std::vector<std::string> coords, std::vector<Expression> components);

  static MetricField diagonal(std::vector<std::string> coords,
                              std::vector<Expression> diag);

  int dim() const { return dim_; }
  const std::vector<std::string>& coords() const { return coords_; }
  const Expression& component(int i, int j) const;
  int coord_index(const std::string& name) const;

private:
  int dim_;
  std::vector<std::string> coords_;
  std::vector<Expression> comp_;  // dim x dim, symmetrized on construction
};

// Dense symbolic tensor field: d^rank component expressions with valence.
class ExprField {
public:
  ExprField(int dim, std::vector<Slot> valence);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(valence_.size()); }
  const std::vector<Slot>& valence() const { return valence_; }
  const Expression& at(std::span<const int> idx) const;
  const Expression& at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }
  void set(std::span<const int> idx, Expression e);
  void set(std::initializer_list<int> idx, Expression e) {
    set(std::span<const int>(idx.begin(), idx.size()), std::move(e));
  }

private:
  std::size_t flatten(std::span<const int> idx) const;
  int dim_;
  std::vector<Slot> valence_;
  std::vector<Expression> comp_;
};

struct CurvatureStack {
  Point point;
  TensorValue metric, inverse;             // g_ab, g^ab
  TensorValue gamma;                       // Gamma^c_ab, valence (Up,Down,Down)
  TensorValue riemann_mixed;               // R_ab^c_d, (D,D,U,D)
  TensorValue riemann_low;                 // R_abcd, (D,D,D,D)
  TensorValue ricci, schouten, weyl, cotton;
  std::optional<TensorValue> bach;
  double sc = 0.0, j = 0.0;
  double condition_estimate = 0.0;
};

// Per-metric symbolic workspace. Fields are built lazily and cached;
// construction is serialized behind a mutex, so a built workspace can be
// shared read-only across point-sweep workers.
class MetricWorkspace {
public:
  explicit MetricWorkspace(MetricField g);

  const MetricField& metric() const { return g_; }
  int dim() const { return g_.dim(); }

  Expression metric_component(int i, int j);
  Expression inverse_component(int i, int j);
  Expression det();

  Expression christoffel(int c, int a, int b);  // Gamma^c_ab
  const ExprField& gamma_field();
  const ExprField& riemann_mixed_field();
  const ExprField& riemann_low_field();
  const ExprField& ricci_field();
  Expression scalar_curvature();
  const ExprField& schouten_field();
  Expression j_trace();
  const ExprField& weyl_field();
  const ExprField& cotton_field();
  const ExprField& bach_field();  // requires dim >= 4 unless overridden
  void allow_bach_in_d3(bool allow) { allow_bach_d3_ = allow; }

  // Component of nabla^m R_abcd (all slots down), index layout
  // [c_1 ... c_m, a, b, c, d] with nabla_{c_1} applied last (outermost).
  Expression riemann_deriv_component(int m, std::span<const int> idx);

  Expression deriv(const Expression& e, int coord);  // cached partial
  ExprField cov_deriv(const ExprField& t);           // prepends a Down slot
  ExprField hessian(const Expression& scalar);
  Expression laplacian(const Expression& scalar);
  Expression grad_square(const Expression& scalar);

  // Evaluation helpers. Evaluators are caller-local; building happens under
  // the workspace lock, evaluation does not.
  TensorValue eval_field(const ExprField& f, Evaluator& ev) const;
  TensorValue metric_at(const Point& p);
  TensorValue inverse_at(const Point& p);
  double condition_estimate(const Point& p);

private:
  Expression minor_det(unsigned row_mask, unsigned col_mask);

  MetricField g_;
  std::recursive_mutex mu_;
  DiffCache diff_;
  std::map<std::pair<unsigned, unsigned>, Expression> minors_;
  std::optional<ExprField> inverse_, gamma_, riemann_mixed_, riemann_low_;
  std::optional<ExprField> ricci_, schouten_, weyl_, cotton_, bach_;
  std::optional<Expression> det_, sc_, j_;
  std::vector<std::unordered_map<std::size_t, Expression>> riemann_chain_;
  bool allow_bach_d3_ = false;
};

CurvatureStack curvature_stack(MetricWorkspace& ws, const Point& p,
                               bool want_bach = true);

enum class FdQuantity { Gamma, Riemann, Ricci, Scalar, Schouten, Weyl, Cotton, Bach };

// Recompute the selected quantity with central finite differences in place
// of symbolic derivatives and return the max entrywise deviation relative to
// max(1, |quantity|).
double fd_check(MetricWorkspace& ws, FdQuantity q, const Point& p, double h);

}  // namespace geoforms
