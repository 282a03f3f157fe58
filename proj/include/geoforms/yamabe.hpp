#pragma once

// Truncated power series in the transverse coordinate s with Expression
// coefficients over Sigma, and the order-by-order singular Yamabe solver on
// product manifolds R x Sigma (g = ds^2 + gbar_0):
//   |I_sigma|^2 := |d sigma|^2 - (2 sigma / d)(Delta sigma + J sigma) = 1,
// with J = Sc(gbar_0) / (2(d-1)) and Delta = d^2/ds^2 + Laplacian(gbar_0).
// The solver starts from sigma = s and determines the odd coefficients by
//   phi_{2l+3} = -d / (2(2l+3)(d-2l-2)) * psi_{2l+2},
// where psi_{2l+2} is the lowest surviving residual coefficient. For even d
// the recursion stops at l = d/2 - 1 and the obstruction psi_d (the Willmore
// invariant) is returned; for odd d it iterates to the requested order.
// Closed forms for constant scalar curvature (sin / s / sinh trichotomy) and
// the Poincare-Einstein residual tf(Hess sigma) + sigma * tf(P) round out
// the module.

#include <optional>
#include <string>
#include <vector>

#include "geoforms/geometry.hpp"

namespace geoforms {

class YamabeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Coefficients of s^0 .. s^N; arithmetic is exact up to the truncation.
class SeriesInS {
public:
  explicit SeriesInS(int truncation);

  int truncation() const { return trunc_; }
  const Expression& coeff(int j) const;
  void set_coeff(int j, Expression e);
  bool coeff_is_structural_zero(int j) const;

  // Sum c_j * s^j as a single Expression in the named transverse coordinate.
  Expression to_expression(const std::string& s_name) const;
  // Numeric evaluation: coefficients at the Sigma point, then the polynomial.
  double evaluate(double s, const Point& sigma_point) const;

private:
  int trunc_;
  std::vector<Expression> c_;
};

SeriesInS series_s(int truncation);  // the monomial s
SeriesInS add(const SeriesInS& a, const SeriesInS& b);
SeriesInS sub(const SeriesInS& a, const SeriesInS& b);
SeriesInS mul(const SeriesInS& a, const SeriesInS& b);  // truncates
SeriesInS scale(const SeriesInS& a, const Expression& f);
SeriesInS deriv_s(const SeriesInS& a);  // drops the top order

// |I_sigma|^2 - 1 on g = ds^2 + gbar_0; exact through order trunc(sigma)-1.
// d must equal fiber.dim() + 1.
SeriesInS yamabe_residual(const SeriesInS& sigma, MetricWorkspace& fiber,
                          int d);

struct YamabeSolution {
  SeriesInS sigma;
  std::optional<Expression> willmore;  // psi_d, even d only
  int solved_order = 1;                // highest determined odd coefficient
};

// target_order < 0 picks the default: d-1 for even d, 7 for odd d.
YamabeSolution solve_series(MetricWorkspace& fiber, int target_order = -1);

enum class SigmaBranch { Sin, Linear, Sinh };

struct ClosedFormSigma {
  SigmaBranch branch;
  double amplitude = 1.0;  // A
  double rate = 0.0;       // r; sigma = A sin(rs) / s / A sinh(rs)
  SeriesInS series;        // expansion to the requested truncation
};

// Constant-Sc closed form: sin for Sc < 0, linear for Sc = 0, sinh for
// Sc > 0, with A^2 r^2 = 1 and r^2 = |Sc| / ((d-1)(d-2)).
ClosedFormSigma closed_form_sigma(double scbar, int d, int truncation = 9);

// tf(Hess sigma) + sigma * tf(P) on the ambient product metric; the point
// must bind the transverse coordinate. Zero iff the rescaled metric
// g / sigma^2 is Poincare-Einstein (Einstein fiber).
TensorValue pe_residual(MetricWorkspace& ambient, const Expression& sigma,
                        const Point& p);

// Deviation of tf(P) from the constant-Sc closed form
// (Sc/(d(d-2))) (g/(d-1) - n x n), n = ds: an independent oracle for the
// Schouten block structure of product metrics.
double pe_schouten_identity_deviation(MetricWorkspace& ambient, double scbar,
                                      const Point& p);

}  // namespace geoforms
