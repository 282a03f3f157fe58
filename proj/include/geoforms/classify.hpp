#pragma once

// Embedding classification at a configurable order K: product, fiber-like
// warped, or base-like warped. Equality of fundamental forms against a
// synthesized reference metric decides each case, so no closed-form
// correction polynomials are ever needed: two analytic embeddings with the
// same induced metric and the same forms agree in a collar neighborhood.

#include <map>
#include <string>
#include <vector>

#include "geoforms/hypersurface.hpp"

namespace geoforms {

class ClassifyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Verdict { Product, FiberLike, BaseLike, Inconclusive, Rejected };

struct ClassificationReport {
  Verdict verdict = Verdict::Inconclusive;
  int checked_order = 0;                 // K
  int rejected_order = 0;                // first failing order when rejected
  std::map<int, double> residuals;       // per-order max relative residual
  std::map<std::string, double> diagnostics;  // warp hints, stage residuals
  std::vector<Point> points;             // sample points, sorted order
  bool product_subverdict = false;       // base-like with III = 0
};

// "product", "fiber-like", "base-like", "inconclusive", "rejected-at-order-k"
std::string verdict_string(const ClassificationReport& r);

// Pass iff every FF(k), k = 2..K, vanishes at all points (relative to the
// induced-metric scale).
ClassificationReport check_product(Hypersurface& hs, int K,
                                   const std::vector<Point>& points,
                                   double tol = 1e-8);

// Pass iff the forms match those of the reference dt^2 + h(t) gbar(0,x).
// The warp h is declared, not fitted; a jet hint h'(0) ~ 2 tr FF(2) /
// ((d-1) h(0)) is reported as a non-authoritative diagnostic.
ClassificationReport check_fiber_like(Hypersurface& hs, const Expression& h,
                                      int K, const std::vector<Point>& points,
                                      double tol = 1e-8);

// Three stages: (i) even forms vanish, (ii) hess f = f III intrinsically,
// (iii) odd forms match the reference f^2 dt^2 + gbar(0,x), with the order-5
// form additionally cross-checked against the explicit first correction
//   V_ab = f^{-1} (grad^c f)(3 grad_c III_ab - 2 grad_{(a} III_{b)c}).
ClassificationReport check_base_like(Hypersurface& hs, const Expression& f,
                                     int K, const std::vector<Point>& points,
                                     double tol = 1e-8);

}  // namespace geoforms
