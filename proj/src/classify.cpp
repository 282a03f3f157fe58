#include "geoforms/classify.hpp"

#include <algorithm>
#include <cmath>

namespace geoforms {

namespace {

double gbar_scale(Hypersurface& hs, const Point& p) {
  return std::max(1.0, hs.induced_metric(p).max_abs());
}

std::vector<Point> sorted_points(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  return pts;
}

// Residual of |FF(k)| or |FF(k) - reference FF(k)| over all points, relative
// to the induced-metric scale. reference may be null for plain vanishing.
double order_residual(Hypersurface& hs, Hypersurface* ref, int k,
                      const std::vector<Point>& pts) {
  double worst = 0.0;
  for (const Point& p : pts) {
    TensorValue f = hs.fundamental_form(k, p);
    if (ref) f = sub(f, ref->fundamental_form(k, p));
    worst = std::max(worst, f.max_abs() / gbar_scale(hs, p));
  }
  return worst;
}

void finish_orders(ClassificationReport& r, Hypersurface& hs, Hypersurface* ref,
                   const std::vector<int>& orders, const std::vector<Point>& pts,
                   double tol, Verdict pass) {
  for (int k : orders) {
    double res = order_residual(hs, ref, k, pts);
    r.residuals[k] = res;
    if (res > tol && r.verdict != Verdict::Rejected) {
      r.verdict = Verdict::Rejected;
      r.rejected_order = k;
    }
  }
  if (r.verdict != Verdict::Rejected) r.verdict = pass;
}

}  // namespace

std::string verdict_string(const ClassificationReport& r) {
  switch (r.verdict) {
    case Verdict::Product: return "product";
    case Verdict::FiberLike: return "fiber-like";
    case Verdict::BaseLike: return "base-like";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Rejected:
      return "rejected-at-order-" + std::to_string(r.rejected_order);
  }
  return "inconclusive";
}

ClassificationReport check_product(Hypersurface& hs, int K,
                                   const std::vector<Point>& points,
                                   double tol) {
  if (K > hs.max_order()) throw ClassifyError("order K exceeds chart max order");
  ClassificationReport r;
  r.checked_order = K;
  r.points = sorted_points(points);
  std::vector<int> orders;
  for (int k = 2; k <= K; ++k) orders.push_back(k);
  finish_orders(r, hs, nullptr, orders, r.points, tol, Verdict::Product);
  return r;
}

ClassificationReport check_fiber_like(Hypersurface& hs, const Expression& h,
                                      int K, const std::vector<Point>& points,
                                      double tol) {
  if (K > hs.max_order()) throw ClassifyError("order K exceeds chart max order");
  if (!hs.chart().strict)
    throw ClassifyError("fiber-like check requires a strict normal-form chart");
  const std::string& t = hs.chart().transverse;
  double h0 = substitute(h, t, Expression(0.0)).evaluate({});
  if (h0 <= 0.0) throw ClassifyError("fiber warp h must satisfy h(0) > 0");

  ClassificationReport r;
  r.checked_order = K;
  r.points = sorted_points(points);

  // reference metric dt^2 + h(t) gbar(0,x)
  const int ds = hs.sigma_dim();
  const MetricField& gbar0 = hs.intrinsic().metric();
  std::vector<Expression> comps;
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j) comps.push_back(h * gbar0.component(i, j));
  Hypersurface ref(normal_form_chart(gbar0.coords(), comps, t), hs.max_order());

  std::vector<int> orders;
  for (int k = 2; k <= K; ++k) orders.push_back(k);
  finish_orders(r, hs, &ref, orders, r.points, tol, Verdict::FiberLike);

  // non-authoritative jet hint for h'(0) from the trace of II
  double hint = 0.0;
  for (const Point& p : r.points) hint += 2.0 * hs.mean_curvature(p) / h0;
  if (!r.points.empty()) hint /= static_cast<double>(r.points.size());
  r.diagnostics["h_prime0_hint"] = hint;
  return r;
}

ClassificationReport check_base_like(Hypersurface& hs, const Expression& f,
                                     int K, const std::vector<Point>& points,
                                     double tol) {
  if (K > hs.max_order()) throw ClassifyError("order K exceeds chart max order");
  const std::string& t = hs.chart().transverse;
  if (f.depends_on(t))
    throw ClassifyError("base warp f must not depend on the transverse coordinate");

  ClassificationReport r;
  r.checked_order = K;
  r.points = sorted_points(points);
  const int ds = hs.sigma_dim();
  MetricWorkspace& in = hs.intrinsic();

  for (const Point& p : r.points) {
    double fv = f.evaluate(p);
    if (fv <= 0.0) throw ClassifyError("base warp f must be positive at samples");
    r.diagnostics["f_min"] = r.diagnostics.count("f_min")
                                 ? std::min(r.diagnostics["f_min"], fv)
                                 : fv;
  }

  // stage (i): even forms vanish
  std::vector<int> evens;
  for (int k = 2; k <= K; k += 2) evens.push_back(k);
  for (int k : evens) {
    double res = order_residual(hs, nullptr, k, r.points);
    r.residuals[k] = res;
    if (res > tol && r.verdict != Verdict::Rejected) {
      r.verdict = Verdict::Rejected;
      r.rejected_order = k;
    }
  }
  if (r.verdict == Verdict::Rejected) return r;

  // stage (ii): hess f = f III on Sigma; an order-3 statement
  ExprField hess = in.hessian(f);
  double hess_res = 0.0, iii_mag = 0.0;
  for (const Point& p : r.points) {
    Evaluator ev(p);
    TensorValue hv = in.eval_field(hess, ev);
    TensorValue iii = hs.fundamental_form(3, p);
    iii_mag = std::max(iii_mag, iii.max_abs());
    TensorValue resid = sub(hv, scale(iii, ev(f)));
    hess_res = std::max(hess_res, resid.max_abs() / gbar_scale(hs, p));
  }
  r.diagnostics["hessian_residual"] = hess_res;
  r.residuals[3] = hess_res;
  if (hess_res > tol) {
    r.verdict = Verdict::Rejected;
    r.rejected_order = 3;
    return r;
  }

  // stage (iii): odd forms match the reference f^2 dt^2 + gbar(0,x)
  const MetricField& gbar0 = in.metric();
  std::vector<Expression> comps;
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j) comps.push_back(gbar0.component(i, j));
  Hypersurface ref(base_like_chart(f, gbar0.coords(), comps, t), hs.max_order());
  std::vector<int> odds;
  for (int k = 5; k <= K; k += 2) odds.push_back(k);
  for (int k : odds) {
    double res = order_residual(hs, &ref, k, r.points);
    r.residuals[k] = res;
    if (res > tol && r.verdict != Verdict::Rejected) {
      r.verdict = Verdict::Rejected;
      r.rejected_order = k;
    }
  }
  if (r.verdict == Verdict::Rejected) return r;

  // order-5 cross-check against the explicit first correction
  if (K >= 5) {
    const ExprField& iii = hs.ff_field(3);
    ExprField diii = in.cov_deriv(iii);  // (c,a,b) = grad_c III_ab
    double o1f_res = 0.0;
    for (const Point& p : r.points) {
      Evaluator ev(p);
      double fv = ev(f);
      TensorValue v(ds, {Slot::Down, Slot::Down});
      for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b) {
          double acc = 0.0;
          for (int c = 0; c < ds; ++c)
            for (int e = 0; e < ds; ++e)
              acc += ev(in.inverse_component(c, e)) * ev(in.deriv(f, e)) *
                     (3.0 * ev(diii.at({c, a, b})) - ev(diii.at({a, b, c})) -
                      ev(diii.at({b, a, c})));
          v.set({a, b}, acc / fv);
        }
      TensorValue resid = sub(hs.fundamental_form(5, p), v);
      o1f_res = std::max(o1f_res, resid.max_abs() / gbar_scale(hs, p));
    }
    r.diagnostics["o1f_order5_residual"] = o1f_res;
    if (o1f_res > tol) {
      r.verdict = Verdict::Rejected;
      r.rejected_order = 5;
      return r;
    }
  }

  r.verdict = Verdict::BaseLike;
  r.product_subverdict = iii_mag <= tol;
  return r;
}

}  // namespace geoforms
