#include "geoforms/conformal.hpp"

#include <cmath>

namespace geoforms {

namespace {

Point on_sigma(const Hypersurface& hs, const Point& p) {
  Point q = p;
  q[hs.chart().transverse] = 0.0;
  return q;
}

double lapse_at(const Hypersurface& hs, Evaluator& ev) {
  if (hs.chart().strict) return 1.0;
  Expression l0 = substitute(hs.chart().lapse, hs.chart().transverse,
                             Expression(0.0));
  double f = ev(l0);
  if (f <= 0.0)
    throw ConformalError("lapse must be positive at the sample point");
  return f;
}

// ff_sign * W_{t a b t} / f^2 restricted to t = 0: the tangential W(n,.,.,n).
TensorValue weyl_nn(Hypersurface& hs, const Point& p) {
  const int ds = hs.sigma_dim();
  Evaluator ev(on_sigma(hs, p));
  double f = lapse_at(hs, ev);
  const ExprField& w = hs.ambient().weyl_field();
  TensorValue t(ds, {Slot::Down, Slot::Down});
  for (int a = 0; a < ds; ++a)
    for (int b = a; b < ds; ++b) {
      double v = ff_sign() * ev(w.at({0, a + 1, b + 1, 0})) / (f * f);
      t.set({a, b}, v);
      t.set({b, a}, v);
    }
  return t;
}

TensorValue intrinsic_tf_schouten(Hypersurface& hs, const Point& p) {
  MetricWorkspace& in = hs.intrinsic();
  Evaluator ev(p);
  TensorValue pb = in.eval_field(in.schouten_field(), ev);
  return symmetrize_tf(pb, in.metric_at(p), in.inverse_at(p));
}

}  // namespace

Chart rescale(const Chart& chart, const Expression& omega) {
  const MetricField& g = chart.full;
  const int d = g.dim();
  std::vector<Expression> comp;
  comp.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) comp.push_back(omega * omega * g.component(i, j));
  return Chart{MetricField(g.coords(), std::move(comp)), chart.transverse,
               omega * chart.lapse, chart.strict && omega.is_constant(1.0)};
}

WeightedForm trace_free_second_ff(Hypersurface& hs, const Point& p) {
  TensorValue gb = hs.induced_metric(p);
  TensorValue gbi = hs.intrinsic().inverse_at(p);
  TensorValue ii = hs.second_ff(p);
  return WeightedForm{symmetrize_tf(ii, gb, gbi), 1.0, true, "chart metric",
                      std::nullopt};
}

WeightedForm third_conformal_ff(Hypersurface& hs, const Point& p) {
  const int d = hs.dim();
  const int ds = hs.sigma_dim();
  if (d < 3) throw ConformalError("third conformal form requires d >= 3");
  if (d == 3) {
    // Weyl vanishes identically in three dimensions: structurally zero.
    return WeightedForm{TensorValue(ds, {Slot::Down, Slot::Down}), 0.0, true,
                        "chart metric (structurally zero, d = 3)", std::nullopt};
  }
  WeightedForm out{weyl_nn(hs, p), 0.0, true, "chart metric", std::nullopt};
  TensorValue gb = hs.induced_metric(p);
  double scale = std::max(1.0, gb.max_abs());
  if (hs.second_ff(p).max_abs() <= 1e-10 * scale) {
    double c = static_cast<double>(d - 3) / static_cast<double>(d - 2);
    out.product_comparison = geoforms::scale(intrinsic_tf_schouten(hs, p), c);
  }
  return out;
}

WeightedForm extended_third_ff(Hypersurface& hs, const Expression& sigma,
                               const Point& p) {
  const int d = hs.dim();
  const int ds = hs.sigma_dim();
  if (d < 6) throw ConformalError("extended third conformal form requires d >= 6");
  MetricWorkspace& amb = hs.ambient();
  Evaluator ev(p);

  std::vector<double> nlow(d), nup(d, 0.0);
  for (int a = 0; a < d; ++a) nlow[a] = ev(amb.deriv(sigma, a));
  TensorValue ginv = amb.inverse_at(p);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) nup[a] += ginv.at({a, b}) * nlow[b];

  const ExprField& w = amb.weyl_field();
  const ExprField& cot = amb.cotton_field();
  const ExprField& bach = amb.bach_field();
  double sv = ev(sigma);

  TensorValue t(ds, {Slot::Down, Slot::Down});
  for (int a = 0; a < ds; ++a)
    for (int b = a; b < ds; ++b) {
      double wterm = 0.0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          wterm += nup[c] * nup[e] * ev(w.at({c, a + 1, b + 1, e}));
      double cterm = 0.0;
      for (int c = 0; c < d; ++c)
        cterm += nup[c] * 0.5 *
                 (ev(cot.at({c, a + 1, b + 1})) + ev(cot.at({c, b + 1, a + 1})));
      double bterm = ev(bach.at({a + 1, b + 1}));
      double v = wterm + 2.0 * sv * cterm -
                 sv * sv / static_cast<double>(d - 4) * bterm;
      t.set({a, b}, v);
      t.set({b, a}, v);
    }
  return WeightedForm{std::move(t), 0.0, false, "chart metric", std::nullopt};
}

TensorValue gauss_schouten_residual(Hypersurface& hs, const Point& p) {
  const int d = hs.dim();
  const int ds = hs.sigma_dim();
  if (d < 4)
    throw ConformalError("Gauss-Schouten residual requires d >= 4");

  TensorValue gb = hs.induced_metric(p);
  TensorValue gbi = hs.intrinsic().inverse_at(p);
  TensorValue iio = symmetrize_tf(hs.second_ff(p), gb, gbi);

  // IIo^2_((ab))o = tf( IIo_a^c IIo_cb )
  TensorValue iio_up = raise_slot(iio, 1, gbi);                   // IIo_a^c
  TensorValue sq = contract(iio_up, iio, {{1, 0}});               // IIo_a^c IIo_cb
  TensorValue sqo = symmetrize_tf(sq, gb, gbi);

  TensorValue wn = weyl_nn(hs, p);

  // Tangential ambient Schouten, trace-freed with gbar.
  const ExprField& pf = hs.ambient().schouten_field();
  Evaluator ev(on_sigma(hs, p));
  TensorValue pt(ds, {Slot::Down, Slot::Down});
  for (int a = 0; a < ds; ++a)
    for (int b = a; b < ds; ++b) {
      double v = ev(pf.at({a + 1, b + 1}));
      pt.set({a, b}, v);
      pt.set({b, a}, v);
    }
  TensorValue pto = symmetrize_tf(pt, gb, gbi);

  TensorValue pbo = intrinsic_tf_schouten(hs, p);
  double h = hs.mean_curvature(p);

  TensorValue rhs = add(sub(pto, pbo), scale(iio, h));
  return sub(sub(sqo, wn), scale(rhs, static_cast<double>(d - 3)));
}

TensorValue jacobi_operator(Hypersurface& hs, const Expression& tau,
                            const Point& p) {
  const int d = hs.dim();
  if (d <= 3)
    throw ConformalError("Jacobi operator requires d >= 4 (division by d-3)");
  MetricWorkspace& in = hs.intrinsic();
  Evaluator ev(p);
  TensorValue gb = in.metric_at(p);
  TensorValue gbi = in.inverse_at(p);
  TensorValue hess = in.eval_field(in.hessian(tau), ev);
  TensorValue out = symmetrize_tf(hess, gb, gbi);
  double tv = ev(tau);
  out = add(out, scale(intrinsic_tf_schouten(hs, p), tv));
  WeightedForm iii = third_conformal_ff(hs, p);
  double c = static_cast<double>(d - 2) / static_cast<double>(d - 3);
  return sub(out, scale(iii.value, c * tv));
}

}  // namespace geoforms
