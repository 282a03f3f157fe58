#include "geoforms/hypersurface.hpp"

#include <cmath>
#include <mutex>

namespace geoforms {

namespace {

MetricField assemble_full(const Expression& g_tt,
                          const std::vector<std::string>& sigma_coords,
                          const std::vector<Expression>& gbar,
                          const std::string& transverse) {
  const int ds = static_cast<int>(sigma_coords.size());
  if (gbar.size() != static_cast<std::size_t>(ds) * ds)
    throw HypersurfaceError("gbar component count must be (d-1)^2");
  std::vector<std::string> coords;
  coords.push_back(transverse);
  for (const auto& c : sigma_coords) {
    if (c == transverse)
      throw HypersurfaceError("transverse coordinate reused on Sigma");
    coords.push_back(c);
  }
  const int d = ds + 1;
  std::vector<Expression> comp(static_cast<std::size_t>(d) * d, Expression(0.0));
  comp[0] = g_tt;
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j)
      comp[static_cast<std::size_t>(i + 1) * d + (j + 1)] = gbar[i * ds + j];
  return MetricField(std::move(coords), std::move(comp));
}

}  // namespace

Chart normal_form_chart(std::vector<std::string> sigma_coords,
                        std::vector<Expression> gbar_components,
                        std::string transverse) {
  Chart c{assemble_full(Expression(1.0), sigma_coords, gbar_components, transverse),
          transverse, Expression(1.0), true};
  return c;
}

Chart base_like_chart(Expression f, std::vector<std::string> sigma_coords,
                      std::vector<Expression> gbar_components,
                      std::string transverse) {
  if (f.depends_on(transverse))
    throw HypersurfaceError("base warp f must not depend on the transverse coordinate");
  for (const auto& e : gbar_components)
    if (e.depends_on(transverse))
      throw HypersurfaceError("base-like gbar must not depend on the transverse coordinate");
  Chart c{assemble_full(f * f, sigma_coords, gbar_components, transverse),
          transverse, f, false};
  return c;
}

// ---------------------------------------------------------------------------
// Sign pin: III on gbar = e^{2t} delta must equal [h''(0)/2 - h'(0)^2/4] gbar
// = gbar for h = e^{2t}, whatever the ambient Riemann conventions are.

namespace {

int detect_ff_sign() {
  Expression t = Expression::variable("t");
  Expression warp = exp(2.0 * t);
  MetricField g = MetricField::diagonal({"t", "x", "y"},
                                        {Expression(1.0), warp, warp});
  MetricWorkspace ws(g);
  Evaluator ev(Point{{"t", 0.0}, {"x", 0.3}, {"y", 0.4}});
  double raw = ev(ws.riemann_low_field().at({0, 1, 1, 0}));  // R_{t x x t}|_0
  if (std::abs(std::abs(raw) - 1.0) > 1e-9)
    throw HypersurfaceError("fundamental-form sign probe failed");
  return raw > 0 ? 1 : -1;
}

int cached_ff_sign() {
  static const int sign = detect_ff_sign();
  return sign;
}

}  // namespace

int ff_sign() { return cached_ff_sign(); }
bool ff_sign_flipped() { return cached_ff_sign() < 0; }

// ---------------------------------------------------------------------------
// Hypersurface

Hypersurface::Hypersurface(Chart chart, int max_order)
    : chart_(std::move(chart)),
      lapse0_(substitute(chart_.lapse, chart_.transverse, Expression(0.0))),
      max_order_(max_order) {
  if (max_order_ < 2) throw HypersurfaceError("max order must be at least 2");
  ambient_ = std::make_unique<MetricWorkspace>(chart_.full);

  const int ds = sigma_dim();
  if (ds < 1) throw HypersurfaceError("Sigma must have at least one coordinate");
  std::vector<std::string> sc(chart_.full.coords().begin() + 1,
                              chart_.full.coords().end());
  std::vector<Expression> comp;
  comp.reserve(static_cast<std::size_t>(ds) * ds);
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j)
      comp.push_back(substitute(chart_.full.component(i + 1, j + 1),
                                chart_.transverse, Expression(0.0)));
  intrinsic_ = std::make_unique<MetricWorkspace>(MetricField(sc, comp));
}

const ExprField& Hypersurface::ff_field(int k) {
  std::scoped_lock lock(mu_);
  if (k < 2) throw HypersurfaceError("fundamental forms start at order 2");
  if (k > max_order_)
    throw HypersurfaceError("order " + std::to_string(k) + " exceeds max order " +
                            std::to_string(max_order_));
  auto it = ff_fields_.find(k);
  if (it != ff_fields_.end()) return it->second;

  const int ds = sigma_dim();
  ExprField f(ds, {Slot::Down, Slot::Down});

  if (k == 2) {
    // II = (1/(2f)) d/dt gbar |_{t=0}
    for (int a = 0; a < ds; ++a)
      for (int b = a; b < ds; ++b) {
        Expression dg = ambient_->deriv(chart_.full.component(a + 1, b + 1), 0);
        Expression v = substitute(dg, chart_.transverse, Expression(0.0)) /
                       (2.0 * lapse0_);
        f.set({a, b}, v);
        f.set({b, a}, v);
      }
  } else {
    // FF(k)_ab = sign * f^{-(k-1)} * (grad^{k-3} R)_{t..t, t, a, b, t} |_{t=0}
    const int m = k - 3;
    Expression sign(static_cast<double>(ff_sign()));
    Expression scale = (chart_.strict)
                           ? sign
                           : sign / pow(lapse0_, static_cast<double>(k - 1));
    for (int a = 0; a < ds; ++a)
      for (int b = a; b < ds; ++b) {
        std::vector<int> idx(m, 0);
        idx.push_back(0);
        idx.push_back(a + 1);
        idx.push_back(b + 1);
        idx.push_back(0);
        Expression raw = ambient_->riemann_deriv_component(m, idx);
        Expression v = scale * substitute(raw, chart_.transverse, Expression(0.0));
        f.set({a, b}, v);
        f.set({b, a}, v);
      }
  }
  return ff_fields_.emplace(k, std::move(f)).first->second;
}

Expression Hypersurface::mean_curvature_field() {
  std::scoped_lock lock(mu_);
  if (!mean_curvature_) {
    const int ds = sigma_dim();
    const ExprField& ii = ff_field(2);
    Expression h(0.0);
    for (int a = 0; a < ds; ++a)
      for (int b = 0; b < ds; ++b)
        h = h + intrinsic_->inverse_component(a, b) * ii.at({a, b});
    mean_curvature_ = h / static_cast<double>(ds);
  }
  return *mean_curvature_;
}

void Hypersurface::check_lapse(Evaluator& ev) {
  if (chart_.strict) return;
  if (ev(lapse0_) <= 0.0)
    throw HypersurfaceError("lapse f must be positive at the sample point");
}

TensorValue Hypersurface::eval_sigma_field(const ExprField& f, const Point& p) {
  Evaluator ev(p);
  check_lapse(ev);
  return intrinsic_->eval_field(f, ev);
}

TensorValue Hypersurface::induced_metric(const Point& p) {
  Evaluator ev(p);
  check_lapse(ev);
  return intrinsic_->metric_at(p);
}

TensorValue Hypersurface::second_ff(const Point& p) {
  return eval_sigma_field(ff_field(2), p);
}

TensorValue Hypersurface::fundamental_form(int k, const Point& p) {
  return eval_sigma_field(ff_field(k), p);
}

double Hypersurface::mean_curvature(const Point& p) {
  Expression h = mean_curvature_field();
  Evaluator ev(p);
  check_lapse(ev);
  return ev(h);
}

TensorValue Hypersurface::lie_pullback(int j, const Point& p) {
  if (!chart_.strict)
    throw HypersurfaceError("Lie pullback requires strict normal form");
  if (j < 1) throw HypersurfaceError("Lie pullback order must be >= 1");
  const int ds = sigma_dim();
  Point q = p;
  q[chart_.transverse] = 0.0;
  Evaluator ev(q);
  TensorValue t(ds, {Slot::Down, Slot::Down});
  for (int a = 0; a < ds; ++a)
    for (int b = a; b < ds; ++b) {
      Expression e = chart_.full.component(a + 1, b + 1);
      for (int n = 0; n < j; ++n) e = ambient_->deriv(e, 0);
      double v = ev(e);
      t.set({a, b}, v);
      t.set({b, a}, v);
    }
  return t;
}

TensorValue Hypersurface::third_ff_operator_route(const Point& p) {
  const int ds = sigma_dim();
  const int d = dim();
  Point q = p;
  q[chart_.transverse] = 0.0;
  Evaluator ev(q);
  check_lapse(ev);
  double f = chart_.strict ? 1.0 : ev(lapse0_);
  const ExprField& rm = ambient_->riemann_mixed_field();
  TensorValue t(ds, {Slot::Down, Slot::Down});
  for (int a = 0; a < ds; ++a)
    for (int b = 0; b < ds; ++b) {
      // i* g(R(n, e_a) n, e_b) = g_cb R_{t a}{}^c{}_t / f^2
      double v = 0.0;
      for (int c = 0; c < d; ++c)
        v += ev(chart_.full.component(c, b + 1)) * ev(rm.at({0, a + 1, c, 0}));
      t.set({a, b}, ff_sign() * v / (f * f));
    }
  return t;
}

}  // namespace geoforms
