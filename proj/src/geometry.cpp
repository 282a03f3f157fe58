#include "geoforms/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace geoforms {

// ---------------------------------------------------------------------------
// MetricField

MetricField::MetricField(std::vector<std::string> coords,
                         std::vector<Expression> components)
    : dim_(static_cast<int>(coords.size())), coords_(std::move(coords)),
      comp_(std::move(components)) {
  if (dim_ < 1) throw GeometryError("metric needs at least one coordinate");
  if (comp_.size() != static_cast<std::size_t>(dim_) * dim_)
    throw GeometryError("metric component count must be dim^2");
  // Keep the matrix symmetric by sharing the upper triangle.
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) comp_[j * dim_ + i] = comp_[i * dim_ + j];
}

MetricField MetricField::diagonal(std::vector<std::string> coords,
                                  std::vector<Expression> diag) {
  int d = static_cast<int>(coords.size());
  if (diag.size() != static_cast<std::size_t>(d))
    throw GeometryError("diagonal metric needs dim entries");
  std::vector<Expression> comp(static_cast<std::size_t>(d) * d, Expression(0.0));
  for (int i = 0; i < d; ++i) comp[i * d + i] = diag[i];
  return MetricField(std::move(coords), std::move(comp));
}

const Expression& MetricField::component(int i, int j) const {
  return comp_[static_cast<std::size_t>(i) * dim_ + j];
}

int MetricField::coord_index(const std::string& name) const {
  for (int i = 0; i < dim_; ++i)
    if (coords_[i] == name) return i;
  throw GeometryError("unknown coordinate '" + name + "'");
}

// ---------------------------------------------------------------------------
// ExprField

ExprField::ExprField(int dim, std::vector<Slot> valence)
    : dim_(dim), valence_(std::move(valence)) {
  std::size_t n = 1;
  for (int i = 0; i < rank(); ++i) n *= static_cast<std::size_t>(dim_);
  comp_.assign(n, Expression(0.0));
}

std::size_t ExprField::flatten(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int i : idx) flat = flat * static_cast<std::size_t>(dim_) + i;
  return flat;
}

const Expression& ExprField::at(std::span<const int> idx) const {
  return comp_[flatten(idx)];
}

void ExprField::set(std::span<const int> idx, Expression e) {
  comp_[flatten(idx)] = std::move(e);
}

// ---------------------------------------------------------------------------
// MetricWorkspace

MetricWorkspace::MetricWorkspace(MetricField g) : g_(std::move(g)) {}

Expression MetricWorkspace::metric_component(int i, int j) {
  return g_.component(i, j);
}

Expression MetricWorkspace::minor_det(unsigned row_mask, unsigned col_mask) {
  auto key = std::make_pair(row_mask, col_mask);
  auto it = minors_.find(key);
  if (it != minors_.end()) return it->second;

  Expression result;
  if (row_mask == 0) {
    result = Expression(1.0);
  } else {
    int row = std::countr_zero(row_mask);
    unsigned rest_rows = row_mask & (row_mask - 1);
    result = Expression(0.0);
    double sign = 1.0;
    for (int col = 0; col < g_.dim(); ++col) {
      if (!(col_mask & (1u << col))) continue;
      Expression term = g_.component(row, col) *
                        minor_det(rest_rows, col_mask & ~(1u << col));
      result = (sign > 0) ? result + term : result - term;
      sign = -sign;
    }
  }
  minors_.emplace(key, result);
  return result;
}

Expression MetricWorkspace::det() {
  std::scoped_lock lock(mu_);
  if (!det_) {
    unsigned full = (1u << g_.dim()) - 1;
    det_ = minor_det(full, full);
  }
  return *det_;
}

Expression MetricWorkspace::inverse_component(int i, int j) {
  std::scoped_lock lock(mu_);
  if (!inverse_) {
    const int d = g_.dim();
    unsigned full = (1u << d) - 1;
    Expression dt = det();
    ExprField inv(d, {Slot::Up, Slot::Up});
    for (int r = 0; r < d; ++r) {
      for (int c = r; c < d; ++c) {
        // cofactor sign depends on the position of (r,c) among kept rows/cols
        Expression m = minor_det(full & ~(1u << c), full & ~(1u << r));
        double sign = ((r + c) % 2 == 0) ? 1.0 : -1.0;
        Expression e = (Expression(sign) * m) / dt;
        inv.set({r, c}, e);
        inv.set({c, r}, e);
      }
    }
    inverse_ = std::move(inv);
  }
  return inverse_->at({i, j});
}

Expression MetricWorkspace::deriv(const Expression& e, int coord) {
  std::scoped_lock lock(mu_);
  return diff_.d(e, g_.coords()[coord]);
}

Expression MetricWorkspace::christoffel(int c, int a, int b) {
  return gamma_field().at({c, a, b});
}

const ExprField& MetricWorkspace::gamma_field() {
  std::scoped_lock lock(mu_);
  if (!gamma_) {
    const int d = g_.dim();
    ExprField gam(d, {Slot::Up, Slot::Down, Slot::Down});
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          Expression sum(0.0);
          for (int e = 0; e < d; ++e) {
            Expression inner = deriv(g_.component(b, e), a) +
                               deriv(g_.component(a, e), b) -
                               deriv(g_.component(a, b), e);
            sum = sum + inverse_component(c, e) * inner;
          }
          Expression v = Expression(0.5) * sum;
          gam.set({c, a, b}, v);
          gam.set({c, b, a}, v);
        }
    gamma_ = std::move(gam);
  }
  return *gamma_;
}

const ExprField& MetricWorkspace::riemann_mixed_field() {
  std::scoped_lock lock(mu_);
  if (!riemann_mixed_) {
    const int d = g_.dim();
    const ExprField& gam = gamma_field();
    ExprField rm(d, {Slot::Down, Slot::Down, Slot::Up, Slot::Down});
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int dd = 0; dd < d; ++dd) {
            Expression v = deriv(gam.at({c, b, dd}), a) - deriv(gam.at({c, a, dd}), b);
            for (int e = 0; e < d; ++e)
              v = v + gam.at({c, a, e}) * gam.at({e, b, dd}) -
                  gam.at({c, b, e}) * gam.at({e, a, dd});
            rm.set({a, b, c, dd}, v);
            rm.set({b, a, c, dd}, -v);
          }
    riemann_mixed_ = std::move(rm);
  }
  return *riemann_mixed_;
}

const ExprField& MetricWorkspace::riemann_low_field() {
  std::scoped_lock lock(mu_);
  if (!riemann_low_) {
    const int d = g_.dim();
    const ExprField& rm = riemann_mixed_field();
    ExprField rl(d, std::vector<Slot>(4, Slot::Down));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int dd = 0; dd < d; ++dd) {
            Expression v(0.0);
            for (int e = 0; e < d; ++e)
              v = v + g_.component(c, e) * rm.at({a, b, e, dd});
            rl.set({a, b, c, dd}, v);
          }
    riemann_low_ = std::move(rl);
  }
  return *riemann_low_;
}

const ExprField& MetricWorkspace::ricci_field() {
  std::scoped_lock lock(mu_);
  if (!ricci_) {
    const int d = g_.dim();
    const ExprField& rm = riemann_mixed_field();
    ExprField ric(d, {Slot::Down, Slot::Down});
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Expression v(0.0);
        for (int c = 0; c < d; ++c) v = v + rm.at({c, a, c, b});
        ric.set({a, b}, v);
      }
    ricci_ = std::move(ric);
  }
  return *ricci_;
}

Expression MetricWorkspace::scalar_curvature() {
  std::scoped_lock lock(mu_);
  if (!sc_) {
    const int d = g_.dim();
    const ExprField& ric = ricci_field();
    Expression v(0.0);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        v = v + inverse_component(a, b) * ric.at({a, b});
    sc_ = v;
  }
  return *sc_;
}

const ExprField& MetricWorkspace::schouten_field() {
  std::scoped_lock lock(mu_);
  if (!schouten_) {
    const int d = g_.dim();
    if (d < 3) throw GeometryError("Schouten tensor needs dim >= 3");
    const ExprField& ric = ricci_field();
    Expression sc = scalar_curvature();
    ExprField p(d, {Slot::Down, Slot::Down});
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Expression v = (ric.at({a, b}) -
                        sc * g_.component(a, b) / Expression(2.0 * (d - 1))) /
                       Expression(static_cast<double>(d - 2));
        p.set({a, b}, v);
      }
    schouten_ = std::move(p);
  }
  return *schouten_;
}

Expression MetricWorkspace::j_trace() {
  std::scoped_lock lock(mu_);
  if (!j_) {
    const int d = g_.dim();
    const ExprField& p = schouten_field();
    Expression v(0.0);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        v = v + inverse_component(a, b) * p.at({a, b});
    j_ = v;
  }
  return *j_;
}

const ExprField& MetricWorkspace::weyl_field() {
  std::scoped_lock lock(mu_);
  if (!weyl_) {
    const int d = g_.dim();
    const ExprField& rl = riemann_low_field();
    const ExprField& p = schouten_field();
    ExprField w(d, std::vector<Slot>(4, Slot::Down));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int dd = 0; dd < d; ++dd) {
            Expression v = rl.at({a, b, c, dd}) -
                           g_.component(a, c) * p.at({b, dd}) +
                           g_.component(a, dd) * p.at({b, c}) +
                           g_.component(b, c) * p.at({a, dd}) -
                           g_.component(b, dd) * p.at({a, c});
            w.set({a, b, c, dd}, v);
          }
    weyl_ = std::move(w);
  }
  return *weyl_;
}

const ExprField& MetricWorkspace::cotton_field() {
  std::scoped_lock lock(mu_);
  if (!cotton_) {
    const int d = g_.dim();
    ExprField dp = cov_deriv(schouten_field());  // (c,a,b) = nabla_c P_ab
    ExprField cot(d, std::vector<Slot>(3, Slot::Down));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          cot.set({a, b, c}, dp.at({a, b, c}) - dp.at({b, a, c}));
    cotton_ = std::move(cot);
  }
  return *cotton_;
}

const ExprField& MetricWorkspace::bach_field() {
  std::scoped_lock lock(mu_);
  if (!bach_) {
    const int d = g_.dim();
    if (d < 4 && !allow_bach_d3_)
      throw GeometryError("Bach tensor gated to dim >= 4 (override to force)");
    const ExprField& p = schouten_field();
    const ExprField& w = weyl_field();
    ExprField dp = cov_deriv(p);    // (c,a,b)
    ExprField ddp = cov_deriv(dp);  // (e,c,a,b) = nabla_e nabla_c P_ab
    ExprField b(d, {Slot::Down, Slot::Down});
    for (int a = 0; a < d; ++a)
      for (int bb = 0; bb < d; ++bb) {
        Expression v(0.0);
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            // Delta P_ab - nabla^c nabla_a P_bc
            v = v + inverse_component(c, e) *
                        (ddp.at({c, e, a, bb}) - ddp.at({c, a, bb, e}));
          }
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e)
            for (int m = 0; m < d; ++m)
              for (int n = 0; n < d; ++n)
                v = v + inverse_component(c, m) * inverse_component(e, n) *
                        p.at({m, n}) * w.at({a, c, bb, e});
        b.set({a, bb}, v);
      }
    bach_ = std::move(b);
  }
  return *bach_;
}

ExprField MetricWorkspace::cov_deriv(const ExprField& t) {
  std::scoped_lock lock(mu_);
  const int d = g_.dim();
  const ExprField& gam = gamma_field();
  std::vector<Slot> valence;
  valence.push_back(Slot::Down);
  for (Slot s : t.valence()) valence.push_back(s);
  ExprField r(d, valence);

  std::vector<int> idx(t.rank(), 0);
  do {
    for (int c = 0; c < d; ++c) {
      Expression v = deriv(t.at(idx), c);
      std::vector<int> jdx = idx;
      for (int slot = 0; slot < t.rank(); ++slot) {
        int orig = idx[slot];
        for (int e = 0; e < d; ++e) {
          jdx[slot] = e;
          if (t.valence()[slot] == Slot::Up)
            v = v + gam.at({orig, c, e}) * t.at(jdx);
          else
            v = v - gam.at({e, c, orig}) * t.at(jdx);
        }
        jdx[slot] = orig;
      }
      std::vector<int> out;
      out.reserve(t.rank() + 1);
      out.push_back(c);
      out.insert(out.end(), idx.begin(), idx.end());
      r.set(out, v);
    }
  } while (t.rank() > 0 && next_index(idx, d));
  return r;
}

Expression MetricWorkspace::riemann_deriv_component(int m, std::span<const int> idx) {
  std::scoped_lock lock(mu_);
  if (static_cast<int>(idx.size()) != m + 4)
    throw GeometryError("riemann_deriv_component: index size must be m + 4");
  if (m == 0) return riemann_low_field().at(idx);

  if (riemann_chain_.size() < static_cast<std::size_t>(m))
    riemann_chain_.resize(m);
  std::size_t flat = 0;
  for (int i : idx) flat = flat * static_cast<std::size_t>(g_.dim()) + i;
  auto& memo = riemann_chain_[m - 1];
  auto it = memo.find(flat);
  if (it != memo.end()) return it->second;

  const int d = g_.dim();
  const ExprField& gam = gamma_field();
  const int c = idx[0];
  std::vector<int> inner(idx.begin() + 1, idx.end());

  Expression v = deriv(riemann_deriv_component(m - 1, inner), c);
  std::vector<int> jdx = inner;
  for (std::size_t slot = 0; slot < inner.size(); ++slot) {
    int orig = inner[slot];
    for (int e = 0; e < d; ++e) {
      jdx[slot] = e;
      v = v - gam.at({e, c, orig}) * riemann_deriv_component(m - 1, jdx);
    }
    jdx[slot] = orig;
  }
  memo.emplace(flat, v);
  return v;
}

ExprField MetricWorkspace::hessian(const Expression& scalar) {
  std::scoped_lock lock(mu_);
  const int d = g_.dim();
  const ExprField& gam = gamma_field();
  ExprField h(d, {Slot::Down, Slot::Down});
  std::vector<Expression> grad(d);
  for (int a = 0; a < d; ++a) grad[a] = deriv(scalar, a);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      Expression v = deriv(grad[a], b);
      for (int e = 0; e < d; ++e) v = v - gam.at({e, a, b}) * grad[e];
      h.set({a, b}, v);
      h.set({b, a}, v);
    }
  return h;
}

Expression MetricWorkspace::laplacian(const Expression& scalar) {
  std::scoped_lock lock(mu_);
  const int d = g_.dim();
  ExprField h = hessian(scalar);
  Expression v(0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      v = v + inverse_component(a, b) * h.at({a, b});
  return v;
}

Expression MetricWorkspace::grad_square(const Expression& scalar) {
  std::scoped_lock lock(mu_);
  const int d = g_.dim();
  Expression v(0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      v = v + inverse_component(a, b) * deriv(scalar, a) * deriv(scalar, b);
  return v;
}

TensorValue MetricWorkspace::eval_field(const ExprField& f, Evaluator& ev) const {
  TensorValue t(f.dim(), f.valence());
  std::vector<int> idx(f.rank(), 0);
  do {
    t.set(idx, ev(f.at(idx)));
  } while (f.rank() > 0 && next_index(idx, f.dim()));
  return t;
}

TensorValue MetricWorkspace::metric_at(const Point& p) {
  const int d = g_.dim();
  Evaluator ev(p);
  TensorValue t(d, {Slot::Down, Slot::Down});
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.set({i, j}, ev(g_.component(i, j)));
  return t;
}

TensorValue MetricWorkspace::inverse_at(const Point& p) {
  const int d = g_.dim();
  Evaluator ev(p);
  Expression dt = det();
  if (std::abs(ev(dt)) < 1e-14)
    throw GeometryError("singular metric at evaluation point");
  TensorValue t(d, {Slot::Up, Slot::Up});
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.set({i, j}, ev(inverse_component(i, j)));
  return t;
}

double MetricWorkspace::condition_estimate(const Point& p) {
  TensorValue g = metric_at(p);
  TensorValue gi = inverse_at(p);
  auto row_norm = [](const TensorValue& t) {
    double m = 0.0;
    for (int i = 0; i < t.dim(); ++i) {
      double s = 0.0;
      for (int j = 0; j < t.dim(); ++j) s += std::abs(t.at({i, j}));
      m = std::max(m, s);
    }
    return m;
  };
  return row_norm(g) * row_norm(gi);
}

// ---------------------------------------------------------------------------
// curvature_stack

CurvatureStack curvature_stack(MetricWorkspace& ws, const Point& p, bool want_bach) {
  const int d = ws.dim();
  CurvatureStack s{p,
                   ws.metric_at(p),
                   ws.inverse_at(p),
                   TensorValue(d, {Slot::Up, Slot::Down, Slot::Down}),
                   TensorValue(d, {Slot::Down, Slot::Down, Slot::Up, Slot::Down}),
                   TensorValue(d, std::vector<Slot>(4, Slot::Down)),
                   TensorValue(d, {Slot::Down, Slot::Down}),
                   TensorValue(d, {Slot::Down, Slot::Down}),
                   TensorValue(d, std::vector<Slot>(4, Slot::Down)),
                   TensorValue(d, std::vector<Slot>(3, Slot::Down)),
                   std::nullopt};
  s.condition_estimate = ws.condition_estimate(p);

  Evaluator ev(p);
  s.gamma = ws.eval_field(ws.gamma_field(), ev);
  s.riemann_mixed = ws.eval_field(ws.riemann_mixed_field(), ev);
  s.riemann_low = ws.eval_field(ws.riemann_low_field(), ev);
  s.ricci = ws.eval_field(ws.ricci_field(), ev);
  s.sc = ev(ws.scalar_curvature());
  s.schouten = ws.eval_field(ws.schouten_field(), ev);
  s.j = ev(ws.j_trace());
  s.weyl = ws.eval_field(ws.weyl_field(), ev);
  s.cotton = ws.eval_field(ws.cotton_field(), ev);
  if (want_bach && d >= 4) s.bach = ws.eval_field(ws.bach_field(), ev);
  return s;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
//
// Each stack member's own differentiation step is replaced by central finite
// differences of the layer below it (metric components for Gamma, the
// symbolic Gamma field for Riemann, the symbolic Schouten field for Cotton
// and Bach); purely algebraic members are reassembled from the FD Riemann.

namespace {

Point shifted(const Point& p, const std::string& coord, double dx) {
  Point q = p;
  q[coord] += dx;
  return q;
}

// central difference of an expression in one coordinate
double fd1(const Expression& e, const Point& p, const std::string& coord, double h) {
  return (e.evaluate(shifted(p, coord, h)) - e.evaluate(shifted(p, coord, -h))) /
         (2.0 * h);
}

double fd2(const Expression& e, const Point& p, const std::string& ca,
           const std::string& cb, double h) {
  if (ca == cb) {
    return (e.evaluate(shifted(p, ca, h)) - 2.0 * e.evaluate(p) +
            e.evaluate(shifted(p, ca, -h))) /
           (h * h);
  }
  Point pp = shifted(shifted(p, ca, h), cb, h);
  Point pm = shifted(shifted(p, ca, h), cb, -h);
  Point mp = shifted(shifted(p, ca, -h), cb, h);
  Point mm = shifted(shifted(p, ca, -h), cb, -h);
  return (e.evaluate(pp) - e.evaluate(pm) - e.evaluate(mp) + e.evaluate(mm)) /
         (4.0 * h * h);
}

TensorValue fd_gamma(MetricWorkspace& ws, const Point& p, double h) {
  const int d = ws.dim();
  const auto& coords = ws.metric().coords();
  TensorValue gi = ws.inverse_at(p);
  TensorValue gam(d, {Slot::Up, Slot::Down, Slot::Down});
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double v = 0.0;
        for (int e = 0; e < d; ++e) {
          double inner = fd1(ws.metric().component(b, e), p, coords[a], h) +
                         fd1(ws.metric().component(a, e), p, coords[b], h) -
                         fd1(ws.metric().component(a, b), p, coords[e], h);
          v += gi.at({c, e}) * inner;
        }
        gam.set({c, a, b}, 0.5 * v);
      }
  return gam;
}

TensorValue fd_riemann_mixed(MetricWorkspace& ws, const Point& p, double h) {
  const int d = ws.dim();
  const auto& coords = ws.metric().coords();
  const ExprField& gam = ws.gamma_field();
  Evaluator ev(p);
  TensorValue gv = ws.eval_field(gam, ev);
  TensorValue r(d, {Slot::Down, Slot::Down, Slot::Up, Slot::Down});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int dd = 0; dd < d; ++dd) {
          double v = fd1(gam.at({c, b, dd}), p, coords[a], h) -
                     fd1(gam.at({c, a, dd}), p, coords[b], h);
          for (int e = 0; e < d; ++e)
            v += gv.at({c, a, e}) * gv.at({e, b, dd}) -
                 gv.at({c, b, e}) * gv.at({e, a, dd});
          r.set({a, b, c, dd}, v);
        }
  return r;
}

double deviation(const TensorValue& fd, const TensorValue& sym) {
  return max_abs_diff(fd, sym) / std::max(1.0, sym.max_abs());
}

double scalar_deviation(double fd, double sym) {
  return std::abs(fd - sym) / std::max(1.0, std::abs(sym));
}

}  // namespace

double fd_check(MetricWorkspace& ws, FdQuantity q, const Point& p, double h) {
  const int d = ws.dim();
  const auto& coords = ws.metric().coords();
  CurvatureStack sym = curvature_stack(ws, p, q == FdQuantity::Bach);

  switch (q) {
    case FdQuantity::Gamma:
      return deviation(fd_gamma(ws, p, h), sym.gamma);
    case FdQuantity::Riemann:
      return deviation(fd_riemann_mixed(ws, p, h), sym.riemann_mixed);
    case FdQuantity::Ricci: {
      TensorValue rm = fd_riemann_mixed(ws, p, h);
      TensorValue ric(d, {Slot::Down, Slot::Down});
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double v = 0.0;
          for (int c = 0; c < d; ++c) v += rm.at({c, a, c, b});
          ric.set({a, b}, v);
        }
      return deviation(ric, sym.ricci);
    }
    case FdQuantity::Scalar: {
      TensorValue rm = fd_riemann_mixed(ws, p, h);
      double sc = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c)
            sc += sym.inverse.at({a, b}) * rm.at({c, a, c, b});
      return scalar_deviation(sc, sym.sc);
    }
    case FdQuantity::Schouten:
    case FdQuantity::Weyl: {
      TensorValue rm = fd_riemann_mixed(ws, p, h);
      TensorValue ric(d, {Slot::Down, Slot::Down});
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double v = 0.0;
          for (int c = 0; c < d; ++c) v += rm.at({c, a, c, b});
          ric.set({a, b}, v);
        }
      double sc = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) sc += sym.inverse.at({a, b}) * ric.at({a, b});
      TensorValue schouten(d, {Slot::Down, Slot::Down});
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          schouten.set({a, b}, (ric.at({a, b}) -
                                sc * sym.metric.at({a, b}) / (2.0 * (d - 1))) /
                                   (d - 2));
      if (q == FdQuantity::Schouten) return deviation(schouten, sym.schouten);

      TensorValue rl = lower_slot(rm, 2, sym.metric);
      // lower_slot contracts slot 2; reorder is identity here since the up
      // slot stays in place.
      TensorValue w(d, std::vector<Slot>(4, Slot::Down));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c)
            for (int dd = 0; dd < d; ++dd)
              w.set({a, b, c, dd},
                    rl.at({a, b, c, dd}) - sym.metric.at({a, c}) * schouten.at({b, dd}) +
                        sym.metric.at({a, dd}) * schouten.at({b, c}) +
                        sym.metric.at({b, c}) * schouten.at({a, dd}) -
                        sym.metric.at({b, dd}) * schouten.at({a, c}));
      return deviation(w, sym.weyl);
    }
    case FdQuantity::Cotton: {
      const ExprField& pf = ws.schouten_field();
      Evaluator ev(p);
      TensorValue pv = ws.eval_field(pf, ev);
      TensorValue gv = ws.eval_field(ws.gamma_field(), ev);
      // nabla_c P_ab with the partial replaced by a central difference
      TensorValue dp(d, std::vector<Slot>(3, Slot::Down));
      for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) {
            double v = fd1(pf.at({a, b}), p, coords[c], h);
            for (int e = 0; e < d; ++e)
              v -= gv.at({e, c, a}) * pv.at({e, b}) + gv.at({e, c, b}) * pv.at({a, e});
            dp.set({c, a, b}, v);
          }
      TensorValue cot(d, std::vector<Slot>(3, Slot::Down));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c)
            cot.set({a, b, c}, dp.at({a, b, c}) - dp.at({b, a, c}));
      return deviation(cot, sym.cotton);
    }
    case FdQuantity::Bach: {
      // Replace only the outermost derivative: FD the symbolic nabla P field.
      ExprField dpf = ws.cov_deriv(ws.schouten_field());
      Evaluator ev(p);
      TensorValue dpv = ws.eval_field(dpf, ev);
      TensorValue gv = ws.eval_field(ws.gamma_field(), ev);
      TensorValue pv = ws.eval_field(ws.schouten_field(), ev);
      const int rank = 3;
      TensorValue ddp(d, std::vector<Slot>(4, Slot::Down));
      for (int e = 0; e < d; ++e) {
        std::vector<int> idx(rank, 0);
        do {
          double v = fd1(dpf.at(idx), p, coords[e], h);
          std::vector<int> jdx = idx;
          for (int slot = 0; slot < rank; ++slot) {
            int orig = idx[slot];
            for (int m = 0; m < d; ++m) {
              jdx[slot] = m;
              v -= gv.at({m, e, orig}) * dpv.at(jdx);
            }
            jdx[slot] = orig;
          }
          ddp.set({e, idx[0], idx[1], idx[2]}, v);
        } while (next_index(idx, d));
      }
      TensorValue b(d, {Slot::Down, Slot::Down});
      for (int a = 0; a < d; ++a)
        for (int bb = 0; bb < d; ++bb) {
          double v = 0.0;
          for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e)
              v += sym.inverse.at({c, e}) *
                   (ddp.at({c, e, a, bb}) - ddp.at({c, a, bb, e}));
          for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e)
              for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n)
                  v += sym.inverse.at({c, m}) * sym.inverse.at({e, n}) *
                       pv.at({m, n}) * sym.weyl.at({a, c, bb, e});
          b.set({a, bb}, v);
        }
      if (!sym.bach) throw GeometryError("fd_check: Bach not available");
      return deviation(b, *sym.bach);
    }
  }
  throw GeometryError("fd_check: unknown quantity");
}

}  // namespace geoforms
