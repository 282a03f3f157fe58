#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geoforms/geometry.hpp"

using namespace geoforms;

namespace {

MetricField round_s3() {
  Expression chi = Expression::variable("chi");
  Expression th = Expression::variable("th");
  return MetricField::diagonal(
      {"chi", "th", "ph"},
      {Expression(1.0), pow(sin(chi), 2.0), pow(sin(chi), 2.0) * pow(sin(th), 2.0)});
}

MetricField product_r_s3() {
  Expression chi = Expression::variable("chi");
  Expression th = Expression::variable("th");
  return MetricField::diagonal(
      {"t", "chi", "th", "ph"},
      {Expression(1.0), Expression(1.0), pow(sin(chi), 2.0),
       pow(sin(chi), 2.0) * pow(sin(th), 2.0)});
}

// Generic curved diagonal d=4 metric with nonzero Cotton and Bach.
MetricField generic_d4() {
  Expression x = Expression::variable("x");
  Expression y = Expression::variable("y");
  Expression z = Expression::variable("z");
  Expression w = Expression::variable("w");
  return MetricField::diagonal(
      {"x", "y", "z", "w"},
      {Expression(1.0) + 0.2 * sin(y + z), Expression(1.0) + 0.2 * cos(z + w),
       Expression(1.0) + 0.2 * sin(w * x), Expression(1.0) + 0.2 * cos(x + y)});
}

const Point kS3Point{{"chi", 0.7}, {"th", 0.9}, {"ph", 0.3}};
const Point kProdPoint{{"t", 0.2}, {"chi", 0.7}, {"th", 0.9}, {"ph", 0.3}};
const Point kGenPoint{{"x", 0.2}, {"y", 0.3}, {"z", 0.4}, {"w", 0.5}};

double weyl_trace_deviation(const CurvatureStack& s) {
  const int d = s.metric.dim();
  double worst = 0.0;
  // trace over every metric-paired index pair of W_abcd
  for (int p = 0; p < 4; ++p)
    for (int q = p + 1; q < 4; ++q) {
      TensorValue up = raise_slot(s.weyl, p, s.inverse);
      worst = std::max(worst, trace(up, p, q).max_abs());
    }
  return worst / std::max(1.0, s.weyl.max_abs());
}

void check_riemann_symmetries(const CurvatureStack& s, double tol) {
  const int d = s.metric.dim();
  const TensorValue& r = s.riemann_low;
  double scale = std::max(1.0, r.max_abs());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          CHECK(std::abs(r.at({a, b, c, e}) + r.at({b, a, c, e})) <= tol * scale);
          CHECK(std::abs(r.at({a, b, c, e}) + r.at({a, b, e, c})) <= tol * scale);
          CHECK(std::abs(r.at({a, b, c, e}) - r.at({c, e, a, b})) <= tol * scale);
          // first Bianchi
          CHECK(std::abs(r.at({a, b, c, e}) + r.at({b, c, a, e}) +
                         r.at({c, a, b, e})) <= tol * scale);
        }
}

}  // namespace

TEST_CASE("flat space: every curvature tensor vanishes") {
  MetricField g = MetricField::diagonal(
      {"x", "y", "z"}, {Expression(1.0), Expression(1.0), Expression(1.0)});
  MetricWorkspace ws(g);
  CurvatureStack s = curvature_stack(ws, {{"x", 1.0}, {"y", 2.0}, {"z", 3.0}});
  CHECK(s.gamma.max_abs() == 0.0);
  CHECK(s.riemann_low.max_abs() == 0.0);
  CHECK(s.ricci.max_abs() == 0.0);
  CHECK(s.sc == 0.0);
  CHECK(s.weyl.max_abs() == 0.0);
  CHECK(s.cotton.max_abs() == 0.0);
  CHECK(fd_check(ws, FdQuantity::Scalar, {{"x", 0.1}, {"y", 0.2}, {"z", 0.3}}, 1e-4) <=
        1e-12);
}

TEST_CASE("unit round S^3: Sc = 6, Ric = 2g, P = g/2, J = 3/2") {
  MetricWorkspace ws(round_s3());
  CurvatureStack s = curvature_stack(ws, kS3Point, /*want_bach=*/false);
  CHECK(s.sc == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.j == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(max_abs_diff(s.ricci, scale(s.metric, 2.0)) <= 1e-9);
  CHECK(max_abs_diff(s.schouten, scale(s.metric, 0.5)) <= 1e-9);
  // constant curvature in d=3: Weyl and Cotton vanish
  CHECK(s.weyl.max_abs() <= 1e-9);
  CHECK(s.cotton.max_abs() <= 1e-9);
  check_riemann_symmetries(s, 1e-10);
}

TEST_CASE("product R x S^3: curvature is the fiber curvature") {
  MetricWorkspace ws(product_r_s3());
  CurvatureStack s = curvature_stack(ws, kProdPoint);
  CHECK(s.sc == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.j == doctest::Approx(1.0).epsilon(1e-9));

  // every Riemann component with an odd number of transverse (t) indices
  // vanishes, and Ric is the fiber Ricci padded with zeros
  const int d = 4;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == 0 || b == 0) CHECK(std::abs(s.ricci.at({a, b})) <= 1e-10);
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          int transverse = (a == 0) + (b == 0) + (c == 0) + (e == 0);
          if (transverse % 2 == 1)
            CHECK(std::abs(s.riemann_low.at({a, b, c, e})) <= 1e-10);
        }
    }
  // and R_{t a b t} = 0 in particular (no normal curvature in a product)
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      CHECK(std::abs(s.riemann_low.at({0, a, b, 0})) <= 1e-10);

  MetricWorkspace fiber(round_s3());
  CurvatureStack fs = curvature_stack(fiber, kS3Point, false);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(s.ricci.at({a + 1, b + 1}) ==
            doctest::Approx(fs.ricci.at({a, b})).epsilon(1e-10));

  check_riemann_symmetries(s, 1e-10);
  CHECK(weyl_trace_deviation(s) <= 1e-10);
}

TEST_CASE("generic d=4 metric: algebraic identities of the stack") {
  MetricWorkspace ws(generic_d4());
  CurvatureStack s = curvature_stack(ws, kGenPoint);
  REQUIRE(s.bach.has_value());
  CHECK(s.weyl.max_abs() > 1e-4);    // genuinely non-conformally-flat
  CHECK(s.cotton.max_abs() > 1e-6);  // genuinely non-symmetric space

  check_riemann_symmetries(s, 1e-10);
  CHECK(weyl_trace_deviation(s) <= 1e-10);

  // Cotton: antisymmetric in a,b and divergence identity g^bc C_abc = 0
  const int d = 4;
  double cscale = std::max(1.0, s.cotton.max_abs());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      for (int c = 0; c < d; ++c)
        CHECK(std::abs(s.cotton.at({a, b, c}) + s.cotton.at({b, a, c})) <=
              1e-10 * cscale);
      double tr = 0.0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          tr += s.inverse.at({c, e}) * s.cotton.at({a, c, e});
      CHECK(std::abs(tr) <= 1e-10 * cscale);
    }

  // J = g^ab P_ab and Sc = g^ab Ric_ab restated from the evaluated tensors
  double j = 0.0, sc = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      j += s.inverse.at({a, b}) * s.schouten.at({a, b});
      sc += s.inverse.at({a, b}) * s.ricci.at({a, b});
    }
  CHECK(j == doctest::Approx(s.j).epsilon(1e-12));
  CHECK(sc == doctest::Approx(s.sc).epsilon(1e-12));
}

TEST_CASE("scaling homogeneity: g -> lambda^2 g") {
  const double lambda = 1.7;
  MetricField g = round_s3();
  std::vector<Expression> comps;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      comps.push_back(Expression(lambda * lambda) * g.component(i, j));
  MetricWorkspace ws(g);
  MetricWorkspace ws2(MetricField(g.coords(), comps));
  CurvatureStack s = curvature_stack(ws, kS3Point, false);
  CurvatureStack s2 = curvature_stack(ws2, kS3Point, false);
  CHECK(s2.sc == doctest::Approx(s.sc / (lambda * lambda)).epsilon(1e-10));
  CHECK(max_abs_diff(s2.schouten, s.schouten) <= 1e-10);
  CHECK(max_abs_diff(s2.gamma, s.gamma) <= 1e-10);
}

TEST_CASE("finite-difference oracle across the whole stack") {
  auto run = [](MetricField g, const Point& p, bool bach) {
    MetricWorkspace ws(std::move(g));
    CHECK(fd_check(ws, FdQuantity::Gamma, p, 1e-4) <= 1e-6);
    CHECK(fd_check(ws, FdQuantity::Riemann, p, 1e-4) <= 1e-6);
    CHECK(fd_check(ws, FdQuantity::Ricci, p, 1e-4) <= 1e-6);
    CHECK(fd_check(ws, FdQuantity::Scalar, p, 1e-4) <= 1e-6);
    CHECK(fd_check(ws, FdQuantity::Schouten, p, 1e-4) <= 1e-6);
    CHECK(fd_check(ws, FdQuantity::Weyl, p, 1e-4) <= 1e-6);
    CHECK(fd_check(ws, FdQuantity::Cotton, p, 1e-4) <= 1e-6);
    if (bach) CHECK(fd_check(ws, FdQuantity::Bach, p, 1e-4) <= 1e-6);
  };
  run(round_s3(), kS3Point, false);
  run(product_r_s3(), kProdPoint, true);
  run(generic_d4(), kGenPoint, true);
}

TEST_CASE("covariant derivative") {
  MetricWorkspace ws(round_s3());

  SUBCASE("metric compatibility: components of nabla g vanish identically") {
    ExprField gf(3, {Slot::Down, Slot::Down});
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gf.set({i, j}, ws.metric_component(i, j));
    ExprField dg = ws.cov_deriv(gf);
    Evaluator ev(kS3Point);
    CHECK(ws.eval_field(dg, ev).max_abs() <= 1e-12);
  }

  SUBCASE("gradient of a scalar is the coordinate partials") {
    Expression f = parse_expression("sin(chi)*cos(th)");
    ExprField ff(3, {});
    ff.set({}, f);
    ExprField df = ws.cov_deriv(ff);
    Evaluator ev(kS3Point);
    for (int c = 0; c < 3; ++c)
      CHECK(ev(df.at({c})) ==
            doctest::Approx(ev(ws.deriv(f, c))).epsilon(1e-12));
  }

  SUBCASE("round S^2 connection coefficient Gamma^ph_th,ph = cot(th)") {
    Expression th = Expression::variable("th");
    MetricWorkspace s2(
        MetricField::diagonal({"th", "ph"}, {Expression(1.0), pow(sin(th), 2.0)}));
    double cot = std::cos(M_PI / 4) / std::sin(M_PI / 4);
    Evaluator ev(Point{{"th", M_PI / 4}, {"ph", 0.0}});
    CHECK(ev(s2.christoffel(1, 0, 1)) == doctest::Approx(cot).epsilon(1e-12));
  }
}

TEST_CASE("iterated Riemann derivatives agree with cov_deriv on nabla R") {
  MetricWorkspace ws(round_s3());
  ExprField dr = ws.cov_deriv(ws.riemann_low_field());
  Evaluator ev(kS3Point);
  std::vector<int> idx(5, 0);
  do {
    double direct = ev(ws.riemann_deriv_component(1, idx));
    CHECK(direct == doctest::Approx(ev(dr.at(idx))).epsilon(1e-10));
  } while (next_index(idx, 3));
}

TEST_CASE("error handling") {
  SUBCASE("singular metric at a point") {
    Expression x = Expression::variable("x");
    MetricWorkspace ws(MetricField::diagonal(
        {"x", "y", "z"}, {x, Expression(1.0), Expression(1.0)}));
    CHECK_THROWS_AS(ws.inverse_at({{"x", 0.0}, {"y", 0.0}, {"z", 0.0}}),
                    GeometryError);
    CHECK(ws.condition_estimate({{"x", 0.5}, {"y", 0.0}, {"z", 0.0}}) >= 1.0);
  }
  SUBCASE("Bach is gated to d >= 4 unless overridden") {
    MetricWorkspace ws(round_s3());
    CHECK_THROWS_AS(ws.bach_field(), GeometryError);
    ws.allow_bach_in_d3(true);
    CHECK_NOTHROW(ws.bach_field());
  }
  SUBCASE("Schouten needs d >= 3") {
    Expression th = Expression::variable("th");
    MetricWorkspace s2(
        MetricField::diagonal({"th", "ph"}, {Expression(1.0), pow(sin(th), 2.0)}));
    CHECK_THROWS_AS(s2.schouten_field(), GeometryError);
  }
}
