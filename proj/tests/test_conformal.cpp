#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geoforms/conformal.hpp"

using namespace geoforms;

namespace {

Expression var(const char* n) { return Expression::variable(n); }

// R x S^3, d = 4, Einstein fiber.
Chart prod_s3_chart() {
  Expression chi = var("chi"), th = var("th");
  Expression s2 = sin(chi) * sin(chi);
  return normal_form_chart({"chi", "th", "ph"},
                           {Expression(1.0), Expression(0.0), Expression(0.0),
                            Expression(0.0), s2, Expression(0.0),
                            Expression(0.0), Expression(0.0),
                            s2 * sin(th) * sin(th)});
}

// R x (S^2 x S^1), d = 4, non-Einstein fiber.
Chart prod_s2s1_chart() {
  Expression th = var("th");
  return normal_form_chart({"th", "ph", "z"},
                           {Expression(1.0), Expression(0.0), Expression(0.0),
                            Expression(0.0), sin(th) * sin(th), Expression(0.0),
                            Expression(0.0), Expression(0.0), Expression(1.0)});
}

Chart flat_product_chart() {
  std::vector<Expression> g(9, Expression(0.0));
  g[0] = g[4] = g[8] = Expression(1.0);
  return normal_form_chart({"x", "y", "z"}, g);
}

// Fiber-like warp h = e^{2t} over flat R^3 (hyperbolic ambient).
Chart fiber_exp_chart() {
  Expression w = exp(2.0 * var("t"));
  std::vector<Expression> g(9, Expression(0.0));
  g[0] = g[4] = g[8] = w;
  return normal_form_chart({"x", "y", "z"}, g);
}

// Generic non-umbilic chart: II is not proportional to gbar, so IIo != 0.
Chart generic_chart() {
  Expression t = var("t"), x = var("x"), y = var("y");
  std::vector<Expression> g(9, Expression(0.0));
  g[0] = 1.0 + t;
  g[4] = (1.0 + 2.0 * t) * (1.0 + 0.3 * x * x);
  g[8] = (1.0 + t) * (1.0 + t) * (1.0 + 0.2 * y * y);
  return normal_form_chart({"x", "y", "z"}, g);
}

// R x S^5, d = 6 (cylinder over the round five-sphere).
Chart prod_s5_chart() {
  Expression c = var("c"), t1 = var("t1"), t2 = var("t2"), t3 = var("t3");
  Expression s2c = sin(c) * sin(c);
  std::vector<Expression> diag{Expression(1.0), s2c, s2c * sin(t1) * sin(t1),
                               s2c * sin(t1) * sin(t1) * sin(t2) * sin(t2),
                               s2c * sin(t1) * sin(t1) * sin(t2) * sin(t2) *
                                   sin(t3) * sin(t3)};
  std::vector<Expression> g(25, Expression(0.0));
  for (int i = 0; i < 5; ++i) g[static_cast<std::size_t>(i) * 5 + i] = diag[i];
  return normal_form_chart({"c", "t1", "t2", "t3", "t4"}, g, "s");
}

// R x (S^2 x S^3), d = 6, non-Einstein fiber: nonzero IIIo for the
// off-Sigma-vs-on-Sigma comparison of the extended form.
Chart prod_s2s3_chart() {
  Expression th = var("th"), a = var("a"), b = var("b");
  std::vector<Expression> diag{Expression(1.0), sin(th) * sin(th),
                               Expression(1.0), sin(a) * sin(a),
                               sin(a) * sin(a) * sin(b) * sin(b)};
  std::vector<Expression> g(25, Expression(0.0));
  for (int i = 0; i < 5; ++i) g[static_cast<std::size_t>(i) * 5 + i] = diag[i];
  return normal_form_chart({"th", "ph", "a", "b", "w"}, g, "s");
}

const Point kS3Point{{"chi", 0.7}, {"th", 0.9}, {"ph", 0.3}};
const Point kS2S1Point{{"th", 0.8}, {"ph", 0.4}, {"z", 0.2}};
const Point kFlatPoint{{"x", 0.3}, {"y", -0.2}, {"z", 0.5}};

double trace_against(const TensorValue& t, const TensorValue& g_inv) {
  double tr = 0.0;
  for (int a = 0; a < t.dim(); ++a)
    for (int b = 0; b < t.dim(); ++b) tr += g_inv.at({a, b}) * t.at({a, b});
  return tr;
}

}  // namespace

TEST_CASE("rescale basics") {
  SUBCASE("Omega == 1 is the identity") {
    Chart c = prod_s3_chart();
    Chart r = rescale(c, Expression(1.0));
    CHECK(r.strict);
    Evaluator ev(Point{{"t", 0.2}, {"chi", 0.7}, {"th", 0.9}, {"ph", 0.3}});
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(ev(r.full.component(i, j)) ==
              doctest::Approx(ev(c.full.component(i, j))).epsilon(1e-14));
  }
  SUBCASE("constant Omega = 2 quarters the scalar curvature") {
    Chart r = rescale(prod_s3_chart(), Expression(2.0));
    CHECK_FALSE(r.strict);
    MetricWorkspace ws(r.full);
    Evaluator ev(Point{{"t", 0.2}, {"chi", 0.7}, {"th", 0.9}, {"ph", 0.3}});
    CHECK(ev(ws.scalar_curvature()) == doctest::Approx(6.0 / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("conformal weight laws") {
  Hypersurface base(generic_chart());
  Point p{{"x", 0.4}, {"y", -0.3}, {"z", 0.2}};
  WeightedForm iio = trace_free_second_ff(base, p);
  WeightedForm iiio = third_conformal_ff(base, p);
  CHECK(iio.weight == 1.0);
  CHECK(iiio.weight == 0.0);
  REQUIRE(iio.value.max_abs() > 1e-3);  // the probe is genuinely non-umbilic

  SUBCASE("constant lambda: entries scale by lambda^{3-k}") {
    const double lam = 2.0;
    Hypersurface scaled(rescale(generic_chart(), Expression(lam)));
    WeightedForm iio2 = trace_free_second_ff(scaled, p);
    WeightedForm iiio2 = third_conformal_ff(scaled, p);
    CHECK(max_abs_diff(iio2.value, scale(iio.value, lam)) <= 1e-10);
    CHECK(max_abs_diff(iiio2.value, iiio.value) <= 1e-10);
  }

  SUBCASE("Omega = e^x at Sigma: IIo by Omega, IIIo unchanged") {
    Hypersurface scaled(rescale(generic_chart(), exp(var("x"))));
    WeightedForm iio2 = trace_free_second_ff(scaled, p);
    WeightedForm iiio2 = third_conformal_ff(scaled, p);
    double om = std::exp(p.at("x"));
    CHECK(max_abs_diff(iio2.value, scale(iio.value, om)) <= 1e-8);
    CHECK(max_abs_diff(iiio2.value, iiio.value) <= 1e-8);
  }
}

TEST_CASE("trace-freeness and product vanishing of IIo") {
  SUBCASE("IIo and IIIo are trace-free on a generic chart") {
    Hypersurface hs(generic_chart());
    Point p{{"x", 0.4}, {"y", -0.3}, {"z", 0.2}};
    TensorValue gbi = hs.intrinsic().inverse_at(p);
    CHECK(std::abs(trace_against(trace_free_second_ff(hs, p).value, gbi)) <= 1e-10);
    CHECK(std::abs(trace_against(third_conformal_ff(hs, p).value, gbi)) <= 1e-10);
  }
  SUBCASE("products have IIo = 0 and H = 0") {
    Hypersurface s3(prod_s3_chart());
    Hypersurface s2s1(prod_s2s1_chart());
    CHECK(trace_free_second_ff(s3, kS3Point).value.max_abs() <= 1e-12);
    CHECK(std::abs(s3.mean_curvature(kS3Point)) <= 1e-12);
    CHECK(trace_free_second_ff(s2s1, kS2S1Point).value.max_abs() <= 1e-12);
    CHECK(std::abs(s2s1.mean_curvature(kS2S1Point)) <= 1e-12);
  }
}

TEST_CASE("third conformal form on products") {
  SUBCASE("Einstein fiber: IIIo vanishes") {
    Hypersurface s3(prod_s3_chart());
    WeightedForm iii = third_conformal_ff(s3, kS3Point);
    CHECK(iii.value.max_abs() <= 1e-10);
    REQUIRE(iii.product_comparison.has_value());
    CHECK(iii.product_comparison->max_abs() <= 1e-10);
  }
  SUBCASE("S^2 x S^1 fiber: IIIo = (1/2) tf Pbar = diag(1/6, 1/6, -1/3)") {
    Hypersurface hs(prod_s2s1_chart());
    WeightedForm iii = third_conformal_ff(hs, kS2S1Point);
    REQUIRE(iii.product_comparison.has_value());
    CHECK(max_abs_diff(iii.value, *iii.product_comparison) <= 1e-8);
    double s2 = std::sin(kS2S1Point.at("th")) * std::sin(kS2S1Point.at("th"));
    CHECK(iii.value.at({0, 0}) == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(iii.value.at({1, 1}) / s2 == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(iii.value.at({2, 2}) == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("flat product: zero") {
    Hypersurface hs(flat_product_chart());
    CHECK(third_conformal_ff(hs, kFlatPoint).value.max_abs() <= 1e-12);
  }
  SUBCASE("d = 3 is structurally zero") {
    std::vector<Expression> g{Expression(1.0), Expression(0.0), Expression(0.0),
                              sin(var("x")) * sin(var("x"))};
    Hypersurface hs(normal_form_chart({"x", "y"}, g));
    WeightedForm iii = third_conformal_ff(hs, Point{{"x", 0.7}, {"y", 0.2}});
    CHECK(iii.value.max_abs() == 0.0);
  }
}

TEST_CASE("Gauss-Schouten identity residual") {
  SUBCASE("flat product") {
    Hypersurface hs(flat_product_chart());
    CHECK(gauss_schouten_residual(hs, kFlatPoint).max_abs() <= 1e-12);
  }
  SUBCASE("R x (S^2 x S^1)") {
    Hypersurface hs(prod_s2s1_chart());
    CHECK(gauss_schouten_residual(hs, kS2S1Point).max_abs() <= 1e-8);
  }
  SUBCASE("fiber-like h = e^{2t} over flat gbar") {
    Hypersurface hs(fiber_exp_chart());
    CHECK(gauss_schouten_residual(hs, kFlatPoint).max_abs() <= 1e-8);
  }
  SUBCASE("generic non-umbilic chart (all terms nonzero)") {
    Hypersurface hs(generic_chart());
    Point p{{"x", 0.4}, {"y", -0.3}, {"z", 0.2}};
    CHECK(gauss_schouten_residual(hs, p).max_abs() <= 1e-8);
  }
}

TEST_CASE("Jacobi-like operator") {
  SUBCASE("tau == 1 on an Einstein-fiber product") {
    Hypersurface hs(prod_s3_chart());
    CHECK(jacobi_operator(hs, Expression(1.0), kS3Point).max_abs() <= 1e-10);
  }
  SUBCASE("tau == 1 on R x (S^2 x S^1): forced cancellation") {
    Hypersurface hs(prod_s2s1_chart());
    CHECK(jacobi_operator(hs, Expression(1.0), kS2S1Point).max_abs() <= 1e-10);
  }
  SUBCASE("tau = e^z on R x (S^2 x S^1): nonzero symmetric trace-free") {
    Hypersurface hs(prod_s2s1_chart());
    TensorValue v = jacobi_operator(hs, exp(var("z")), kS2S1Point);
    CHECK(v.max_abs() > 1e-3);
    TensorValue gbi = hs.intrinsic().inverse_at(kS2S1Point);
    CHECK(std::abs(trace_against(v, gbi)) <= 1e-10);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(v.at({a, b}) == doctest::Approx(v.at({b, a})).epsilon(1e-12));
  }
  SUBCASE("d = 3 is refused") {
    std::vector<Expression> g{Expression(1.0), Expression(0.0), Expression(0.0),
                              Expression(1.0)};
    Hypersurface hs(normal_form_chart({"x", "y"}, g));
    CHECK_THROWS_AS(jacobi_operator(hs, Expression(1.0),
                                    Point{{"x", 0.1}, {"y", 0.2}}),
                    ConformalError);
  }
}

TEST_CASE("extended third conformal form") {
  SUBCASE("reduces to IIIo on Sigma (non-Einstein d = 6 fiber)") {
    Hypersurface hs(prod_s2s3_chart());
    Point p{{"th", 0.8}, {"ph", 0.4}, {"a", 0.9}, {"b", 0.7}, {"w", 0.2}};
    Point off = p;
    off["s"] = 0.0;
    WeightedForm ext = extended_third_ff(hs, var("s"), off);
    WeightedForm iii = third_conformal_ff(hs, p);
    REQUIRE(iii.value.max_abs() > 1e-3);
    CHECK(max_abs_diff(ext.value, iii.value) <= 1e-10);
  }
  SUBCASE("R x S^5 with the sinh defining density: zero off Sigma") {
    Hypersurface hs(prod_s5_chart());
    Expression s = var("s");
    Expression sigma = s + s * s * s / 6.0 + pow(s, 5.0) / 120.0;
    Point p{{"s", 0.1}, {"c", 0.7}, {"t1", 0.8}, {"t2", 0.9},
            {"t3", 0.6}, {"t4", 0.3}};
    CHECK(extended_third_ff(hs, sigma, p).value.max_abs() <= 1e-8);
  }
  SUBCASE("flat d = 6, sigma = s: zero anywhere") {
    std::vector<Expression> g(25, Expression(0.0));
    for (int i = 0; i < 5; ++i)
      g[static_cast<std::size_t>(i) * 5 + i] = Expression(1.0);
    Hypersurface hs(normal_form_chart({"x1", "x2", "x3", "x4", "x5"}, g, "s"));
    Point p{{"s", 0.4}, {"x1", 0.1}, {"x2", 0.2}, {"x3", 0.3},
            {"x4", -0.2}, {"x5", 0.5}};
    CHECK(extended_third_ff(hs, var("s"), p).value.max_abs() <= 1e-12);
  }
  SUBCASE("d < 6 is refused") {
    Hypersurface hs(prod_s3_chart());
    Point p = kS3Point;
    p["t"] = 0.0;
    CHECK_THROWS_AS(extended_third_ff(hs, var("t"), p), ConformalError);
  }
}
