#include "geoforms/yamabe.hpp"

#include <algorithm>
#include <cmath>

namespace geoforms {

SeriesInS::SeriesInS(int truncation) : trunc_(truncation) {
  if (truncation < 0) throw YamabeError("series truncation must be >= 0");
  c_.assign(static_cast<std::size_t>(truncation) + 1, Expression());
}

const Expression& SeriesInS::coeff(int j) const {
  if (j < 0 || j > trunc_)
    throw YamabeError("series coefficient index out of range");
  return c_[static_cast<std::size_t>(j)];
}

void SeriesInS::set_coeff(int j, Expression e) {
  if (j < 0 || j > trunc_)
    throw YamabeError("series coefficient index out of range");
  c_[static_cast<std::size_t>(j)] = std::move(e);
}

bool SeriesInS::coeff_is_structural_zero(int j) const {
  return coeff(j).is_constant(0.0);
}

Expression SeriesInS::to_expression(const std::string& s_name) const {
  Expression s = Expression::variable(s_name);
  Expression out;
  Expression power(1.0);
  for (int j = 0; j <= trunc_; ++j) {
    out = out + c_[static_cast<std::size_t>(j)] * power;
    power = power * s;
  }
  return out;
}

double SeriesInS::evaluate(double s, const Point& sigma_point) const {
  Evaluator ev(sigma_point);
  double out = 0.0;
  double power = 1.0;
  for (int j = 0; j <= trunc_; ++j) {
    out += ev(c_[static_cast<std::size_t>(j)]) * power;
    power *= s;
  }
  return out;
}

SeriesInS series_s(int truncation) {
  SeriesInS out(truncation);
  if (truncation >= 1) out.set_coeff(1, Expression(1.0));
  return out;
}

SeriesInS add(const SeriesInS& a, const SeriesInS& b) {
  SeriesInS out(std::min(a.truncation(), b.truncation()));
  for (int j = 0; j <= out.truncation(); ++j)
    out.set_coeff(j, a.coeff(j) + b.coeff(j));
  return out;
}

SeriesInS sub(const SeriesInS& a, const SeriesInS& b) {
  SeriesInS out(std::min(a.truncation(), b.truncation()));
  for (int j = 0; j <= out.truncation(); ++j)
    out.set_coeff(j, a.coeff(j) - b.coeff(j));
  return out;
}

SeriesInS mul(const SeriesInS& a, const SeriesInS& b) {
  SeriesInS out(std::min(a.truncation(), b.truncation()));
  for (int k = 0; k <= out.truncation(); ++k) {
    Expression acc;
    for (int i = 0; i <= k; ++i) acc = acc + a.coeff(i) * b.coeff(k - i);
    out.set_coeff(k, acc);
  }
  return out;
}

SeriesInS scale(const SeriesInS& a, const Expression& f) {
  SeriesInS out(a.truncation());
  for (int j = 0; j <= a.truncation(); ++j) out.set_coeff(j, f * a.coeff(j));
  return out;
}

SeriesInS deriv_s(const SeriesInS& a) {
  if (a.truncation() < 1) throw YamabeError("cannot differentiate an order-0 series");
  SeriesInS out(a.truncation() - 1);
  for (int j = 0; j <= out.truncation(); ++j)
    out.set_coeff(j, static_cast<double>(j + 1) * a.coeff(j + 1));
  return out;
}

SeriesInS yamabe_residual(const SeriesInS& sigma, MetricWorkspace& fiber,
                          int d) {
  if (d != fiber.dim() + 1)
    throw YamabeError("d must equal fiber dimension + 1");
  if (d < 3) throw YamabeError("singular Yamabe solver requires d >= 3");
  const int n = sigma.truncation();
  if (n < 2) throw YamabeError("series truncation too small for the residual");
  const int nr = n - 2;  // all terms below are exact through this order
  const int ds = fiber.dim();

  Expression jexpr = fiber.scalar_curvature() /
                     (2.0 * static_cast<double>(d - 1));

  // (d sigma/ds)^2
  SeriesInS dsig = deriv_s(sigma);
  SeriesInS dsq = mul(dsig, dsig);

  // |grad-bar sigma|^2: coefficient k = sum_{i+j=k} gbar^{ab} d_a c_i d_b c_j
  std::vector<std::vector<Expression>> grads(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    grads[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(ds));
    for (int a = 0; a < ds; ++a)
      grads[static_cast<std::size_t>(i)].push_back(fiber.deriv(sigma.coeff(i), a));
  }
  SeriesInS gsq(nr);
  for (int k = 0; k <= nr; ++k) {
    Expression acc;
    for (int i = 0; i <= k; ++i)
      for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b)
          acc = acc + fiber.inverse_component(a, b) *
                          grads[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] *
                          grads[static_cast<std::size_t>(k - i)][static_cast<std::size_t>(b)];
    gsq.set_coeff(k, acc);
  }

  // Delta sigma = sigma'' + Laplacian-bar of the coefficients
  SeriesInS lap(nr);
  for (int j = 0; j <= nr; ++j)
    lap.set_coeff(j, static_cast<double>((j + 2) * (j + 1)) * sigma.coeff(j + 2) +
                         fiber.laplacian(sigma.coeff(j)));

  SeriesInS inner = add(lap, scale(sigma, jexpr));
  SeriesInS out = add(dsq, gsq);
  out = sub(out, scale(mul(sigma, inner), Expression(2.0 / static_cast<double>(d))));
  out.set_coeff(0, out.coeff(0) - 1.0);
  return out;
}

YamabeSolution solve_series(MetricWorkspace& fiber, int target_order) {
  const int d = fiber.dim() + 1;
  if (d < 3) throw YamabeError("singular Yamabe solver requires d >= 3");
  const bool even = (d % 2 == 0);
  if (target_order < 0) target_order = even ? d - 1 : 7;
  if (even && target_order > d - 1) target_order = d - 1;  // determinacy bound
  const int n = even ? d + 2 : std::max(9, target_order + 2);
  // The last step reads the residual at order target_order - 1, which must
  // lie within the exactly-known part of the residual series.
  if (target_order - 1 > n - 2)
    throw YamabeError("requested order exceeds truncation capacity");

  YamabeSolution sol{series_s(n), std::nullopt, 1};
  for (int ell0 = 0;; ++ell0) {
    const int res_order = 2 * ell0 + 2;
    const int phi_order = 2 * ell0 + 3;
    const bool obstruction = even && res_order == d;
    if (!obstruction && phi_order > target_order) break;
    SeriesInS res = yamabe_residual(sol.sigma, fiber, d);
    Expression psi = res.coeff(res_order);
    if (obstruction) {
      sol.willmore = psi;
      break;
    }
    double c = -static_cast<double>(d) /
               (2.0 * phi_order * static_cast<double>(d - res_order));
    sol.sigma.set_coeff(phi_order, c * psi);
    sol.solved_order = phi_order;
  }
  return sol;
}

ClosedFormSigma closed_form_sigma(double scbar, int d, int truncation) {
  if (d < 3) throw YamabeError("closed form requires d >= 3");
  if (truncation < 1) throw YamabeError("truncation must be >= 1");
  ClosedFormSigma out{SigmaBranch::Linear, 1.0, 0.0, SeriesInS(truncation)};
  if (scbar == 0.0) {
    out.series = series_s(truncation);
    return out;
  }
  double r = std::sqrt(std::abs(scbar) /
                       (static_cast<double>(d - 1) * static_cast<double>(d - 2)));
  out.branch = scbar < 0.0 ? SigmaBranch::Sin : SigmaBranch::Sinh;
  out.rate = r;
  out.amplitude = 1.0 / r;
  // A (+-1)^m r^{2m+1} / (2m+1)! = (+-1)^m r^{2m} / (2m+1)! since A r = 1.
  for (int m = 0; 2 * m + 1 <= truncation; ++m) {
    double sign = (out.branch == SigmaBranch::Sin && m % 2 == 1) ? -1.0 : 1.0;
    double c = sign * std::pow(r, 2 * m) / std::tgamma(2.0 * m + 2.0);
    out.series.set_coeff(2 * m + 1, Expression(c));
  }
  return out;
}

TensorValue pe_residual(MetricWorkspace& ambient, const Expression& sigma,
                        const Point& p) {
  Evaluator ev(p);
  TensorValue g = ambient.metric_at(p);
  TensorValue gi = ambient.inverse_at(p);
  TensorValue hess = ambient.eval_field(ambient.hessian(sigma), ev);
  TensorValue tfh = symmetrize_tf(hess, g, gi);
  TensorValue ps = ambient.eval_field(ambient.schouten_field(), ev);
  TensorValue tfp = symmetrize_tf(ps, g, gi);
  return add(tfh, scale(tfp, ev(sigma)));
}

double pe_schouten_identity_deviation(MetricWorkspace& ambient, double scbar,
                                      const Point& p) {
  const int d = ambient.dim();
  if (d < 3) throw YamabeError("Schouten identity requires d >= 3");
  Evaluator ev(p);
  TensorValue g = ambient.metric_at(p);
  TensorValue gi = ambient.inverse_at(p);
  TensorValue ps = ambient.eval_field(ambient.schouten_field(), ev);
  TensorValue tfp = symmetrize_tf(ps, g, gi);
  // (Sc / (d(d-2))) (gbar/(d-1) - n x n), n = ds (the first coordinate) and
  // gbar the tangential block (zero in the transverse slots).
  TensorValue target(d, {Slot::Down, Slot::Down});
  double c = scbar / (static_cast<double>(d) * static_cast<double>(d - 2));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double v = (a > 0 && b > 0) ? g.at({a, b}) / static_cast<double>(d - 1)
                                  : 0.0;
      if (a == 0 && b == 0) v -= 1.0;
      target.set({a, b}, c * v);
    }
  return max_abs_diff(tfp, target);
}

}  // namespace geoforms
