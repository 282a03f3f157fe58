#pragma once

// Conformal rescaling and the conformal fundamental forms. A k-th conformal
// form carries weight 3-k: under g -> Omega^2 g its entries at Sigma scale by
// Omega^{3-k}. Implemented forms:
//   IIo   = trace-free part of II                      (k = 2, weight 1)
//   IIIo  = tangential W(n,.,.,n)|_Sigma               (k = 3, weight 0)
//   IIIo^e = W_{n^ a b n^} + 2 sigma C_{n^(ab)} - sigma^2/(d-4) B_ab,
//            n^ = d(sigma) -- an extension of IIIo off Sigma, d >= 6.
// Plus the Gauss-type Schouten identity residual
//   IIo^2_((ab))o - W_{nabn} - (d-3)(tf P^T - tf Pbar + H IIo)
// used as a cross-module oracle, and the Jacobi-like operator
//   (tf Hess + tf Pbar - (d-2)/(d-3) IIIo) tau.
//
// Weights are stored as explicit tags and verified empirically by double
// evaluation under rescale rather than trusted.

#include <optional>
#include <string>

#include "geoforms/hypersurface.hpp"

namespace geoforms {

class ConformalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Symmetric 2-tensor on Sigma with its conformal weight bookkeeping.
struct WeightedForm {
  TensorValue value;
  double weight = 0.0;
  bool trace_free = false;
  std::string representative;  // which metric representative the entries use
  // For product inputs, (d-3)/(d-2) * tf(Schouten of gbar): the closed form
  // IIIo must equal on products.
  std::optional<TensorValue> product_comparison;
};

// Components Omega^2 g_ab; leaves strict normal form unless Omega == 1, so
// downstream consumers get the generalized-chart pathway with conormal
// (1/(Omega f)) d/dt at Sigma. Omega <= 0 is caught at evaluation time.
Chart rescale(const Chart& chart, const Expression& omega);

// IIo: trace-free second fundamental form, weight 1.
WeightedForm trace_free_second_ff(Hypersurface& hs, const Point& p);

// IIIo: tangentially projected W(n,.,.,n)|_Sigma, weight 0. Requires d >= 4;
// for d = 3 the Weyl tensor vanishes identically and the form is reported as
// structurally zero. When II vanishes at p (product input) the
// product_comparison field carries (d-3)/(d-2) * tf(Pbar).
WeightedForm third_conformal_ff(Hypersurface& hs, const Point& p);

// IIIo^e evaluated with n^_a = grad_a sigma at a point possibly off Sigma
// (the point must bind the transverse coordinate). Requires d >= 6; at
// points on Sigma (sigma = 0) it reduces to IIIo exactly.
WeightedForm extended_third_ff(Hypersurface& hs, const Expression& sigma,
                               const Point& p);

// Residual of the Gauss-type Schouten identity; zero for valid embeddings.
TensorValue gauss_schouten_residual(Hypersurface& hs, const Point& p);

// (tf Hess_bar + tf Pbar - (d-2)/(d-3) IIIo) tau at p; trace-free symmetric.
// Refused for d = 3 (division by d-3).
TensorValue jacobi_operator(Hypersurface& hs, const Expression& tau,
                            const Point& p);

}  // namespace geoforms
