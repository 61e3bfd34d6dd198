#pragma once

#include <vector>

#include "cdflow/curve.hpp"
#include "cdflow/flow.hpp"

namespace cdflow {

class ShrinkerError : public CurveError {
 public:
  using CurveError::CurveError;
};

struct ShrinkerResidual {
  ScalarField pointwise;  // <eta, nu> - 4 k_ss on the quadrature grid
  double l2_norm = 0.0;
  double linf_norm = 0.0;
  double support_l2 = 0.0;  // ||<eta, nu>||_2, the scale for relative residuals
  double scale_used = 1.0;

  double relative() const { return support_l2 > 0.0 ? l2_norm / support_l2 : l2_norm; }
};

/// Residual of <eta, nu> = 4 k_ss for the centroid-translated curve.
ShrinkerResidual shrinker_residual(const ClosedCurve& curve);

struct ScaleSearchResult {
  double a_star = 0.0;
  ShrinkerResidual residual_at_star;
  bool reversed = false;  // the orientation-reversed curve gave the smaller residual
  int evaluations = 0;
};

/// Golden-section minimization of the residual l2 norm over uniform scalings
/// a * base with a in [a_lo, a_hi]. A coarse scan must show an interior
/// minimum, otherwise ShrinkerError is thrown.
ScaleSearchResult scale_search(const ClosedCurve& base, double a_lo, double a_hi, double tolerance = 1e-8);

/// Centroid-translated curve scaled by (T - t)^(-1/4).
ClosedCurve rescale_parabolic(const ClosedCurve& curve, double T, double t);

struct TypeIDiagnostic {
  std::vector<double> times;
  std::vector<double> samples;  // ||k||_2^2 (T - t)^(1/4)
  double C_est = 0.0;
  double T_used = 0.0;
};

/// ||k||_2^2 is recovered from the trace as (K_osc + (2 omega pi)^2) / L.
TypeIDiagnostic type_one_diagnostic(const FlowTrace& trace, double T);

/// C_est for T in {T (1 - spread), T, T (1 + spread)}, clipped to T >= last row time.
std::vector<TypeIDiagnostic> type_one_sensitivity(const FlowTrace& trace, double T, double spread = 0.05);

}  // namespace cdflow
