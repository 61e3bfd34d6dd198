#pragma once

#include <vector>

#include "cdflow/curve.hpp"

namespace cdflow {

inline constexpr int kMaxMoment = 8;
inline constexpr double kIdentityTolerance = 1e-7;
// Arclength coefficients below this fraction of the largest are zeroed.
inline constexpr double kSpectralNoise = 1e-14;

/// Coefficients of a closed curve in the orthonormal arclength basis
/// c_p(s) = L^{-1/2} e^{2 i omega pi p s / L}.
///
/// Coefficients are stored by integer frequency n = -band..band of
/// e^{2 pi i n s / L}; the basis index is p = n / omega, which is an integer
/// whenever the spectrum is supported on multiples of omega (always for
/// omega = +-1).
struct Spectrum {
  std::vector<Complex> coeffs;
  int band = 0;
  double length = 0.0;
  int winding = 0;
  bool resolved = true;

  Complex at(int n) const;
  double index(int n) const { return static_cast<double>(n) / winding; }
  /// |coeff(+-band)| / max |coeff|.
  double tail_ratio() const;
  /// Tail contribution to the q-th moment, relative to the moment itself.
  double moment_tail(int q) const;
};

/// Spectrum in the arclength basis; band = 0 selects 2N. `resolved` is
/// decided before coefficients below kSpectralNoise * max are zeroed.
Spectrum spectrum_of(const ClosedCurve& curve, int band = 0);

/// sum_p p^q |gamma_hat(p)|^2 over the band.
double series_moment(const Spectrum& spec, int q);

/// Curvature-integral side of the moment identity for q = 1..8:
///   q=1: L A / (omega pi),  q=2,3: L^3/(2 omega pi)^2,
///   q>=4: (L/2 omega pi)^q times the integral of
///   k^2, k^3, k^4 + k_s^2, k^5 + 5 k k_s^2, k^6 + 15 k^2 k_s^2 + k_ss^2.
double integral_moment(const ClosedCurve& curve, int q);

/// Moment evaluated from integral k Q_{q-1} ds with Q built by the recursion
/// Q_{j+1} = i k Q_j + dQ_j/ds, Q_1 = gamma conj(gamma_s).
double recursion_moment(const ClosedCurve& curve, int q);

/// Relative disagreement between the recursive Q_{q-1} and the direct
/// product (d^{q-2}gamma/ds^{q-2}) conj(gamma_s), measured on integral k Q ds.
double q_field_crosscheck(const ClosedCurve& curve, int q);

struct IdentityReport {
  int q = 0;
  double series_side = 0.0;
  double integral_side = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;  // |series - integral| / max(1, |integral|)
  bool resolved = true;

  bool passed(double tolerance = kIdentityTolerance) const { return rel_residual < tolerance; }
};

IdentityReport verify_identity(const ClosedCurve& curve, int q);
/// All q = 1..8 sharing one spectrum and one sampling.
std::vector<IdentityReport> verify_identities(const ClosedCurve& curve);

/// D = (2 omega pi)^2 / L sum p(p-1) |gamma_hat|^2.
double series_defect(const Spectrum& spec);
/// K_osc = (2 omega pi)^4 / L^3 sum p^2(p^2-1) |gamma_hat|^2.
double series_oscillation(const Spectrum& spec);
/// K_osc = (2 omega pi)^4 / L^3 sum p^3(p-1) |gamma_hat|^2.
double series_oscillation_cubic(const Spectrum& spec);

/// lhs <= rhs + 1e-8 max(1, rhs) is the verdict for every inequality check.
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;

  double slack() const { return rhs - lhs; }
  bool holds() const;
};

/// 16 D^2 / L^4 <= K_osc.
InequalityCheck lower_estimate(const ClosedCurve& curve);
/// D <= (L^2/4) ||k - kbar||_1 on the centroid-translated curve.
InequalityCheck lower_estimate_l1(const ClosedCurve& curve);
/// K_osc^2 <= L D (||k_s||_2^2 + L^{-1/2} ||k||_6^3 K_osc^{1/2}).
InequalityCheck holder_chain(const ClosedCurve& curve);

struct EqApp2Check : InequalityCheck {
  /// (2 omega pi / L)^8 sum p^8 |gamma_hat|^2, which equals rhs + lhs.
  double series_total = 0.0;
  double cross_residual = 0.0;  // |rhs + lhs - series_total| / max(1, series_total)
};

/// lhs = 15 integral k^2 k_s^2 ds, rhs = integral k^6 + k_ss^2 ds.
EqApp2Check check_eqapp2(const ClosedCurve& curve);

struct CounterexampleResult {
  double sup_deviation = 0.0;  // sup |<gamma,nu> - (1/L) integral <gamma,nu> ds|
  double length = 0.0;
};

/// Unit circle centred at (offset, 0).
CounterexampleResult counterexample_remark(double offset);

}  // namespace cdflow
