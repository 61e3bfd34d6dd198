#include "cdflow/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cdflow {

using std::numbers::pi;

namespace {

void require_moment_order(int q) {
  if (q < 1 || q > kMaxMoment) throw std::invalid_argument("moment order q must lie in 1..8");
}

void require_winding(int winding) {
  if (winding == 0) throw CurveError("the arclength Fourier basis needs a nonzero winding number");
}

// Identity integrands are products of up to six curvature factors; sample
// them on twice the default grid.
std::size_t identity_grid(const ClosedCurve& curve) { return 2 * default_grid(curve.n_modes()); }

double weighted_sum(const Spectrum& spec, auto&& weight) {
  double sum = 0.0;
  for (int n = -spec.band; n <= spec.band; ++n) sum += weight(spec.index(n)) * std::norm(spec.at(n));
  return sum;
}

struct CurvatureIntegrals {
  double length = 0.0;
  double area = 0.0;
  int winding = 0;
  double k2 = 0.0, k3 = 0.0, k4 = 0.0, k6 = 0.0;
  double ks2 = 0.0, kks2 = 0.0, kk5 = 0.0, k2ks2 = 0.0, kss2 = 0.0;
};

CurvatureIntegrals curvature_integrals(const ClosedCurve& curve) {
  const auto s = sample_curve(curve, 2, identity_grid(curve));
  CurvatureIntegrals out;
  out.length = s.length;
  out.area = signed_area(s);
  out.winding = curve.winding();
  const auto& k = s.curvature[0];
  const auto& ks = s.curvature[1];
  const auto& kss = s.curvature[2];
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double w = s.ds[j];
    const double k2 = k[j] * k[j];
    const double ks2 = ks[j] * ks[j];
    out.k2 += k2 * w;
    out.k3 += k2 * k[j] * w;
    out.k4 += k2 * k2 * w;
    out.k6 += k2 * k2 * k2 * w;
    out.ks2 += ks2 * w;
    out.kks2 += k[j] * ks2 * w;
    out.kk5 += k2 * k2 * k[j] * w;
    out.k2ks2 += k2 * ks2 * w;
    out.kss2 += kss[j] * kss[j] * w;
  }
  return out;
}

double integral_side(const CurvatureIntegrals& c, int q) {
  const double omega = c.winding;
  const double l = c.length;
  const double ratio = l / (2.0 * omega * pi);
  switch (q) {
    case 1: return l * c.area / (omega * pi);
    case 2:
    case 3: return l * ratio * ratio;
    case 4: return std::pow(ratio, 4) * c.k2;
    case 5: return std::pow(ratio, 5) * c.k3;
    case 6: return std::pow(ratio, 6) * (c.k4 + c.ks2);
    case 7: return std::pow(ratio, 7) * (c.kk5 + 5.0 * c.kks2);
    case 8: return std::pow(ratio, 8) * (c.k6 + 15.0 * c.k2ks2 + c.kss2);
    default: throw std::invalid_argument("moment order q must lie in 1..8");
  }
}

IdentityReport make_report(int q, double series, double integral, bool resolved) {
  IdentityReport r;
  r.q = q;
  r.series_side = series;
  r.integral_side = integral;
  r.abs_residual = std::abs(series - integral);
  r.rel_residual = r.abs_residual / std::max(1.0, std::abs(integral));
  r.resolved = resolved;
  return r;
}

// Arclength-parametrized copy of the centred curve carrying `band` modes,
// sampled on a uniform arclength grid.
struct ArclengthFrame {
  ClosedCurve curve;
  CurveSamples samples;
};

ArclengthFrame arclength_frame(const ClosedCurve& curve) {
  const auto centred = translate_to_centroid(curve);
  const int band = 2 * curve.n_modes();
  ClosedCurve arc(arclength_coefficients(centred, band));
  auto samples = sample_curve(arc, 0, 2 * default_grid(band));
  return {std::move(arc), std::move(samples)};
}

std::vector<Complex> recursive_q(const CurveSamples& s, int order) {
  std::vector<Complex> q(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) q[j] = s.position[j] * std::conj(s.tangent[j]);
  const auto& k = s.curvature[0];
  for (int level = 1; level < order; ++level) {
    auto dq = s.d_ds(q);
    for (std::size_t j = 0; j < s.size(); ++j) q[j] = Complex(0.0, k[j]) * q[j] + dq[j];
  }
  return q;
}

std::vector<Complex> direct_q(const ArclengthFrame& frame, int order) {
  const auto& s = frame.samples;
  const double scale = 2.0 * pi / s.length;
  auto deriv = synthesize(frame.curve.modes(), s.size(), order - 1);
  const double factor = std::pow(scale, order - 1);
  std::vector<Complex> q(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) q[j] = factor * deriv[j] * std::conj(s.tangent[j]);
  return q;
}

Complex integrate_k_times(const CurveSamples& s, const std::vector<Complex>& field, bool with_k) {
  Complex sum{};
  for (std::size_t j = 0; j < s.size(); ++j) sum += (with_k ? s.curvature[0][j] : 1.0) * field[j] * s.ds[j];
  return sum;
}

}  // namespace

Complex Spectrum::at(int n) const {
  if (n < -band || n > band) return {};
  return coeffs[static_cast<std::size_t>(n + band)];
}

double Spectrum::tail_ratio() const {
  double peak = 0.0;
  for (const auto& c : coeffs) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(coeffs.front()), std::abs(coeffs.back())) / peak;
}

double Spectrum::moment_tail(int q) const {
  const double edge = std::max(std::norm(coeffs.front()), std::norm(coeffs.back()));
  const double weight = std::pow(std::abs(index(band)), q);
  const double moment = std::abs(series_moment(*this, q));
  if (moment == 0.0) return edge == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return edge * weight / moment;
}

Spectrum spectrum_of(const ClosedCurve& curve, int band) {
  require_winding(curve.winding());
  const int b = band == 0 ? 2 * curve.n_modes() : band;
  auto unit = arclength_coefficients(curve, b);
  const auto s = sample_curve(curve, 0);
  const double root = std::sqrt(s.length);
  for (auto& c : unit) c *= root;
  Spectrum spec{std::move(unit), b, s.length, curve.winding(), true};
  spec.resolved = spec.tail_ratio() < kResolvedTail;
  // Quadrature noise would otherwise be amplified by p^q in high moments.
  double peak = 0.0;
  for (const auto& c : spec.coeffs) peak = std::max(peak, std::abs(c));
  for (auto& c : spec.coeffs) {
    if (std::abs(c) < kSpectralNoise * peak) c = 0.0;
  }
  return spec;
}

double series_moment(const Spectrum& spec, int q) {
  require_moment_order(q);
  return weighted_sum(spec, [q](double p) { return std::pow(p, q); });
}

double integral_moment(const ClosedCurve& curve, int q) {
  require_moment_order(q);
  require_winding(curve.winding());
  return integral_side(curvature_integrals(curve), q);
}

double recursion_moment(const ClosedCurve& curve, int q) {
  require_moment_order(q);
  require_winding(curve.winding());
  const auto frame = arclength_frame(curve);
  const double ratio = frame.samples.length / (2.0 * curve.winding() * pi);
  if (q == 1) {
    const auto q1 = recursive_q(frame.samples, 1);
    return (Complex(0.0, ratio) * integrate_k_times(frame.samples, q1, false)).real();
  }
  const auto field = recursive_q(frame.samples, q - 1);
  // i^{-q-1} (L / 2 omega pi)^q integral k Q_{q-1} ds
  const Complex prefactor = std::pow(Complex(0.0, 1.0), -(q + 1)) * std::pow(ratio, q);
  return (prefactor * integrate_k_times(frame.samples, field, true)).real();
}

double q_field_crosscheck(const ClosedCurve& curve, int q) {
  require_moment_order(q);
  const auto frame = arclength_frame(curve);
  const int order = std::max(1, q - 1);
  const auto rec = recursive_q(frame.samples, order);
  const auto dir = direct_q(frame, order);
  const bool with_k = q > 1;
  const Complex a = integrate_k_times(frame.samples, rec, with_k);
  const Complex b = integrate_k_times(frame.samples, dir, with_k);
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

IdentityReport verify_identity(const ClosedCurve& curve, int q) {
  require_moment_order(q);
  const auto spec = spectrum_of(curve);
  const auto integrals = curvature_integrals(curve);
  const bool resolved = spec.resolved && (q < 7 || spec.moment_tail(q) < 1e-8);
  return make_report(q, series_moment(spec, q), integral_side(integrals, q), resolved);
}

std::vector<IdentityReport> verify_identities(const ClosedCurve& curve) {
  const auto spec = spectrum_of(curve);
  const auto integrals = curvature_integrals(curve);
  std::vector<IdentityReport> out;
  for (int q = 1; q <= kMaxMoment; ++q) {
    const bool resolved = spec.resolved && (q < 7 || spec.moment_tail(q) < 1e-8);
    out.push_back(make_report(q, series_moment(spec, q), integral_side(integrals, q), resolved));
  }
  return out;
}

double series_defect(const Spectrum& spec) {
  const double omega = spec.winding;
  const double c = 2.0 * omega * pi;
  return c * c / spec.length * weighted_sum(spec, [](double p) { return p * (p - 1.0); });
}

double series_oscillation(const Spectrum& spec) {
  const double c = 2.0 * spec.winding * pi;
  return std::pow(c, 4) / std::pow(spec.length, 3) *
         weighted_sum(spec, [](double p) { return p * p * (p * p - 1.0); });
}

double series_oscillation_cubic(const Spectrum& spec) {
  const double c = 2.0 * spec.winding * pi;
  return std::pow(c, 4) / std::pow(spec.length, 3) *
         weighted_sum(spec, [](double p) { return p * p * p * (p - 1.0); });
}

bool InequalityCheck::holds() const { return lhs <= rhs + 1e-8 * std::max(1.0, std::abs(rhs)); }

InequalityCheck lower_estimate(const ClosedCurve& curve) {
  const auto r = geometric_report(curve, 0);
  const double l2 = r.length * r.length;
  return {16.0 * r.defect * r.defect / (l2 * l2), r.oscillation};
}

InequalityCheck lower_estimate_l1(const ClosedCurve& curve) {
  const auto centred = translate_to_centroid(curve);
  const auto s = sample_curve(centred, 0);
  const double l = s.length;
  const double kbar = 2.0 * curve.winding() * pi / l;
  double l1 = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) l1 += std::abs(s.curvature[0][j] - kbar) * s.ds[j];
  const double defect = l * l - 4.0 * curve.winding() * pi * signed_area(s);
  return {defect, 0.25 * l * l * l1};
}

InequalityCheck holder_chain(const ClosedCurve& curve) {
  const auto c = curvature_integrals(curve);
  const double l = c.length;
  const double kbar = 2.0 * c.winding * pi / l;
  const double defect = l * l - 4.0 * c.winding * pi * c.area;
  // K_osc = L (int k^2 - L kbar^2)
  const double osc = std::max(0.0, l * (c.k2 - l * kbar * kbar));
  const double k6_cubed = std::sqrt(c.k6);  // ||k||_6^3
  return {osc * osc, l * defect * (c.ks2 + k6_cubed * std::sqrt(osc / l))};
}

EqApp2Check check_eqapp2(const ClosedCurve& curve) {
  const auto c = curvature_integrals(curve);
  EqApp2Check out;
  out.lhs = 15.0 * c.k2ks2;
  out.rhs = c.k6 + c.kss2;
  if (curve.winding() != 0) {
    const auto spec = spectrum_of(curve);
    const double scale = 2.0 * curve.winding() * pi / c.length;
    out.series_total = std::pow(scale, 8) * series_moment(spec, 8);
    out.cross_residual = std::abs(out.rhs + out.lhs - out.series_total) / std::max(1.0, out.series_total);
  }
  return out;
}

CounterexampleResult counterexample_remark(double offset) {
  if (offset < 0.0) throw std::invalid_argument("offset must be non-negative");
  const auto circle = make_circle(1.0, 1, Complex(offset, 0.0), 16);
  const auto s = sample_curve(circle, 0);
  std::vector<double> support(s.size());
  double mean = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    support[j] = s.position[j].real() * s.normal[j].real() + s.position[j].imag() * s.normal[j].imag();
    mean += support[j] * s.ds[j];
  }
  mean /= s.length;
  CounterexampleResult out;
  out.length = s.length;
  for (double v : support) out.sup_deviation = std::max(out.sup_deviation, std::abs(v - mean));
  return out;
}

}  // namespace cdflow
