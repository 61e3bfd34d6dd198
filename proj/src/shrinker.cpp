#include "cdflow/shrinker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cdflow {

using std::numbers::pi;

ShrinkerResidual shrinker_residual(const ClosedCurve& curve) {
  const auto centred = translate_to_centroid(curve);
  const auto samples = sample_curve(centred, 2);
  ShrinkerResidual out;
  out.pointwise.samples.resize(samples.size());
  out.pointwise.weights = samples.ds;
  out.pointwise.length = samples.length;
  double support = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const Complex g = samples.position[j];
    const Complex nu = samples.normal[j];
    const double h = g.real() * nu.real() + g.imag() * nu.imag();
    out.pointwise.samples[j] = h - 4.0 * samples.curvature[2][j];
    support += h * h * samples.ds[j];
  }
  out.l2_norm = out.pointwise.l2_norm();
  out.linf_norm = out.pointwise.linf_norm();
  out.support_l2 = std::sqrt(support);
  return out;
}

namespace {

double residual_at(const ClosedCurve& base, double a, int& evaluations) {
  ++evaluations;
  return shrinker_residual(base.scaled(a)).l2_norm;
}

// Golden section on a bracket already known to contain an interior minimum.
double golden(const ClosedCurve& base, double lo, double hi, double tolerance, int& evaluations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = residual_at(base, x1, evaluations);
  double f2 = residual_at(base, x2, evaluations);
  while (hi - lo > tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = residual_at(base, x1, evaluations);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = residual_at(base, x2, evaluations);
    }
  }
  return 0.5 * (lo + hi);
}

ScaleSearchResult search_one(const ClosedCurve& base, double a_lo, double a_hi, double tolerance) {
  constexpr int kScan = 48;
  ScaleSearchResult out;
  // Geometric scan: the residual mixes a and a^-3 terms.
  std::vector<double> grid(kScan + 1), value(kScan + 1);
  for (int i = 0; i <= kScan; ++i) {
    grid[i] = a_lo * std::pow(a_hi / a_lo, static_cast<double>(i) / kScan);
    value[i] = residual_at(base, grid[i], out.evaluations);
  }
  const auto best = static_cast<int>(std::min_element(value.begin(), value.end()) - value.begin());
  if (best == 0 || best == kScan) {
    throw ShrinkerError("residual has no interior minimum on [" + std::to_string(a_lo) + ", " +
                        std::to_string(a_hi) + "]");
  }
  int local_minima = 0;
  for (int i = 1; i < kScan; ++i) local_minima += value[i] < value[i - 1] && value[i] <= value[i + 1];
  if (local_minima != 1) throw ShrinkerError("residual is not unimodal on the bracket");
  out.a_star = golden(base, grid[best - 1], grid[best + 1], tolerance, out.evaluations);
  out.residual_at_star = shrinker_residual(base.scaled(out.a_star));
  out.residual_at_star.scale_used = out.a_star;
  return out;
}

}  // namespace

ScaleSearchResult scale_search(const ClosedCurve& base, double a_lo, double a_hi, double tolerance) {
  if (!(a_lo > 0.0 && a_lo < a_hi)) throw std::invalid_argument("bracket must satisfy 0 < a_lo < a_hi");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  auto forward = search_one(base, a_lo, a_hi, tolerance);
  auto backward = search_one(base.reversed(), a_lo, a_hi, tolerance);
  backward.reversed = true;
  backward.evaluations += forward.evaluations;
  forward.evaluations = backward.evaluations;
  return backward.residual_at_star.l2_norm < forward.residual_at_star.l2_norm ? backward : forward;
}

ClosedCurve rescale_parabolic(const ClosedCurve& curve, double T, double t) {
  if (!(t < T)) throw std::invalid_argument("rescaling needs t < T");
  return translate_to_centroid(curve).scaled(std::pow(T - t, -0.25));
}

TypeIDiagnostic type_one_diagnostic(const FlowTrace& trace, double T) {
  if (trace.termination != Termination::singularity) {
    throw std::invalid_argument("Type I diagnostic needs a trace ending in a singularity");
  }
  if (trace.rows.empty() || !(T >= trace.rows.back().t)) {
    throw std::invalid_argument("T must not precede the last trace time");
  }
  TypeIDiagnostic out;
  out.T_used = T;
  const double turning = 2.0 * trace.winding * pi;
  for (const auto& r : trace.rows) {
    const double k2 = (r.oscillation + turning * turning) / r.length;
    const double value = k2 * std::pow(T - r.t, 0.25);
    out.times.push_back(r.t);
    out.samples.push_back(value);
    out.C_est = std::max(out.C_est, value);
  }
  return out;
}

std::vector<TypeIDiagnostic> type_one_sensitivity(const FlowTrace& trace, double T, double spread) {
  std::vector<TypeIDiagnostic> out;
  const double last = trace.rows.empty() ? 0.0 : trace.rows.back().t;
  for (double f : {1.0 - spread, 1.0, 1.0 + spread}) out.push_back(type_one_diagnostic(trace, std::max(T * f, last)));
  return out;
}

}  // namespace cdflow
