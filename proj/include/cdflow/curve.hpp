#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdflow/fft.hpp"

namespace cdflow {

/// Base class of all domain errors raised by the library.
class CurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampled map has (numerically) vanishing speed somewhere.
class NotImmersedError : public CurveError {
 public:
  using CurveError::CurveError;
};

/// Rejection sampling in random_curve exhausted its attempt budget.
class GenerationError : public CurveError {
 public:
  using CurveError::CurveError;
};

inline constexpr int kDefaultModes = 128;
inline constexpr int kMinModes = 8;
inline constexpr double kResolvedTail = 1e-10;
// Curves with min|d gamma/du| below this fraction of the mean speed are rejected.
inline constexpr double kImmersionFloor = 1e-6;

/// Closed immersed plane curve u -> sum_{p=-N..N} c_p e^{ipu}, u in [0, 2 pi),
/// identified with a complex-valued map. Immutable; construction validates
/// the immersion and measures the turning number.
class ClosedCurve {
 public:
  /// `modes` holds c_{-N}..c_{N}; its size must be odd and N >= kMinModes.
  explicit ClosedCurve(std::vector<Complex> modes);

  int n_modes() const { return n_modes_; }
  int winding() const { return winding_; }
  /// |(1/2 pi) integral k ds - winding|.
  double winding_discrepancy() const { return winding_discrepancy_; }

  std::span<const Complex> modes() const { return modes_; }
  Complex mode(int p) const;

  /// Point on the curve at parameter u (direct series evaluation).
  Complex evaluate(double u) const;

  /// |c_{+-N}| / max_p |c_p|.
  double tail_ratio() const;
  bool resolved(double threshold = kResolvedTail) const { return tail_ratio() < threshold; }

  ClosedCurve translated(Complex offset) const;
  ClosedCurve scaled(double factor) const;
  /// Same point set traversed backwards: u -> gamma(-u).
  ClosedCurve reversed() const;
  /// Zero-pads or truncates the spectrum to `n_modes`.
  ClosedCurve with_modes(int n_modes) const;

  bool operator==(const ClosedCurve& other) const = default;

 private:
  std::vector<Complex> modes_;
  int n_modes_ = 0;
  int winding_ = 0;
  double winding_discrepancy_ = 0.0;
};

/// Default quadrature grid for a curve with N modes.
std::size_t default_grid(int n_modes);

/// Geometry of a curve sampled on the uniform parameter grid u_j = 2 pi j / M.
/// Arclength derivatives are taken as (d/du)/|gamma_u| spectrally, so the
/// samples are valid in any parametrization; `ds` carries the quadrature
/// weights |gamma_u| 2 pi / M.
struct CurveSamples {
  std::vector<Complex> position;
  std::vector<Complex> tangent;  // unit tangent tau = d gamma/ds
  std::vector<Complex> normal;   // nu = i tau (tau rotated by +pi/2)
  std::vector<double> speed;     // |d gamma/du|
  std::vector<double> ds;
  /// curvature[m] = d^m k / ds^m on the grid.
  std::vector<std::vector<double>> curvature;
  double length = 0.0;

  std::size_t size() const { return position.size(); }
  double integrate(std::span<const double> field) const;
  /// Arclength derivative of a grid field.
  std::vector<double> d_ds(std::span<const double> field) const;
  std::vector<Complex> d_ds(std::span<const Complex> field) const;
};

/// Samples geometry and curvature derivatives up to `curvature_order`.
/// grid_size = 0 selects default_grid(curve.n_modes()).
CurveSamples sample_curve(const ClosedCurve& curve, int curvature_order, std::size_t grid_size = 0);

/// Real field on a curve's quadrature grid together with its arclength weights.
struct ScalarField {
  std::vector<double> samples;
  std::vector<double> weights;
  double length = 0.0;

  std::size_t grid_size() const { return samples.size(); }
  double integral() const;
  double l2_norm() const;
  double linf_norm() const;
};

/// Scalar snapshot of the quantities used throughout the convergence analysis.
struct GeometricReport {
  double length = 0.0;
  double signed_area = 0.0;
  double mean_curvature = 0.0;   // kbar = 2 omega pi / L
  double defect = 0.0;           // D = L^2 - 4 omega pi A
  double oscillation = 0.0;      // K_osc = L * integral (k - kbar)^2 ds
  double iso_ratio = 0.0;        // I = L^2 / (4 omega A), NaN when omega A = 0
  double iso_ratio_pi = 0.0;     // L^2 / (4 omega pi A)
  int winding = 0;
  bool resolved = true;
  /// curvature_norms[m] = ||d^m k/ds^m||_2^2.
  std::vector<double> curvature_norms;
};

ClosedCurve make_circle(double radius, int winding, Complex center = {}, int n_modes = kDefaultModes);

struct RandomCurveParams {
  std::uint64_t seed = 0;
  int n_modes = kDefaultModes;
  double decay_rate = 3.0;
  double amplitude = 0.2;
  int max_attempts = 200;
};

/// Unit circle plus seeded random modes 2 <= |p| <= N/4 (and p = -1) with
/// |c_p| <= amplitude |p|^-decay_rate. Rejection-samples until
/// min|gamma_u| > 0.1 mean|gamma_u| and the winding number is 1.
ClosedCurve random_curve(const RandomCurveParams& params);

/// Fourier coefficients of the curve in its arclength parameter:
/// c_n = (1/L) integral gamma(s) e^{-2 pi i n s / L} ds for |n| <= band,
/// evaluated by quadrature on an oversampled parameter grid.
std::vector<Complex> arclength_coefficients(const ClosedCurve& curve, int band);

/// Same curve, reparametrized so that |gamma_u| = L / 2 pi; the spectrum keeps
/// N modes and is anchored at the original gamma(0).
ClosedCurve reparametrize_arclength(const ClosedCurve& curve);

/// max_j |speed_j / mean - 1|.
double speed_nonuniformity(const ClosedCurve& curve);

ScalarField curvature_field(const ClosedCurve& curve, int order);

/// Signed area -1/2 integral <gamma, nu> ds.
double signed_area(const CurveSamples& samples);

GeometricReport geometric_report(const ClosedCurve& curve, int max_order = 2);

/// (1/L) integral gamma ds.
Complex centroid(const ClosedCurve& curve);
ClosedCurve translate_to_centroid(const ClosedCurve& curve);

// JSON layout: {"winding": w, "n_modes": N, "modes": [[re, im], ...]} ordered p = -N..N.
std::string curve_to_json(const ClosedCurve& curve);
ClosedCurve curve_from_json(const std::string& text);
void save_curve(const ClosedCurve& curve, const std::string& path);
ClosedCurve load_curve(const std::string& path);

}  // namespace cdflow
