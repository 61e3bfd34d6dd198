#include "cdflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace cdflow {

using std::numbers::pi;

namespace {

double inner(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

struct SpeedProfile {
  std::vector<Complex> position;
  std::vector<Complex> d1;
  std::vector<Complex> d2;
  std::vector<double> speed;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

SpeedProfile speed_profile(std::span<const Complex> modes, std::size_t grid, bool with_second) {
  SpeedProfile out;
  out.position = synthesize(modes, grid, 0);
  out.d1 = synthesize(modes, grid, 1);
  if (with_second) out.d2 = synthesize(modes, grid, 2);
  out.speed.resize(grid);
  double sum = 0.0;
  out.min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid; ++j) {
    out.speed[j] = std::abs(out.d1[j]);
    sum += out.speed[j];
    out.min = std::min(out.min, out.speed[j]);
    out.max = std::max(out.max, out.speed[j]);
  }
  out.mean = sum / static_cast<double>(grid);
  return out;
}

void require_immersion(const SpeedProfile& profile) {
  if (!(profile.mean > 0.0) || profile.min < kImmersionFloor * profile.mean) {
    std::ostringstream msg;
    msg << "curve is not immersed: min|gamma_u| = " << profile.min << ", mean = " << profile.mean;
    throw NotImmersedError(msg.str());
  }
}

}  // namespace

std::size_t default_grid(int n_modes) { return static_cast<std::size_t>(4 * n_modes); }

ClosedCurve::ClosedCurve(std::vector<Complex> modes) : modes_(std::move(modes)) {
  if (modes_.size() % 2 == 0) throw CurveError("spectrum must have 2N+1 entries");
  n_modes_ = static_cast<int>(modes_.size() / 2);
  if (n_modes_ < kMinModes) throw CurveError("at least 8 modes are required");
  for (const auto& c : modes_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw CurveError("non-finite Fourier mode");
  }
  const std::size_t grid = default_grid(n_modes_);
  const auto profile = speed_profile(modes_, grid, true);
  require_immersion(profile);
  // (1/2 pi) integral k ds = (1/2 pi) integral Im(conj(g') g'') / |g'|^2 du
  double turning = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    const double sp = profile.speed[j];
    turning += (std::conj(profile.d1[j]) * profile.d2[j]).imag() / (sp * sp);
  }
  turning /= static_cast<double>(grid);
  winding_ = static_cast<int>(std::lround(turning));
  winding_discrepancy_ = std::abs(turning - winding_);
  if (winding_discrepancy_ > 1e-3) {
    std::ostringstream msg;
    msg << "turning number " << turning << " is not close to an integer (under-resolved curve)";
    throw CurveError(msg.str());
  }
}

Complex ClosedCurve::mode(int p) const {
  if (p < -n_modes_ || p > n_modes_) return {};
  return modes_[static_cast<std::size_t>(p + n_modes_)];
}

Complex ClosedCurve::evaluate(double u) const {
  Complex sum{};
  const Complex step = std::polar(1.0, u);
  Complex phase = std::polar(1.0, -n_modes_ * u);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    sum += modes_[i] * phase;
    phase *= step;
  }
  return sum;
}

double ClosedCurve::tail_ratio() const {
  double peak = 0.0;
  for (const auto& c : modes_) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(modes_.front()), std::abs(modes_.back())) / peak;
}

ClosedCurve ClosedCurve::translated(Complex offset) const {
  auto modes = modes_;
  modes[static_cast<std::size_t>(n_modes_)] += offset;
  return ClosedCurve(std::move(modes));
}

ClosedCurve ClosedCurve::scaled(double factor) const {
  auto modes = modes_;
  for (auto& c : modes) c *= factor;
  return ClosedCurve(std::move(modes));
}

ClosedCurve ClosedCurve::reversed() const {
  return ClosedCurve(std::vector<Complex>(modes_.rbegin(), modes_.rend()));
}

ClosedCurve ClosedCurve::with_modes(int n_modes) const {
  std::vector<Complex> modes(static_cast<std::size_t>(2 * n_modes + 1));
  for (int p = -n_modes; p <= n_modes; ++p) modes[static_cast<std::size_t>(p + n_modes)] = mode(p);
  return ClosedCurve(std::move(modes));
}

double CurveSamples::integrate(std::span<const double> field) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) sum += field[j] * ds[j];
  return sum;
}

std::vector<double> CurveSamples::d_ds(std::span<const double> field) const {
  auto out = periodic_derivative(field, 1);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] /= speed[j];
  return out;
}

std::vector<Complex> CurveSamples::d_ds(std::span<const Complex> field) const {
  const std::size_t m = field.size();
  std::vector<Complex> bins(m);
  fft_forward(field, bins);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) bins[j] *= Complex(0.0, wavenumber(j, m)) * scale;
  std::vector<Complex> out(m);
  fft_backward(bins, out);
  for (std::size_t j = 0; j < m; ++j) out[j] /= speed[j];
  return out;
}

CurveSamples sample_curve(const ClosedCurve& curve, int curvature_order, std::size_t grid_size) {
  if (curvature_order < 0) throw std::invalid_argument("curvature order must be non-negative");
  const std::size_t grid = grid_size == 0 ? default_grid(curve.n_modes()) : grid_size;
  auto profile = speed_profile(curve.modes(), grid, true);
  require_immersion(profile);

  CurveSamples out;
  out.position = std::move(profile.position);
  out.speed = std::move(profile.speed);
  out.tangent.resize(grid);
  out.normal.resize(grid);
  out.ds.resize(grid);
  std::vector<double> k(grid);
  const double du = 2.0 * pi / static_cast<double>(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    const double sp = out.speed[j];
    out.tangent[j] = profile.d1[j] / sp;
    out.normal[j] = Complex(0.0, 1.0) * out.tangent[j];
    out.ds[j] = sp * du;
    k[j] = (std::conj(profile.d1[j]) * profile.d2[j]).imag() / (sp * sp * sp);
    out.length += out.ds[j];
  }
  // derivatives would amplify round-off in k by (grid / L)^m
  if (curvature_order > 0) suppress_roundoff(k, 1e-14);
  out.curvature.push_back(std::move(k));
  for (int m = 1; m <= curvature_order; ++m) out.curvature.push_back(out.d_ds(out.curvature.back()));
  return out;
}

double ScalarField::integral() const {
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) sum += samples[j] * weights[j];
  return sum;
}

double ScalarField::l2_norm() const {
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) sum += samples[j] * samples[j] * weights[j];
  return std::sqrt(sum);
}

double ScalarField::linf_norm() const {
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  return peak;
}

ClosedCurve make_circle(double radius, int winding, Complex center, int n_modes) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  if (winding == 0) throw std::invalid_argument("no circle has turning number 0");
  if (std::abs(winding) > n_modes) throw std::invalid_argument("winding exceeds spectral band");
  std::vector<Complex> modes(static_cast<std::size_t>(2 * n_modes + 1));
  modes[static_cast<std::size_t>(n_modes)] = center;
  modes[static_cast<std::size_t>(n_modes + winding)] = radius;
  return ClosedCurve(std::move(modes));
}

ClosedCurve random_curve(const RandomCurveParams& params) {
  if (params.n_modes < kMinModes) throw std::invalid_argument("random_curve needs n_modes >= 8");
  if (!(params.decay_rate > 1.0)) throw std::invalid_argument("decay_rate must exceed 1");
  if (params.amplitude < 0.0) throw std::invalid_argument("amplitude must be non-negative");
  const int n = params.n_modes;
  const int active = std::max(2, n / 4);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    std::vector<Complex> modes(static_cast<std::size_t>(2 * n + 1));
    modes[static_cast<std::size_t>(n + 1)] = 1.0;
    for (int p = -active; p <= active; ++p) {
      if (p == 0 || p == 1) continue;
      const double bound = params.amplitude * std::pow(std::abs(p), -params.decay_rate);
      const double magnitude = bound * unit(rng);
      const double phase = 2.0 * pi * unit(rng);
      modes[static_cast<std::size_t>(n + p)] = std::polar(magnitude, phase);
    }
    const auto profile = speed_profile(modes, default_grid(n), false);
    if (profile.min <= 0.1 * profile.mean) continue;
    try {
      ClosedCurve curve(std::move(modes));
      if (curve.winding() == 1) return curve;
    } catch (const CurveError&) {
    }
  }
  throw GenerationError("random_curve: no admissible curve after " + std::to_string(params.max_attempts) +
                        " attempts (seed " + std::to_string(params.seed) + ")");
}

std::vector<Complex> arclength_coefficients(const ClosedCurve& curve, int band) {
  if (band < 1) throw std::invalid_argument("band must be positive");
  const int n = curve.n_modes();
  const auto coarse = speed_profile(curve.modes(), default_grid(n), false);
  require_immersion(coarse);
  // The integrand oscillates at up to band * max(speed)/mean(speed) + N cycles.
  const double ratio = coarse.max / coarse.mean;
  const double cycles = static_cast<double>(band) * ratio + static_cast<double>(n);
  const std::size_t grid = std::min<std::size_t>(
      std::max<std::size_t>(next_pow2(static_cast<std::size_t>(3.0 * cycles) + 16), default_grid(n)),
      std::size_t{1} << 20);

  const auto fine = speed_profile(curve.modes(), grid, false);
  const auto offset = periodic_antiderivative(fine.speed);
  const double du = 2.0 * pi / static_cast<double>(grid);
  const double length = fine.mean * 2.0 * pi;

  std::vector<Complex> coeffs(static_cast<std::size_t>(2 * band + 1));
  constexpr int kRestart = 64;
  for (std::size_t j = 0; j < grid; ++j) {
    // sigma = 2 pi s / L; s(u) = mean * u + zero-mean antiderivative of the speed.
    const double sigma = (fine.mean * du * static_cast<double>(j) + offset[j]) / fine.mean;
    const Complex weight = fine.position[j] * fine.speed[j] * du / length;
    const Complex step = std::polar(1.0, -sigma);
    Complex phase;
    for (int k = -band; k <= band; ++k) {
      if ((k + band) % kRestart == 0) phase = std::polar(1.0, -k * sigma);
      coeffs[static_cast<std::size_t>(k + band)] += weight * phase;
      phase *= step;
    }
  }
  return coeffs;
}

ClosedCurve reparametrize_arclength(const ClosedCurve& curve) {
  return ClosedCurve(arclength_coefficients(curve, curve.n_modes()));
}

double speed_nonuniformity(const ClosedCurve& curve) {
  const auto profile = speed_profile(curve.modes(), default_grid(curve.n_modes()), false);
  return std::max(profile.max / profile.mean - 1.0, 1.0 - profile.min / profile.mean);
}

ScalarField curvature_field(const ClosedCurve& curve, int order) {
  if (order < 0) throw std::invalid_argument("curvature derivative order must be non-negative");
  auto samples = sample_curve(curve, order);
  return ScalarField{std::move(samples.curvature[static_cast<std::size_t>(order)]), std::move(samples.ds),
                     samples.length};
}

double signed_area(const CurveSamples& samples) {
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    sum += inner(samples.position[j], samples.normal[j]) * samples.ds[j];
  }
  return -0.5 * sum;
}

GeometricReport geometric_report(const ClosedCurve& curve, int max_order) {
  if (max_order < 0) throw std::invalid_argument("max_order must be non-negative");
  const auto samples = sample_curve(curve, max_order);
  GeometricReport report;
  report.winding = curve.winding();
  report.length = samples.length;
  report.signed_area = signed_area(samples);
  const double omega = report.winding;
  const double length = report.length;
  report.mean_curvature = 2.0 * omega * pi / length;
  report.defect = length * length - 4.0 * omega * pi * report.signed_area;
  double osc = 0.0;
  const auto& k = samples.curvature[0];
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double dev = k[j] - report.mean_curvature;
    osc += dev * dev * samples.ds[j];
  }
  report.oscillation = length * osc;
  const double denom = 4.0 * omega * report.signed_area;
  report.iso_ratio = denom == 0.0 ? std::nan("") : length * length / denom;
  report.iso_ratio_pi = denom == 0.0 ? std::nan("") : length * length / (pi * denom);
  report.resolved = curve.resolved();
  for (const auto& field : samples.curvature) {
    double sum = 0.0;
    for (std::size_t j = 0; j < field.size(); ++j) sum += field[j] * field[j] * samples.ds[j];
    report.curvature_norms.push_back(sum);
  }
  return report;
}

Complex centroid(const ClosedCurve& curve) {
  const auto samples = sample_curve(curve, 0);
  Complex sum{};
  for (std::size_t j = 0; j < samples.size(); ++j) sum += samples.position[j] * samples.ds[j];
  return sum / samples.length;
}

ClosedCurve translate_to_centroid(const ClosedCurve& curve) { return curve.translated(-centroid(curve)); }

std::string curve_to_json(const ClosedCurve& curve) {
  nlohmann::json j;
  j["winding"] = curve.winding();
  j["n_modes"] = curve.n_modes();
  auto modes = nlohmann::json::array();
  for (const auto& c : curve.modes()) modes.push_back({c.real(), c.imag()});
  j["modes"] = std::move(modes);
  return j.dump();
}

ClosedCurve curve_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CurveError(std::string("malformed curve JSON: ") + e.what());
  }
  if (!j.contains("modes") || !j.contains("n_modes")) throw CurveError("curve JSON needs n_modes and modes");
  const int n = j.at("n_modes").get<int>();
  const auto& raw = j.at("modes");
  if (!raw.is_array() || raw.size() != static_cast<std::size_t>(2 * n + 1)) {
    throw CurveError("curve JSON: modes must hold 2*n_modes+1 entries");
  }
  std::vector<Complex> modes;
  modes.reserve(raw.size());
  for (const auto& pair : raw) modes.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  ClosedCurve curve(std::move(modes));
  if (j.contains("winding") && j.at("winding").get<int>() != curve.winding()) {
    throw CurveError("curve JSON: stored winding disagrees with the spectrum");
  }
  return curve;
}

void save_curve(const ClosedCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << curve_to_json(curve) << '\n';
}

ClosedCurve load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return curve_from_json(buffer.str());
}

}  // namespace cdflow
