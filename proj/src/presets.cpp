#include "cdflow/presets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cdflow {

using std::numbers::pi;

namespace {

template <class Map>
ClosedCurve from_samples(Map&& map, int n_modes) {
  const std::size_t grid = std::max<std::size_t>(1024, 8 * static_cast<std::size_t>(n_modes));
  std::vector<Complex> values(grid);
  for (std::size_t j = 0; j < grid; ++j) values[j] = map(2.0 * pi * static_cast<double>(j) / static_cast<double>(grid));
  return ClosedCurve(analyze(values, n_modes));
}

}  // namespace

ClosedCurve polar_curve(const std::vector<Harmonic>& harmonics, int n_modes, int cover) {
  if (cover < 1) throw std::invalid_argument("cover must be positive");
  return from_samples(
      [&](double u) {
        const double theta = cover * u;
        double r = 1.0;
        for (const auto& h : harmonics) r += h.amplitude * std::cos(h.order * theta + h.phase);
        return std::polar(r, theta);
      },
      n_modes);
}

ClosedCurve ellipse(double a, double b, int n_modes) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("ellipse semi-axes must be positive");
  std::vector<Complex> modes(static_cast<std::size_t>(2 * n_modes + 1));
  modes[static_cast<std::size_t>(n_modes + 1)] = 0.5 * (a + b);
  modes[static_cast<std::size_t>(n_modes - 1)] = 0.5 * (a - b);
  return ClosedCurve(std::move(modes));
}

ClosedCurve figure_eight(int n_modes) {
  std::vector<Complex> modes(static_cast<std::size_t>(2 * n_modes + 1));
  const auto at = [&](int p) -> Complex& { return modes[static_cast<std::size_t>(n_modes + p)]; };
  at(1) = 0.5;
  at(-1) = 0.5;
  at(2) = 0.25;
  at(-2) = -0.25;
  return ClosedCurve(std::move(modes));
}

ClosedCurve lemniscate(double scale, int n_modes) {
  if (!(scale > 0.0)) throw std::invalid_argument("lemniscate scale must be positive");
  return from_samples(
      [&](double t) {
        const double s = std::sin(t);
        const double c = std::cos(t);
        const double d = 1.0 + s * s;
        return Complex(scale * c / d, scale * s * c / d);
      },
      n_modes);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"circle", "omega2", "perturbed3", "figure8", "lemniscate"};
  return names;
}

ClosedCurve make_preset(const std::string& name, int n_modes) {
  if (name == "circle") return make_circle(1.0, 1, {}, n_modes);
  if (name == "omega2") return polar_curve({{3, 0.1, 0.0}}, n_modes, 2);
  if (name == "perturbed3") return polar_curve({{3, 0.1, 0.0}}, n_modes);
  if (name == "figure8") return figure_eight(n_modes);
  if (name == "lemniscate") return lemniscate(1.0, n_modes);
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace cdflow
