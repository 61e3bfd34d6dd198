#pragma once

#include <string>
#include <vector>

#include "cdflow/curve.hpp"

namespace cdflow {

/// One harmonic of a polar perturbation r(theta) = 1 + sum a cos(m theta + phi).
struct Harmonic {
  int order = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// r(theta) e^{i theta} traversed `cover` times.
ClosedCurve polar_curve(const std::vector<Harmonic>& harmonics, int n_modes = kDefaultModes, int cover = 1);

/// (a cos u, b sin u).
ClosedCurve ellipse(double a, double b, int n_modes = kDefaultModes);

/// Gerono lemniscate (cos u, sin u cos u): smooth figure-eight, winding 0.
ClosedCurve figure_eight(int n_modes = kDefaultModes);

/// Lemniscate of Bernoulli x = a cos t/(1+sin^2 t), y = a sin t cos t/(1+sin^2 t).
ClosedCurve lemniscate(double scale, int n_modes = kDefaultModes);

/// Named initial data: circle, omega2, perturbed3, figure8, lemniscate.
ClosedCurve make_preset(const std::string& name, int n_modes = kDefaultModes);
const std::vector<std::string>& preset_names();

}  // namespace cdflow
