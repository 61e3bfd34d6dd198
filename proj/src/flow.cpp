#include "cdflow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cdflow/identities.hpp"

namespace cdflow {

using std::numbers::pi;

namespace {

constexpr int kContourPoints = 32;
// Below -2 the closed forms lose at most a few digits to cancellation.
constexpr double kDirectThreshold = 2.0;

// Fourier modes of -k_ss nu for a raw spectrum; throws NotImmersedError.
std::vector<Complex> velocity_modes(std::span<const Complex> modes, int n, std::size_t grid) {
  const auto d1 = synthesize(modes, grid, 1);
  const auto d2 = synthesize(modes, grid, 2);
  std::vector<double> speed(grid), k(grid);
  double mean = 0.0, low = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid; ++j) {
    speed[j] = std::abs(d1[j]);
    mean += speed[j];
    low = std::min(low, speed[j]);
  }
  mean /= static_cast<double>(grid);
  if (!(low > kImmersionFloor * mean)) throw NotImmersedError("flow stage lost immersion");
  for (std::size_t j = 0; j < grid; ++j) {
    k[j] = (std::conj(d1[j]) * d2[j]).imag() / (speed[j] * speed[j] * speed[j]);
  }
  auto ks = periodic_derivative(k);
  for (std::size_t j = 0; j < grid; ++j) ks[j] /= speed[j];
  auto kss = periodic_derivative(ks);
  std::vector<Complex> field(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    field[j] = -(kss[j] / speed[j]) * Complex(0.0, 1.0) * d1[j] / speed[j];
  }
  return analyze(field, n);
}

// Exponential time differencing coefficients for the diagonal linear part
// -sigma_p, evaluated by contour averaging around z = -sigma_p h.
struct EtdCoefficients {
  std::vector<double> e, e2, q, f1, f2, f3;
};

EtdCoefficients etd_coefficients(const std::vector<double>& sigma, double h) {
  const std::size_t size = sigma.size();
  EtdCoefficients c;
  for (auto* v : {&c.e, &c.e2, &c.q, &c.f1, &c.f2, &c.f3}) v->resize(size);
  std::array<Complex, kContourPoints> roots;
  for (int j = 0; j < kContourPoints; ++j) roots[static_cast<std::size_t>(j)] = std::polar(1.0, pi * (j + 0.5) * 2.0 / kContourPoints);
  for (std::size_t i = 0; i < size; ++i) {
    const double z = -sigma[i] * h;
    c.e[i] = std::exp(z);
    c.e2[i] = std::exp(z / 2);
    if (z < -kDirectThreshold) {
      const double z3 = z * z * z;
      c.q[i] = h * (c.e2[i] - 1.0) / z;
      c.f1[i] = h * (-4.0 - z + c.e[i] * (4.0 - 3.0 * z + z * z)) / z3;
      c.f2[i] = h * (2.0 + z + c.e[i] * (z - 2.0)) / z3;
      c.f3[i] = h * (-4.0 - 3.0 * z - z * z + c.e[i] * (4.0 - z)) / z3;
      continue;
    }
    Complex q, f1, f2, f3;
    for (const auto& r : roots) {
      const Complex w = z + r;
      const Complex ew = std::exp(w);
      const Complex w3 = w * w * w;
      q += (std::exp(w / 2.0) - 1.0) / w;
      f1 += (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
      f2 += (2.0 + w + ew * (w - 2.0)) / w3;
      f3 += (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
    }
    c.q[i] = h * q.real() / kContourPoints;
    c.f1[i] = h * f1.real() / kContourPoints;
    c.f2[i] = h * f2.real() / kContourPoints;
    c.f3[i] = h * f3.real() / kContourPoints;
  }
  return c;
}

class Integrator {
 public:
  Integrator(int n, double length) : n_(n), grid_(default_grid(n)), sigma_(static_cast<std::size_t>(2 * n + 1)) {
    for (int p = -n; p <= n; ++p) sigma_[static_cast<std::size_t>(p + n)] = std::pow(2.0 * pi * p / length, 4);
  }

  std::vector<Complex> advance(const std::vector<Complex>& v, double h) const {
    const auto c = etd_coefficients(sigma_, h);
    const std::size_t size = v.size();
    const auto nv = nonlinear(v);
    std::vector<Complex> a(size), b(size), s(size), out(size);
    for (std::size_t i = 0; i < size; ++i) a[i] = c.e2[i] * v[i] + c.q[i] * nv[i];
    const auto na = nonlinear(a);
    for (std::size_t i = 0; i < size; ++i) b[i] = c.e2[i] * v[i] + c.q[i] * na[i];
    const auto nb = nonlinear(b);
    for (std::size_t i = 0; i < size; ++i) s[i] = c.e2[i] * a[i] + c.q[i] * (2.0 * nb[i] - nv[i]);
    const auto ns = nonlinear(s);
    for (std::size_t i = 0; i < size; ++i) {
      out[i] = c.e[i] * v[i] + c.f1[i] * nv[i] + 2.0 * c.f2[i] * (na[i] + nb[i]) + c.f3[i] * ns[i];
    }
    return out;
  }

 private:
  std::vector<Complex> nonlinear(const std::vector<Complex>& v) const {
    auto f = velocity_modes(v, n_, grid_);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += sigma_[i] * v[i];
    return f;
  }

  int n_;
  std::size_t grid_;
  std::vector<double> sigma_;
};

double area_scale(double length0, double area0) {
  return std::abs(area0) > 1e-12 * length0 * length0 ? std::abs(area0) : length0 * length0;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Second-order derivative on a nonuniform three-point stencil.
double derivative(const std::vector<TraceRow>& rows, std::size_t i, double TraceRow::*field) {
  const double h1 = rows[i].t - rows[i - 1].t;
  const double h2 = rows[i + 1].t - rows[i].t;
  return -h2 / (h1 * (h1 + h2)) * rows[i - 1].*field + (h2 - h1) / (h1 * h2) * rows[i].*field +
         h1 / (h2 * (h1 + h2)) * rows[i + 1].*field;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max)) {
    throw std::invalid_argument("need 0 < dt_min <= dt_init <= dt_max");
  }
  if (!(tolerance_area > 0.0 && tolerance_length_increase > 0.0 && local_tolerance > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (!(t_end >= 0.0) || !(k_max_blowup > 0.0)) throw std::invalid_argument("t_end and k_max_blowup");
  if (resample_every < 1 || audit_every < 1 || n_modes < kMinModes || max_steps < 1) {
    throw std::invalid_argument("resample_every, audit_every >= 1 and n_modes >= 8 required");
  }
}

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::running: return "running";
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::singularity: return "singularity";
    case Termination::step_failure: return "step_failure";
  }
  return "running";
}

Termination termination_from_string(const std::string& text) {
  for (auto t : {Termination::running, Termination::reached_t_end, Termination::singularity, Termination::step_failure}) {
    if (to_string(t) == text) return t;
  }
  throw std::invalid_argument("unknown termination '" + text + "'");
}

FlowState initial_state(const ClosedCurve& curve, const FlowConfig& config) {
  config.validate();
  auto start = curve.n_modes() == config.n_modes ? curve : curve.with_modes(config.n_modes);
  FlowState state{start, 0.0, 0, geometric_report(start, 1), config.dt_init};
  state.length0 = state.last_report.length;
  state.area0 = state.last_report.signed_area;
  return state;
}

std::vector<Complex> velocity(const ClosedCurve& curve) {
  const auto samples = sample_curve(curve, 2);
  std::vector<Complex> out(samples.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -samples.curvature[2][j] * samples.normal[j];
  return out;
}

FlowState step(const FlowState& state, const FlowConfig& config) {
  const int n = state.curve.n_modes();
  const double length = state.last_report.length;
  const std::vector<Complex> v(state.curve.modes().begin(), state.curve.modes().end());
  const double remaining = config.t_end - state.t;
  double dt = std::min(state.dt, config.dt_max);
  int rejected = 0;
  std::string reason = "no attempt";

  while (dt >= config.dt_min) {
    const double h = std::min(dt, remaining > 0.0 ? remaining : dt);
    const Integrator integrator(n, length);
    try {
      const auto full = integrator.advance(v, h);
      const auto half = integrator.advance(integrator.advance(v, h / 2), h / 2);
      double err = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(full[i] - half[i]));
      err /= length;
      if (!std::isfinite(err) || err > config.local_tolerance) {
        reason = "local error " + std::to_string(err);
        throw CurveError(reason);
      }
      ClosedCurve next(half);
      if (next.winding() != state.curve.winding()) throw CurveError("winding changed");
      const bool resample = (state.step_count + 1) % config.resample_every == 0;
      if (resample) next = reparametrize_arclength(next);
      auto report = geometric_report(next, 1);
      if (report.length > length * (1.0 + config.tolerance_length_increase)) {
        throw CurveError("length increased by " + std::to_string(report.length / length - 1.0));
      }
      const double jump = std::abs(report.signed_area - state.last_report.signed_area) /
                          area_scale(state.length0, state.area0);
      if (jump > config.tolerance_area) throw CurveError("area jump " + std::to_string(jump));

      FlowState out = state;
      out.curve = std::move(next);
      out.t = h == remaining ? config.t_end : state.t + h;
      out.step_count = state.step_count + 1;
      const double grow = err > 0.0 ? 0.9 * std::pow(config.local_tolerance / err, 0.2) : 2.0;
      out.dt = std::clamp(dt * std::clamp(grow, 0.2, 2.0), config.dt_min, config.dt_max);
      out.rejected = rejected;
      double kmax = 0.0;
      for (double k : curvature_field(out.curve, 0).samples) kmax = std::max(kmax, std::abs(k));
      out.blowup = kmax > config.k_max_blowup;
      out.last_report = std::move(report);
      return out;
    } catch (const CurveError& e) {
      reason = e.what();
      ++rejected;
      dt /= 2;
    }
  }
  std::ostringstream msg;
  msg << "dt fell below dt_min at t = " << state.t << " (" << reason << ")";
  throw StepFailure(msg.str());
}

TraceRow trace_row(const ClosedCurve& curve, double t, double dt) {
  const auto samples = sample_curve(curve, 1);
  TraceRow row;
  row.t = t;
  row.dt = dt;
  row.length = samples.length;
  row.area = signed_area(samples);
  const int omega = curve.winding();
  const double kbar = 2.0 * omega * pi / row.length;
  row.min_k = std::numeric_limits<double>::infinity();
  const auto& k = samples.curvature[0];
  const auto& ks = samples.curvature[1];
  double osc = 0.0, ks2 = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    osc += (k[j] - kbar) * (k[j] - kbar) * samples.ds[j];
    ks2 += ks[j] * ks[j] * samples.ds[j];
    row.min_k = std::min(row.min_k, k[j]);
    row.max_abs_k = std::max(row.max_abs_k, std::abs(k[j]));
  }
  row.oscillation = row.length * osc;
  row.ks_norm2_sq = ks2;
  row.defect = omega != 0 ? series_defect(spectrum_of(curve))
                          : row.length * row.length - 4.0 * omega * pi * row.area;
  return row;
}

FlowTrace run(const ClosedCurve& initial, const FlowConfig& config) {
  auto state = initial_state(initial, config);
  FlowTrace trace;
  trace.winding = state.curve.winding();
  trace.rows.push_back(trace_row(state.curve, 0.0, 0.0));
  double last_dt = 0.0;
  while (trace.termination == Termination::running) {
    if (state.t >= config.t_end) {
      trace.termination = Termination::reached_t_end;
      break;
    }
    if (state.step_count >= config.max_steps) {
      trace.termination = Termination::step_failure;
      trace.message = "step budget exhausted";
      break;
    }
    const double before = state.t;
    try {
      state = step(state, config);
    } catch (const StepFailure& e) {
      trace.termination = Termination::step_failure;
      trace.message = e.what();
      break;
    }
    last_dt = state.t - before;
    const bool done = state.t >= config.t_end || state.blowup;
    if (state.step_count % config.audit_every == 0 || done) {
      trace.rows.push_back(trace_row(state.curve, state.t, last_dt));
    }
    if (state.blowup) trace.termination = Termination::singularity;
  }
  if (trace.rows.back().t != state.t) trace.rows.push_back(trace_row(state.curve, state.t, last_dt));
  if (trace.termination == Termination::singularity || trace.termination == Termination::step_failure) {
    const auto [T, exponent] = estimate_blowup(trace.rows);
    trace.T_est = T;
    trace.fit_exponent = exponent;
  }
  trace.final_curve = state.curve;
  return trace;
}

std::pair<double, double> estimate_blowup(const std::vector<TraceRow>& rows) {
  const double nan = std::nan("");
  if (rows.size() < 3) return {nan, nan};
  const double top = rows.back().max_abs_k;
  std::size_t first = rows.size() - 1;
  while (first > 0 && rows[first - 1].max_abs_k >= top / 10) --first;
  if (rows.size() - first < 3 || rows[first].max_abs_k > top / 2) return {nan, nan};
  std::vector<double> t, y;
  for (std::size_t i = first; i < rows.size(); ++i) {
    t.push_back(rows[i].t);
    y.push_back(std::pow(rows[i].max_abs_k, -4.0));
  }
  const double b = slope(t, y);
  if (!(b < 0.0)) return {nan, nan};
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= static_cast<double>(t.size());
  my /= static_cast<double>(t.size());
  const double T = mt - my / b;

  std::vector<double> lx, ly;
  for (std::size_t i = first; i < rows.size(); ++i) {
    if (rows[i].t < T) {
      lx.push_back(std::log(T - rows[i].t));
      ly.push_back(std::log(rows[i].max_abs_k));
    }
  }
  return {T, lx.size() >= 2 ? slope(lx, ly) : nan};
}

AuditReport audit(const FlowTrace& trace, double L0, double A0, double derivative_tolerance) {
  const auto& rows = trace.rows;
  if (rows.size() < 3) throw std::invalid_argument("audit needs at least 3 trace rows");
  AuditReport report;
  report.rows_checked = rows.size();
  auto flag = [&](char check, std::size_t row, const std::string& detail) {
    report.violations.push_back({check, row, detail});
  };
  const double scale = area_scale(L0, A0);
  const bool has_area = trace.winding != 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double drift = std::abs(r.area - A0) / scale;
    report.max_area_drift = std::max(report.max_area_drift, drift);
    if (drift >= 1e-6) flag('b', i, "area drift " + std::to_string(drift));
    if (has_area && r.length * r.length < 4.0 * pi * A0 * (1.0 - 1e-6)) flag('e', i, "L^2 < 4 pi A0");
    if (i == 0) continue;
    if (r.defect > rows[i - 1].defect + 1e-9) flag('c', i, "D increased");
    if (r.length > rows[i - 1].length + 1e-9) flag('g', i, "L increased");
    if (has_area && A0 > 0.0) {
      const double inv = 4.0 * trace.winding * pi * r.area / (r.length * r.length);
      const double prev = 4.0 * trace.winding * pi * rows[i - 1].area / (rows[i - 1].length * rows[i - 1].length);
      if (inv < prev - 1e-9) flag('f', i, "1/I_pi decreased");
    }
    if (i + 1 >= rows.size()) continue;
    const double ks2 = r.ks_norm2_sq;
    if (ks2 <= 1e-6) continue;
    const double dl = derivative(rows, i, &TraceRow::length);
    const double err_l = std::abs(dl + ks2) / ks2;
    report.max_dl_error = std::max(report.max_dl_error, err_l);
    if (err_l > derivative_tolerance) flag('a', i, "dL/dt mismatch " + std::to_string(err_l));
    if (has_area) {
      const double dd = derivative(rows, i, &TraceRow::defect);
      const double expect = 2.0 * r.length * ks2;
      const double err_d = std::abs(dd + expect) / expect;
      report.max_dd_error = std::max(report.max_dd_error, err_d);
      if (err_d > derivative_tolerance) flag('d', i, "dD/dt mismatch " + std::to_string(err_d));
    }
  }
  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const AuditViolation& a, const AuditViolation& b) { return a.row < b.row; });
  return report;
}

DecayRates decay_rates(const FlowTrace& trace, double t_lo, double t_hi) {
  if (!(t_lo < t_hi)) throw std::invalid_argument("decay window must satisfy a < b");
  // Values at the round-off floor of the spectral quadrature count as zero.
  const double l0 = trace.length0();
  const double floor_d = 1e-20 * l0 * l0;
  const double floor_ko = 1e-16;
  const double floor_ks = 1e-14 / (l0 * l0 * l0);
  std::vector<double> t, d, ko, ks;
  for (const auto& r : trace.rows) {
    if (r.t < t_lo || r.t > t_hi) continue;
    if (!(r.defect > floor_d && r.oscillation > floor_ko && r.ks_norm2_sq > floor_ks)) {
      throw std::invalid_argument("D, K_osc or ||k_s||^2 at round-off level at t = " + std::to_string(r.t));
    }
    t.push_back(r.t);
    d.push_back(std::log(r.defect));
    ko.push_back(std::log(r.oscillation));
    ks.push_back(std::log(r.ks_norm2_sq));
  }
  if (t.size() < 3) throw std::invalid_argument("decay window holds fewer than 3 samples");
  DecayRates out;
  out.samples = t.size();
  out.slope_D = slope(t, d);
  out.slope_Ko = slope(t, ko);
  out.slope_ks = slope(t, ks);
  out.kbar0 = 2.0 * trace.winding * pi / trace.length0();
  const double k4 = std::pow(out.kbar0, 4);
  out.bound_D = -4.0 * k4;
  out.bound_Ko = -2.0 * k4;
  out.bound_ks = -k4;
  return out;
}

std::optional<double> convexity_waiting_time(const FlowTrace& trace) {
  const auto& rows = trace.rows;
  if (rows.empty() || !(rows.back().min_k > 0.0)) return std::nullopt;
  std::size_t i = rows.size() - 1;
  while (i > 0 && rows[i - 1].min_k > 0.0) --i;
  return rows[i].t;
}

double wirtinger_bound(double L0) {
  if (!(L0 > 0.0)) throw std::invalid_argument("L0 must be positive");
  return std::pow(L0, 4) / (16.0 * std::pow(pi, 4));
}

}  // namespace cdflow
