#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdflow/flow.hpp"
#include "cdflow/presets.hpp"

using namespace cdflow;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

FlowConfig short_config(double t_end, int n_modes) {
  FlowConfig c;
  c.t_end = t_end;
  c.n_modes = n_modes;
  return c;
}

// Forward Euler on grid values of -k_ss nu, re-analyzed each step.
ClosedCurve euler_reference(const ClosedCurve& start, double total, int steps) {
  auto curve = start;
  const double h = total / steps;
  for (int i = 0; i < steps; ++i) {
    auto points = synthesize(curve.modes(), default_grid(curve.n_modes()));
    const auto v = velocity(curve);
    for (std::size_t j = 0; j < points.size(); ++j) points[j] += h * v[j];
    curve = ClosedCurve(analyze(points, curve.n_modes()));
  }
  return curve;
}

double max_mode_gap(const ClosedCurve& a, const ClosedCurve& b) {
  double gap = 0.0;
  for (int p = -a.n_modes(); p <= a.n_modes(); ++p) gap = std::max(gap, std::abs(a.mode(p) - b.mode(p)));
  return gap;
}

}  // namespace

TEST_CASE("velocity") {
  SUBCASE("round circles are equilibria") {
    for (int w : {1, 2, -1}) {
      for (const auto& v : velocity(make_circle(1.5, w, {0.3, 0.2}, 16))) CHECK(std::abs(v) < 1e-11);
    }
  }
  SUBCASE("mode-2 perturbation: linearized fourth-order response") {
    // r = 1 + eps cos 2 theta: k_ss ~ -12 eps cos 2 theta, velocity radial part ~ -12 eps cos 2 theta.
    const double eps = 1e-6;
    const auto plus = velocity(polar_curve({{2, eps, 0.0}}, 16));
    const auto minus = velocity(polar_curve({{2, -eps, 0.0}}, 16));
    const std::size_t m = plus.size();
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double theta = 2 * pi * static_cast<double>(j) / static_cast<double>(m);
      const Complex radial = std::polar(1.0, theta);
      const Complex dv = (plus[j] - minus[j]) / (2 * eps);
      const double response = dv.real() * radial.real() + dv.imag() * radial.imag();
      worst = std::max(worst, std::abs(response + 12.0 * std::cos(2 * theta)));
    }
    CHECK(worst < 1e-4);
  }
  SUBCASE("translation equivariance") {
    const auto c = random_curve({.seed = 3, .n_modes = 32});
    const auto a = velocity(c);
    const auto b = velocity(c.translated({5.0, -2.0}));
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - b[j]) < 1e-10);
  }
  CHECK_THROWS_AS(velocity(ClosedCurve(std::vector<Complex>(17, Complex(0.0)))), NotImmersedError);
}

TEST_CASE("step") {
  SUBCASE("circle is preserved") {
    for (int w : {1, 2}) {
      const auto circle = make_circle(1.0, w, {}, 32);
      auto state = initial_state(circle, short_config(1.0, 32));
      for (int i = 0; i < 5; ++i) state = step(state, short_config(1.0, 32));
      CHECK(max_mode_gap(state.curve, circle) < 1e-10);
      CHECK(std::abs(state.last_report.length - 2 * pi * w) < 1e-10);
    }
  }
  SUBCASE("perturbed circle agrees with a tiny-dt explicit reference") {
    const auto c = polar_curve({{3, 0.1, 0.0}}, 32);
    auto config = short_config(1e-4, 32);
    config.dt_init = config.dt_max = 1e-4;
    const auto s = step(initial_state(c, config), config);
    REQUIRE(s.t > 0.0);
    CHECK(s.t <= 1e-4);
    const auto ref = euler_reference(c, s.t, static_cast<int>(std::ceil(s.t / 1e-9)));
    CHECK(max_mode_gap(s.curve, ref) < 1e-6);
    CHECK(s.last_report.length < geometric_report(c, 0).length);
    CHECK(rel(s.last_report.signed_area, geometric_report(c, 0).signed_area) < config.tolerance_area);
  }
  SUBCASE("huge dt_init is halved until accepted") {
    auto config = short_config(1.0, 32);
    config.dt_init = config.dt_max = 1.0;
    const auto s = step(initial_state(polar_curve({{3, 0.2, 0.0}}, 32), config), config);
    CHECK(s.rejected > 0);
    CHECK(s.t < 1.0);
    CHECK(s.t > 0.0);
  }
  SUBCASE("dt_min above any acceptable step fails") {
    auto config = short_config(1.0, 32);
    config.dt_min = config.dt_init = config.dt_max = 0.5;
    CHECK_THROWS_AS(step(initial_state(polar_curve({{3, 0.3, 0.0}}, 32), config), config), StepFailure);
  }
  SUBCASE("config validation") {
    FlowConfig c;
    c.dt_min = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = FlowConfig{};
    c.tolerance_area = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

TEST_CASE("consistency order in time") {
  // Fixed steps: a loose local tolerance disables step rejection.
  const auto c = polar_curve({{3, 0.1, 0.0}}, 24);
  auto fixed = [&](double h, double total) {
    auto config = short_config(total, 24);
    config.dt_init = config.dt_max = h;
    config.dt_min = h / 4;
    config.local_tolerance = 1.0;
    config.tolerance_area = config.tolerance_length_increase = 1.0;
    auto s = initial_state(c, config);
    while (s.t < total) s = step(s, config);
    return s.curve;
  };
  const double total = 4e-3;
  const auto ref = fixed(total / 256, total);
  const double e1 = max_mode_gap(fixed(total / 4, total), ref);
  const double e2 = max_mode_gap(fixed(total / 8, total), ref);
  const double order = std::log2(e1 / e2);
  MESSAGE("measured temporal order " << order << " (errors " << e1 << ", " << e2 << ")");
  CHECK(e1 / e2 >= 2.0);
}

TEST_CASE("run") {
  SUBCASE("circle: constant trace") {
    auto config = short_config(1.0, 16);
    const auto trace = run(make_circle(1.0, 1, {}, 16), config);
    CHECK(trace.termination == Termination::reached_t_end);
    CHECK(trace.rows.back().t == 1.0);
    for (const auto& r : trace.rows) {
      CHECK(std::abs(r.length - 2 * pi) < 1e-10);
      CHECK(std::abs(r.area - pi) < 1e-10);
      CHECK(r.oscillation < 1e-18);
    }
    for (std::size_t i = 1; i < trace.rows.size(); ++i) CHECK(trace.rows[i].t > trace.rows[i - 1].t);
    CHECK(trace.final_curve.has_value());
  }
  SUBCASE("perturbed circle agrees across resolutions") {
    const auto c = polar_curve({{3, 0.1, 0.0}}, 128);
    const auto a = run(c, short_config(0.05, 64));
    const auto b = run(c, short_config(0.05, 128));
    const auto& ra = a.rows.back();
    const auto& rb = b.rows.back();
    CHECK(rel(ra.length, rb.length) < 1e-6);
    CHECK(rel(ra.area, rb.area) < 1e-6);
    CHECK(std::abs(ra.defect - rb.defect) < 1e-6 * rb.length * rb.length);
    CHECK(ra.defect < a.rows.front().defect);
  }
  SUBCASE("audit_every thins the rows") {
    auto config = short_config(0.02, 32);
    config.audit_every = 10;
    const auto trace = run(polar_curve({{3, 0.1, 0.0}}, 32), config);
    const auto dense = run(polar_curve({{3, 0.1, 0.0}}, 32), short_config(0.02, 32));
    CHECK(trace.rows.size() < dense.rows.size() / 5 + 3);
    CHECK(trace.rows.back().t == 0.02);
  }
  SUBCASE("figure-eight blows up before the Wirtinger time") {
    auto config = short_config(5.0, 64);
    config.k_max_blowup = 40.0;
    const auto trace = run(figure_eight(64), config);
    CHECK(trace.termination == Termination::singularity);
    CHECK(trace.winding == 0);
    CHECK(std::isfinite(trace.T_est));
    CHECK(trace.T_est >= trace.rows.back().t * (1 - 1e-6));
    CHECK(trace.T_est <= wirtinger_bound(trace.length0()));
    CHECK(trace.fit_exponent == doctest::Approx(-0.25).epsilon(0.05));
    CHECK_FALSE(convexity_waiting_time(trace).has_value());
  }
}

TEST_CASE("blow-up fit on synthetic data") {
  // max|k| = (T - t)^(-1/4) exactly.
  std::vector<TraceRow> rows;
  const double T = 0.3;
  for (int i = 0; i < 200; ++i) {
    TraceRow r;
    r.t = T * (1.0 - std::pow(0.95, i));
    r.max_abs_k = std::pow(T - r.t, -0.25);
    rows.push_back(r);
  }
  const auto [t_est, exponent] = estimate_blowup(rows);
  CHECK(t_est == doctest::Approx(T).epsilon(1e-10));
  CHECK(exponent == doctest::Approx(-0.25).epsilon(1e-8));
  rows.resize(2);
  CHECK(std::isnan(estimate_blowup(rows).first));
}

TEST_CASE("audit") {
  SUBCASE("circle passes trivially") {
    const auto trace = run(make_circle(1.0, 1, {}, 16), short_config(0.5, 16));
    const auto report = audit(trace, trace.length0(), trace.area0());
    CHECK(report.passed());
    CHECK(report.max_area_drift < 1e-12);
  }
  SUBCASE("perturbed circle passes all checks") {
    const auto trace = run(polar_curve({{3, 0.1, 0.0}}, 64), short_config(0.1, 64));
    const auto report = audit(trace, trace.length0(), trace.area0());
    CHECK(report.passed());
    CHECK(report.max_area_drift < 1e-6);
    CHECK(report.max_dl_error < 0.05);
    CHECK(report.max_dd_error < 0.05);
  }
  SUBCASE("coarse run with huge steps is caught") {
    auto config = short_config(0.2, 16);
    config.dt_init = config.dt_max = 0.02;
    config.dt_min = 1e-5;
    config.local_tolerance = 1.0;
    config.tolerance_area = config.tolerance_length_increase = 1.0;
    const auto trace = run(polar_curve({{3, 0.3, 0.0}}, 16), config);
    const auto report = audit(trace, trace.length0(), trace.area0());
    CHECK_FALSE(report.passed());
    CHECK(report.first_failure() == 'b');
    CHECK(report.violations.front().row == 1);
  }
  SUBCASE("hand-built violations are located") {
    FlowTrace t;
    t.winding = 1;
    for (int i = 0; i < 5; ++i) {
      TraceRow r;
      r.t = i * 0.1;
      r.length = 2 * pi;
      r.area = pi;
      r.defect = i == 3 ? 1.0 : 0.0;
      t.rows.push_back(r);
    }
    t.rows[4].area = 2 * pi;
    const auto report = audit(t, 2 * pi, pi);
    bool found_c = false, found_b = false;
    for (const auto& v : report.violations) {
      found_c = found_c || (v.check == 'c' && v.row == 3);
      found_b = found_b || (v.check == 'b' && v.row == 4);
    }
    CHECK(found_c);
    CHECK(found_b);
  }
  FlowTrace tiny;
  tiny.rows.resize(2);
  CHECK_THROWS_AS(audit(tiny, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("decay rates") {
  SUBCASE("circle is rejected") {
    const auto trace = run(make_circle(1.0, 1, {}, 16), short_config(0.5, 16));
    CHECK_THROWS_AS(decay_rates(trace, 0.0, 0.5), std::invalid_argument);
  }
  SUBCASE("mode-3 perturbation decays far faster than the bound") {
    const auto trace = run(polar_curve({{3, 0.1, 0.0}}, 64), short_config(0.12, 64));
    const auto r = decay_rates(trace, 0.06, 0.12);
    CHECK(r.kbar0 == doctest::Approx(2 * pi / trace.length0()));
    CHECK(r.bound_D == doctest::Approx(-4 * std::pow(r.kbar0, 4)));
    CHECK(r.passed());
    // linearized mode-3 rate of D is -2 (3^4 - 3^2) kbar^4
    CHECK(r.slope_D == doctest::Approx(-144 * std::pow(2 * pi / trace.rows.back().length, 4)).epsilon(0.05));
  }
  SUBCASE("doubly covered circle with a 2-fold symmetric perturbation") {
    const auto trace = run(make_preset("omega2", 64), short_config(0.05, 64));
    CHECK(trace.winding == 2);
    const auto r = decay_rates(trace, 0.0, 0.05);
    CHECK(r.kbar0 == doctest::Approx(4 * pi / trace.length0()));
    CHECK(r.d_ok());
  }
  SUBCASE("window errors") {
    const auto trace = run(polar_curve({{3, 0.1, 0.0}}, 32), short_config(0.01, 32));
    CHECK_THROWS_AS(decay_rates(trace, 0.5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(decay_rates(trace, 2.0, 3.0), std::invalid_argument);
  }
}

TEST_CASE("convexity waiting time") {
  CHECK(convexity_waiting_time(run(make_circle(1.0, 1, {}, 16), short_config(0.1, 16))) == 0.0);
  const auto trace = run(polar_curve({{3, 0.3, 0.0}}, 64), short_config(0.05, 64));
  CHECK(trace.rows.front().min_k < 0.0);
  const auto wait = convexity_waiting_time(trace);
  REQUIRE(wait.has_value());
  CHECK(*wait > 0.0);
  CHECK(*wait < 0.05);
}

TEST_CASE("wirtinger bound") {
  CHECK(wirtinger_bound(2 * pi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wirtinger_bound(1.0) == doctest::Approx(6.416e-4).epsilon(1e-3));
  CHECK_THROWS_AS(wirtinger_bound(0.0), std::invalid_argument);
}

TEST_CASE("parabolic scaling law") {
  // lambda = 2: spatial factor 2, time factor 16; both exact in binary.
  const auto c = polar_curve({{3, 0.1, 0.0}}, 32);
  auto base = short_config(0.05, 32);
  auto scaled = base;
  scaled.t_end *= 16;
  scaled.dt_init *= 16;
  scaled.dt_max *= 16;
  scaled.dt_min *= 16;
  const auto a = run(c, base);
  const auto b = run(c.scaled(2.0), scaled);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(rel(b.rows[i].t, 16 * a.rows[i].t) < 1e-9);
    CHECK(rel(b.rows[i].length, 2 * a.rows[i].length) < 1e-9);
  }
  // same physical times with unscaled step controls
  auto loose = scaled;
  loose.dt_init = base.dt_init;
  loose.dt_max = base.dt_max;
  loose.dt_min = base.dt_min;
  const auto d = run(c.scaled(2.0), loose);
  CHECK(rel(d.rows.back().length, 2 * a.rows.back().length) < 1e-6);
  CHECK(rel(d.rows.back().area, 4 * a.rows.back().area) < 1e-6);
}

TEST_CASE("inverse isoperimetric ratio grows along the flow") {
  const auto trace = run(polar_curve({{2, 0.2, 0.0}, {5, 0.02, 1.0}}, 64), short_config(0.05, 64));
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    const auto& r = trace.rows[i];
    const auto& p = trace.rows[i - 1];
    CHECK(4 * pi * r.area / (r.length * r.length) >= 4 * pi * p.area / (p.length * p.length) - 1e-9);
  }
}
