#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdflow/presets.hpp"
#include "cdflow/shrinker.hpp"
#include "oracles.hpp"

using namespace cdflow;
using std::numbers::pi;

TEST_CASE("lemniscate of Bernoulli") {
  for (double a : {0.5, 1.0, 3.0}) {
    const auto c = lemniscate(a, 64);
    CHECK(c.winding() == 0);
    CHECK(c.resolved());
    const auto r = geometric_report(c, 0);
    CHECK(std::abs(r.signed_area) < 1e-10 * a * a);
  }
  const double length = oracle::periodic_integral([](double t) { return oracle::bernoulli_speed(1.0, t); });
  CHECK(geometric_report(lemniscate(1.0, 64), 0).length == doctest::Approx(length).epsilon(1e-9));
  CHECK(length == doctest::Approx(5.2441).epsilon(1e-4));

  SUBCASE("two reflection symmetries of the spectrum") {
    const auto c = lemniscate(1.0, 64);
    for (int p = -64; p <= 64; ++p) {
      CHECK(std::abs(c.mode(p).imag()) < 1e-10);  // y -> -y
      const double sign = p % 2 == 0 ? 1.0 : -1.0;
      CHECK(std::abs(sign * c.mode(p) + std::conj(c.mode(-p))) < 1e-10);  // x -> -x
    }
  }
  CHECK_THROWS_AS(lemniscate(0.0, 64), std::invalid_argument);
}

TEST_CASE("shrinker residual") {
  SUBCASE("circles: residual is -r everywhere") {
    for (double r : {0.5, 1.0, 2.5}) {
      const auto res = shrinker_residual(make_circle(r, 1, {3.0, -1.0}, r < 1.0 ? 128 : 16));
      for (double v : res.pointwise.samples) CHECK(v == doctest::Approx(-r).epsilon(1e-10));
      CHECK(res.linf_norm == doctest::Approx(r).epsilon(1e-10));
      CHECK(res.l2_norm == doctest::Approx(r * std::sqrt(2 * pi * r)).epsilon(1e-10));
    }
  }
  SUBCASE("norms agree with the pointwise field") {
    const auto res = shrinker_residual(random_curve({.seed = 5, .n_modes = 32}));
    double sum = 0.0, peak = 0.0;
    for (std::size_t j = 0; j < res.pointwise.grid_size(); ++j) {
      sum += res.pointwise.samples[j] * res.pointwise.samples[j] * res.pointwise.weights[j];
      peak = std::max(peak, std::abs(res.pointwise.samples[j]));
    }
    CHECK(std::abs(std::sqrt(sum) - res.l2_norm) < 1e-10 * res.l2_norm);
    CHECK(peak == res.linf_norm);
  }
  SUBCASE("uniform scaling: lambda <g,nu> - 4 lambda^-3 k_ss") {
    const auto base = polar_curve({{2, 0.1, 0.0}}, 32);
    const auto at_one = sample_curve(translate_to_centroid(base), 2);
    const double lambda = 1.7;
    const auto scaled = shrinker_residual(base.scaled(lambda));
    for (std::size_t j = 0; j < at_one.size(); ++j) {
      const Complex g = at_one.position[j];
      const double h = g.real() * at_one.normal[j].real() + g.imag() * at_one.normal[j].imag();
      const double expected = lambda * h - 4.0 * std::pow(lambda, -3) * at_one.curvature[2][j];
      CHECK(scaled.pointwise.samples[j] == doctest::Approx(expected).epsilon(1e-9));
    }
  }
  SUBCASE("translation is removed") {
    const auto c = lemniscate(2.0, 64);
    CHECK(shrinker_residual(c.translated({4.0, 4.0})).l2_norm == doctest::Approx(shrinker_residual(c).l2_norm).epsilon(1e-10));
  }
}

TEST_CASE("scale search") {
  SUBCASE("lemniscate: a* from independent finite differences") {
    // <gamma, nu> = c k_ss at scale 1 means a^4 = 4 / c at the shrinker scale.
    const double c = oracle::bernoulli_support_ratio(1.0, 0.4);
    CHECK(oracle::bernoulli_support_ratio(1.0, 1.1) == doctest::Approx(c).epsilon(1e-6));
    const double expected = std::pow(4.0 / c, 0.25);

    const auto r64 = scale_search(lemniscate(1.0, 64), 0.1, 10.0);
    const auto r128 = scale_search(lemniscate(1.0, 128), 0.1, 10.0);
    CHECK(r64.a_star == doctest::Approx(expected).epsilon(1e-6));
    CHECK(std::abs(r64.a_star - r128.a_star) < 1e-6);
    CHECK(r64.residual_at_star.relative() < 1e-3);
    CHECK(r64.residual_at_star.scale_used == r64.a_star);
    // zero signed area for small-residual candidates
    CHECK(std::abs(geometric_report(lemniscate(r64.a_star, 64), 0).signed_area) < 1e-8);
  }
  SUBCASE("circle has no interior minimum") {
    CHECK_THROWS_AS(scale_search(make_circle(1.0, 1, {}, 16), 0.1, 10.0), ShrinkerError);
  }
  SUBCASE("mode-2 perturbed circle stays far from a shrinker") {
    const auto r = scale_search(polar_curve({{2, 0.1, 0.0}}, 32), 0.1, 10.0);
    CHECK(r.residual_at_star.relative() > 0.5);
  }
  SUBCASE("orientation reversal leaves the residual norm unchanged") {
    const auto c = lemniscate(1.5, 64);
    CHECK(shrinker_residual(c.reversed()).l2_norm == doctest::Approx(shrinker_residual(c).l2_norm).epsilon(1e-10));
  }
  CHECK_THROWS_AS(scale_search(lemniscate(1.0, 64), 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("parabolic rescaling") {
  const auto c = translate_to_centroid(lemniscate(1.0, 64));
  const auto same = rescale_parabolic(c, 2.0, 1.0);
  for (int p = -64; p <= 64; ++p) CHECK(std::abs(same.mode(p) - c.mode(p)) < 1e-12);
  const auto half = rescale_parabolic(c.translated({1.0, 2.0}), 17.0, 1.0);
  CHECK(geometric_report(half, 0).length == doctest::Approx(0.5 * geometric_report(c, 0).length).epsilon(1e-12));
  CHECK(std::abs(centroid(half)) < 1e-12);
  CHECK_THROWS_AS(rescale_parabolic(c, 1.0, 1.0), std::invalid_argument);

  SUBCASE("residual of the rescaled candidate matches the scale transform") {
    const auto base = polar_curve({{3, 0.05, 0.0}}, 32);
    const double factor = std::pow(16.0, -0.25);
    const auto direct = shrinker_residual(rescale_parabolic(base, 16.0, 0.0));
    const auto samples = sample_curve(translate_to_centroid(base), 2);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const Complex g = samples.position[j];
      const double h = g.real() * samples.normal[j].real() + g.imag() * samples.normal[j].imag();
      const double expected = factor * h - 4.0 * std::pow(factor, -3) * samples.curvature[2][j];
      CHECK(std::abs(direct.pointwise.samples[j] - expected) < 1e-8 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("Type I diagnostic") {
  SUBCASE("synthetic trace with ||k||^2 (T-t)^{1/4} = 1") {
    FlowTrace trace;
    trace.winding = 0;
    trace.termination = Termination::singularity;
    const double T = 0.5;
    for (int i = 0; i < 50; ++i) {
      TraceRow r;
      r.t = T * (1.0 - std::pow(0.8, i));
      r.length = 1.0;
      r.oscillation = std::pow(T - r.t, -0.25);  // ||k||^2 = K_osc / L for omega = 0
      trace.rows.push_back(r);
    }
    const auto d = type_one_diagnostic(trace, T);
    CHECK(d.C_est == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.T_used == T);
    CHECK(d.samples.size() == trace.rows.size());
    const auto spread = type_one_sensitivity(trace, T);
    REQUIRE(spread.size() == 3);
    CHECK(spread[0].C_est <= spread[2].C_est);
    CHECK_THROWS_AS(type_one_diagnostic(trace, 0.1), std::invalid_argument);
  }
  SUBCASE("non-singular trace is rejected") {
    FlowConfig config;
    config.t_end = 0.1;
    config.n_modes = 16;
    const auto trace = run(make_circle(1.0, 1, {}, 16), config);
    CHECK_THROWS_AS(type_one_diagnostic(trace, 1.0), std::invalid_argument);
  }
}
