// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance            run everything
//   acceptance --only id  run one criterion
//   acceptance --list
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "cdflow/flow.hpp"
#include "cdflow/fuzz.hpp"
#include "cdflow/presets.hpp"
#include "cdflow/report_io.hpp"
#include "cdflow/shrinker.hpp"

using namespace cdflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> check;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FuzzOptions corpus(std::vector<double> amplitudes, std::set<std::string> checks) {
  FuzzOptions o;
  o.n = 1000;
  o.seed = 20240611;
  o.amplitudes = std::move(amplitudes);
  o.n_modes = 128;
  o.decay_rate = 3.0;
  o.checks = std::move(checks);
  return o;
}

Outcome identity_suite() {
  Stopwatch clock;
  const auto options = corpus({0.2}, {"identities"});
  const auto summary = summarize(run_fuzz(options), options);
  const double elapsed = clock.seconds();
  const bool ok = summary.generation_failures == 0 && summary.violations.at("identities") == 0 &&
                  summary.max_rel_residual < 1e-7 && elapsed < 60.0;
  return {ok, "curves=" + std::to_string(summary.n_curves) + " max_rel=" + fmt(summary.max_rel_residual) +
                  " violations=" + std::to_string(summary.violations.at("identities")) +
                  " unresolved=" + std::to_string(summary.unresolved) + " time=" + fmt(elapsed) + "s"};
}

Outcome series_suite() {
  const auto options = corpus({0.2}, {"series"});
  const auto s = summarize(run_fuzz(options), options);
  const bool ok = s.generation_failures == 0 && s.max_series_defect_rel < 1e-7 &&
                  s.max_series_oscillation_rel < 1e-7 && s.max_oscillation_forms_rel < 1e-9;
  return {ok, "D=" + fmt(s.max_series_defect_rel) + " K_osc=" + fmt(s.max_series_oscillation_rel) +
                  " forms=" + fmt(s.max_oscillation_forms_rel)};
}

Outcome inequality_suite() {
  const auto options = corpus({0.05, 0.2, 0.5}, {"lower", "holder", "eqapp2"});
  const auto s = summarize(run_fuzz(options), options);
  std::ostringstream detail;
  detail << "curves=" << s.n_curves;
  for (const auto& [name, count] : s.violations) detail << " " << name << "=" << count;
  for (const auto& v : s.violation_list) {
    if (v.check != "eqapp2") continue;
    detail << " first eqapp2 violation seed=" << v.seed << " amp=" << v.amplitude << " lhs=" << fmt(v.lhs)
           << " rhs=" << fmt(v.rhs);
    break;
  }
  return {s.generation_failures == 0 && s.total_violations() == 0, detail.str()};
}

Outcome counterexample() {
  const auto r = counterexample_remark(100.0);
  return {r.sup_deviation >= 100.0 && r.sup_deviation > r.length,
          "sup=" + fmt(r.sup_deviation) + " L=" + fmt(r.length)};
}

FlowTrace perturbed_run(double* seconds) {
  FlowConfig config;
  config.t_end = 5.0;
  config.n_modes = 128;
  Stopwatch clock;
  auto trace = run(make_preset("perturbed3", 128), config);
  if (seconds) *seconds = clock.seconds();
  return trace;
}

Outcome flow_conservation() {
  double elapsed = 0.0;
  const auto trace = perturbed_run(&elapsed);
  const auto report = audit(trace, trace.length0(), trace.area0(), 0.05);
  const bool ok = trace.termination == Termination::reached_t_end && report.passed() && elapsed < 30.0;
  std::string detail = "termination=" + to_string(trace.termination) + " area_drift=" + fmt(report.max_area_drift) +
                       " dL_err=" + fmt(report.max_dl_error) + " dD_err=" + fmt(report.max_dd_error) +
                       " rows=" + std::to_string(trace.rows.size()) + " time=" + fmt(elapsed) + "s";
  if (!report.passed()) detail += std::string(" first_failure=") + report.first_failure();
  return {ok, detail};
}

Outcome decay_window() {
  const auto trace = perturbed_run(nullptr);
  const double final_ko = trace.rows.back().oscillation;
  const std::string tail = " final_K_osc=" + fmt(final_ko) + (final_ko < 1e-8 ? " (<1e-8)" : " (>=1e-8)");
  try {
    const auto r = decay_rates(trace, 1.0, 4.0);
    return {r.passed() && final_ko < 1e-8, "slopes D=" + fmt(r.slope_D) + "/" + fmt(0.9 * r.bound_D) + " K_osc=" +
                                               fmt(r.slope_Ko) + "/" + fmt(0.9 * r.bound_Ko) + " ks=" +
                                               fmt(r.slope_ks) + "/" + fmt(0.9 * r.bound_ks) + tail};
  } catch (const std::exception& e) {
    return {false, std::string("window [1,4] not measurable: ") + e.what() + tail};
  }
}

Outcome figure_eight() {
  FlowConfig config;
  config.t_end = 10.0;
  config.n_modes = 128;
  auto fine = config;
  fine.dt_init /= 2;
  fine.dt_max /= 2;
  fine.local_tolerance /= 32;
  const auto curve = make_preset("figure8", 128);
  const auto a = run(curve, config);
  const auto b = run(curve, fine);
  const double bound = wirtinger_bound(a.length0());
  std::string detail = "termination=" + to_string(a.termination) + " T_est=" + fmt(a.T_est) + " bound=" + fmt(bound) +
                       " exponent=" + fmt(a.fit_exponent);
  if (a.termination != Termination::singularity || b.termination != Termination::singularity)
    return {false, detail + " halved-dt termination=" + to_string(b.termination)};
  try {
    const double ca = type_one_diagnostic(a, a.T_est).C_est;
    const double cb = type_one_diagnostic(b, b.T_est).C_est;
    const double spread = rel(cb, ca);
    return {a.T_est <= bound && spread < 0.1,
            detail + " C_est=" + fmt(ca) + " halved=" + fmt(cb) + " change=" + fmt(spread)};
  } catch (const std::exception& e) {
    return {false, detail + " " + e.what()};
  }
}

Outcome shrinker_lab() {
  double circle_err = 0.0;
  for (double r : {0.5, 1.0, 3.0}) {
    const auto res = shrinker_residual(make_circle(r, 1, {0.3, -0.2}, 128));
    circle_err = std::max(circle_err, std::abs(res.linf_norm - r) / r);
  }
  try {
    const auto a = scale_search(lemniscate(1.0, 64), 0.1, 10.0);
    const auto b = scale_search(lemniscate(1.0, 128), 0.1, 10.0);
    const double spread = std::abs(a.a_star - b.a_star);
    const double worst = std::max(a.residual_at_star.relative(), b.residual_at_star.relative());
    return {circle_err < 1e-10 && worst < 1e-3 && spread < 1e-6,
            "circle_linf_err=" + fmt(circle_err) + " a_star=" + std::to_string(a.a_star) + " rel_residual=" +
                fmt(worst) + " N64_vs_N128=" + fmt(spread)};
  } catch (const std::exception& e) {
    return {false, std::string("scale search: ") + e.what()};
  }
}

Outcome scaling_law() {
  const double lambda = 2.0, factor = 16.0;
  FlowConfig base;
  base.t_end = 1.0;
  auto scaled = base;
  scaled.t_end *= factor;
  scaled.dt_init *= factor;
  scaled.dt_max *= factor;
  scaled.dt_min *= factor;
  const auto curve = make_preset("perturbed3", base.n_modes);
  const auto a = run(curve, base);
  const auto b = run(curve.scaled(lambda), scaled);
  if (a.rows.size() != b.rows.size())
    return {false, "row counts differ: " + std::to_string(a.rows.size()) + " vs " + std::to_string(b.rows.size())};
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (i > 0) worst = std::max(worst, rel(y.t, factor * x.t));
    worst = std::max({worst, rel(y.length, lambda * x.length), rel(y.area, lambda * lambda * x.area),
                      rel(y.max_abs_k, x.max_abs_k / lambda)});
  }
  double shape = 0.0, norm = 0.0;
  const auto& ca = *a.final_curve;
  const auto& cb = *b.final_curve;
  for (int p = -ca.n_modes(); p <= ca.n_modes(); ++p) {
    shape = std::max(shape, std::abs(cb.mode(p) - lambda * ca.mode(p)));
    norm = std::max(norm, std::abs(lambda * ca.mode(p)));
  }
  worst = std::max(worst, shape / norm);
  return {a.termination == Termination::reached_t_end && worst < 1e-6,
          "rows=" + std::to_string(a.rows.size()) + " max_rel=" + fmt(worst)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("cdlab_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto options = corpus({0.05, 0.5}, {"identities", "series", "lower", "lower_l1", "holder", "eqapp2"});
  options.n = 50;
  options.threads = 4;
  FlowConfig config;
  config.t_end = 0.1;
  config.n_modes = 64;
  std::vector<std::string> files{"identities.csv", "series.csv", "inequalities.csv", "violations.csv", "trace.csv"};
  for (const char* run_name : {"a", "b"}) {
    const auto dir = (root / run_name).string();
    fs::create_directories(dir);
    const auto results = run_fuzz(options);
    write_fuzz_outputs(results, summarize(results, options), options, dir);
    write_trace_csv(run(make_preset("perturbed3", 64), config), dir + "/trace.csv");
  }
  int differing = 0;
  std::size_t bytes = 0;
  for (const auto& f : files) {
    const auto a = read_text((root / "a" / f).string());
    bytes += a.size();
    differing += a.empty() || a != read_text((root / "b" / f).string());
  }
  fs::remove_all(root);
  return {differing == 0, "files=" + std::to_string(files.size()) + " differing=" + std::to_string(differing) +
                              " bytes=" + std::to_string(bytes)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"identities", "identity suite, 1000 curves, q=1..8", identity_suite},
      {"series", "series forms of D and K_osc", series_suite},
      {"inequalities", "inequality suite, 3000 curves", inequality_suite},
      {"counterexample", "off-centre circle, P=100", counterexample},
      {"flow_conservation", "perturbed circle to t=5: conservation and monotonicity", flow_conservation},
      {"decay_window", "decay slopes on t in [1,4]", decay_window},
      {"figure_eight", "omega=0 finite time and Type I stability", figure_eight},
      {"shrinker", "circle residual and lemniscate scale", shrinker_lab},
      {"scaling", "parabolic scaling, lambda=2", scaling_law},
      {"determinism", "byte-identical CSVs", determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string only;
  bool list = false;
  app.add_option("--only", only, "run a single criterion");
  app.add_flag("--list", list, "print criterion ids");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : criteria()) std::cout << c.id << "  " << c.title << "\n";
    return 0;
  }
  int ran = 0, failed = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && c.id != only) continue;
    ++ran;
    Stopwatch clock;
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << c.id << " (" << c.title << ") " << outcome.detail << " ["
              << fmt(clock.seconds()) << "s]" << std::endl;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion: " << only << "\n";
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
