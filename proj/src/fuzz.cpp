#include "cdflow/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "cdflow/report_io.hpp"

namespace cdflow {

namespace {

constexpr double kSeriesTolerance = 1e-7;
constexpr double kFormsTolerance = 1e-9;

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

const std::vector<std::string>& fuzz_check_names() {
  static const std::vector<std::string> names{"identities", "series", "lower", "lower_l1", "holder", "eqapp2"};
  return names;
}

void FuzzOptions::validate() const {
  if (n < 1) throw std::invalid_argument("fuzz needs n >= 1");
  if (amplitudes.empty()) throw std::invalid_argument("fuzz needs at least one amplitude");
  for (const auto& c : checks) {
    const auto& names = fuzz_check_names();
    if (std::find(names.begin(), names.end(), c) == names.end()) {
      throw std::invalid_argument("unknown check '" + c + "'");
    }
  }
}

int FuzzSummary::total_violations() const {
  int total = 0;
  for (const auto& [name, count] : violations) total += count;
  return total;
}

nlohmann::json FuzzSummary::to_json() const {
  nlohmann::json j;
  j["n_curves"] = n_curves;
  j["generation_failures"] = generation_failures;
  j["unresolved"] = unresolved;
  j["max_rel_residual"] = max_rel_residual;
  j["max_series_defect_rel"] = max_series_defect_rel;
  j["max_series_oscillation_rel"] = max_series_oscillation_rel;
  j["max_oscillation_forms_rel"] = max_oscillation_forms_rel;
  j["violations"] = violations;
  j["total_violations"] = total_violations();
  return j;
}

std::uint64_t fuzz_seed(const FuzzOptions& options, std::size_t amplitude_index, int i) {
  return options.seed + static_cast<std::uint64_t>(amplitude_index) * static_cast<std::uint64_t>(options.n) +
         static_cast<std::uint64_t>(i);
}

FuzzCurveResult evaluate_curve(std::uint64_t seed, double amplitude, const FuzzOptions& options) {
  FuzzCurveResult out;
  out.seed = seed;
  out.amplitude = amplitude;
  try {
    const auto curve = random_curve(
        {.seed = seed, .n_modes = options.n_modes, .decay_rate = options.decay_rate, .amplitude = amplitude});
    const auto& checks = options.checks;
    if (checks.count("identities")) out.identities = verify_identities(curve);
    if (checks.count("series")) {
      const auto report = geometric_report(curve, 0);
      const auto spec = spectrum_of(curve);
      out.defect = report.defect;
      out.oscillation = report.oscillation;
      out.defect_series = series_defect(spec);
      out.oscillation_series = series_oscillation(spec);
      out.oscillation_cubic = series_oscillation_cubic(spec);
    }
    if (checks.count("lower")) out.lower = lower_estimate(curve);
    if (checks.count("lower_l1")) out.lower_l1 = lower_estimate_l1(curve);
    if (checks.count("holder")) out.holder = holder_chain(curve);
    if (checks.count("eqapp2")) out.eqapp2 = check_eqapp2(curve);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<FuzzCurveResult> run_fuzz(const FuzzOptions& options) {
  options.validate();
  const std::size_t total = options.amplitudes.size() * static_cast<std::size_t>(options.n);
  std::vector<FuzzCurveResult> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      const std::size_t a = idx / static_cast<std::size_t>(options.n);
      const int i = static_cast<int>(idx % static_cast<std::size_t>(options.n));
      results[idx] = evaluate_curve(fuzz_seed(options, a, i), options.amplitudes[a], options);
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

FuzzSummary summarize(const std::vector<FuzzCurveResult>& results, const FuzzOptions& options) {
  FuzzSummary s;
  for (const auto& name : options.checks) s.violations[name] = 0;
  auto violate = [&](const FuzzCurveResult& r, const std::string& check, double lhs, double rhs) {
    ++s.violations[check];
    s.violation_list.push_back({r.seed, r.amplitude, check, lhs, rhs});
  };
  for (const auto& r : results) {
    if (!r.error.empty()) {
      ++s.generation_failures;
      continue;
    }
    ++s.n_curves;
    bool unresolved = false;
    bool identity_failed = false;
    double worst = 0.0;
    for (const auto& rep : r.identities) {
      unresolved = unresolved || !rep.resolved;
      s.max_rel_residual = std::max(s.max_rel_residual, rep.rel_residual);
      if (!rep.passed() && rep.rel_residual > worst) {
        identity_failed = true;
        worst = rep.rel_residual;
      }
    }
    s.unresolved += unresolved;
    if (identity_failed) violate(r, "identities", worst, kIdentityTolerance);
    if (options.checks.count("series")) {
      const double d = rel(r.defect_series, r.defect);
      const double k = rel(r.oscillation_series, r.oscillation);
      const double forms = rel(r.oscillation_cubic, r.oscillation_series);
      s.max_series_defect_rel = std::max(s.max_series_defect_rel, d);
      s.max_series_oscillation_rel = std::max(s.max_series_oscillation_rel, k);
      s.max_oscillation_forms_rel = std::max(s.max_oscillation_forms_rel, forms);
      if (d >= kSeriesTolerance || k >= kSeriesTolerance || forms >= kFormsTolerance) {
        violate(r, "series", std::max(d, k), kSeriesTolerance);
      }
    }
    if (options.checks.count("lower") && !r.lower.holds()) violate(r, "lower", r.lower.lhs, r.lower.rhs);
    if (options.checks.count("lower_l1") && !r.lower_l1.holds()) violate(r, "lower_l1", r.lower_l1.lhs, r.lower_l1.rhs);
    if (options.checks.count("holder") && !r.holder.holds()) violate(r, "holder", r.holder.lhs, r.holder.rhs);
    if (options.checks.count("eqapp2") && !r.eqapp2.holds()) violate(r, "eqapp2", r.eqapp2.lhs, r.eqapp2.rhs);
  }
  return s;
}

void write_fuzz_outputs(const std::vector<FuzzCurveResult>& results, const FuzzSummary& summary,
                        const FuzzOptions& options, const std::string& dir) {
  const auto num = format_number;
  if (options.checks.count("identities")) {
    std::ostringstream out;
    out << "seed,amplitude,q,series,integral,abs_residual,rel_residual,resolved\n";
    for (const auto& r : results) {
      for (const auto& rep : r.identities) {
        out << r.seed << ',' << num(r.amplitude) << ',' << rep.q << ',' << num(rep.series_side) << ','
            << num(rep.integral_side) << ',' << num(rep.abs_residual) << ',' << num(rep.rel_residual) << ','
            << (rep.resolved ? 1 : 0) << '\n';
      }
    }
    write_text(dir + "/identities.csv", out.str());
  }
  if (options.checks.count("series")) {
    std::ostringstream out;
    out << "seed,amplitude,D,D_series,K_osc,K_osc_series,K_osc_cubic\n";
    for (const auto& r : results) {
      if (!r.error.empty()) continue;
      out << r.seed << ',' << num(r.amplitude) << ',' << num(r.defect) << ',' << num(r.defect_series) << ','
          << num(r.oscillation) << ',' << num(r.oscillation_series) << ',' << num(r.oscillation_cubic) << '\n';
    }
    write_text(dir + "/series.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "seed,amplitude,check,lhs,rhs,slack,holds\n";
    for (const auto& r : results) {
      if (!r.error.empty()) continue;
      auto row = [&](const char* name, const InequalityCheck& c) {
        if (!options.checks.count(name)) return;
        out << r.seed << ',' << num(r.amplitude) << ',' << name << ',' << num(c.lhs) << ',' << num(c.rhs) << ','
            << num(c.slack()) << ',' << (c.holds() ? 1 : 0) << '\n';
      };
      row("lower", r.lower);
      row("lower_l1", r.lower_l1);
      row("holder", r.holder);
      row("eqapp2", r.eqapp2);
    }
    write_text(dir + "/inequalities.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "seed,amplitude,check,lhs,rhs\n";
    for (const auto& v : summary.violation_list) {
      out << v.seed << ',' << num(v.amplitude) << ',' << v.check << ',' << num(v.lhs) << ',' << num(v.rhs) << '\n';
    }
    write_text(dir + "/violations.csv", out.str());
  }
  write_json(dir + "/summary.json", summary.to_json());
}

}  // namespace cdflow
