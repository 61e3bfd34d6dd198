#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdflow/identities.hpp"

namespace cdflow {

/// Check names: identities, series, lower, lower_l1, holder, eqapp2.
const std::vector<std::string>& fuzz_check_names();

struct FuzzOptions {
  int n = 1000;  // curves per amplitude
  std::uint64_t seed = 42;
  std::vector<double> amplitudes{0.2};
  int n_modes = kDefaultModes;
  double decay_rate = 3.0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::set<std::string> checks{"identities", "series", "lower", "lower_l1", "holder", "eqapp2"};

  void validate() const;
};

struct FuzzCurveResult {
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  std::string error;  // generation failure, empty otherwise
  std::vector<IdentityReport> identities;
  double defect = 0.0, defect_series = 0.0;
  double oscillation = 0.0, oscillation_series = 0.0, oscillation_cubic = 0.0;
  InequalityCheck lower, lower_l1, holder;
  EqApp2Check eqapp2;
};

struct FuzzViolation {
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct FuzzSummary {
  int n_curves = 0;
  int generation_failures = 0;
  int unresolved = 0;
  double max_rel_residual = 0.0;
  double max_series_defect_rel = 0.0;
  double max_series_oscillation_rel = 0.0;
  double max_oscillation_forms_rel = 0.0;
  std::map<std::string, int> violations;  // per check
  std::vector<FuzzViolation> violation_list;

  int total_violations() const;
  nlohmann::json to_json() const;
};

/// Seed of curve i at amplitude index a: options.seed + a * n + i.
std::uint64_t fuzz_seed(const FuzzOptions& options, std::size_t amplitude_index, int i);

/// Evaluates one curve; throws nothing, generation errors land in `error`.
FuzzCurveResult evaluate_curve(std::uint64_t seed, double amplitude, const FuzzOptions& options);

/// All curves in amplitude-major order, independent of the thread count.
std::vector<FuzzCurveResult> run_fuzz(const FuzzOptions& options);
FuzzSummary summarize(const std::vector<FuzzCurveResult>& results, const FuzzOptions& options);

/// identities.csv, series.csv, inequalities.csv, violations.csv, summary.json.
void write_fuzz_outputs(const std::vector<FuzzCurveResult>& results, const FuzzSummary& summary,
                        const FuzzOptions& options, const std::string& dir);

}  // namespace cdflow
