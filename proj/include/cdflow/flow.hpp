#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdflow/curve.hpp"

namespace cdflow {

/// dt_min could not satisfy the acceptance rules.
class StepFailure : public CurveError {
 public:
  using CurveError::CurveError;
};

struct FlowConfig {
  double dt_init = 1e-5;
  double dt_min = 1e-14;
  double dt_max = 1e-2;
  double t_end = 1.0;
  double tolerance_area = 1e-9;              // per-step relative area jump
  double tolerance_length_increase = 1e-11;  // per-step relative length increase
  double k_max_blowup = 200.0;
  int resample_every = 5;
  int n_modes = kDefaultModes;
  int audit_every = 1;
  double local_tolerance = 1e-10;  // step-doubling error, relative to L
  long max_steps = 5'000'000;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct FlowState {
  ClosedCurve curve;
  double t = 0.0;
  long step_count = 0;
  GeometricReport last_report;
  double dt = 0.0;  // proposal for the next step
  double length0 = 0.0;
  double area0 = 0.0;
  bool blowup = false;
  int rejected = 0;  // rejections during the last call to step
};

FlowState initial_state(const ClosedCurve& curve, const FlowConfig& config);

enum class Termination { running, reached_t_end, singularity, step_failure };
std::string to_string(Termination termination);
Termination termination_from_string(const std::string& text);

struct TraceRow {
  double t = 0.0;
  double dt = 0.0;
  double length = 0.0;
  double area = 0.0;
  double defect = 0.0;
  double oscillation = 0.0;
  double ks_norm2_sq = 0.0;
  double min_k = 0.0;
  double max_abs_k = 0.0;
};

struct FlowTrace {
  std::vector<TraceRow> rows;
  Termination termination = Termination::running;
  int winding = 1;
  double T_est = std::nan("");
  double fit_exponent = std::nan("");
  std::string message;
  std::optional<ClosedCurve> final_curve;

  double length0() const { return rows.front().length; }
  double area0() const { return rows.front().area; }
};

/// Normal velocity -k_ss nu on the default grid of the curve.
std::vector<Complex> velocity(const ClosedCurve& curve);

/// One accepted step (ETDRK4 with step doubling); retries with halved dt until
/// the acceptance rules hold. Throws StepFailure below dt_min.
FlowState step(const FlowState& state, const FlowConfig& config);

/// Audited row for a curve at time t. D comes from the arclength series when
/// omega != 0, avoiding the cancellation in L^2 - 4 omega pi A.
TraceRow trace_row(const ClosedCurve& curve, double t, double dt);

FlowTrace run(const ClosedCurve& initial, const FlowConfig& config);

/// Linear fit of max|k|^-4 against t over the last decade of growth.
/// Returns {T_est, exponent of max|k| ~ (T - t)^exponent}.
std::pair<double, double> estimate_blowup(const std::vector<TraceRow>& rows);

struct AuditViolation {
  char check = '?';  // letter of the failed check, see audit
  std::size_t row = 0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditViolation> violations;
  double max_area_drift = 0.0;
  double max_dl_error = 0.0;  // worst relative mismatch of dL/dt vs -||k_s||^2
  double max_dd_error = 0.0;
  std::size_t rows_checked = 0;

  bool passed() const { return violations.empty(); }
  /// First failing check letter, or 0.
  char first_failure() const { return violations.empty() ? 0 : violations.front().check; }
};

/// Checks (a) dL/dt = -||k_s||^2, (b) area drift, (c) D nonincreasing,
/// (d) dD/dt = -2L||k_s||^2, (e) L^2 >= 4 pi A0, (f) 1/I_pi nondecreasing,
/// (g) L nonincreasing. Derivative checks skip rows with ||k_s||^2 <= 1e-6.
AuditReport audit(const FlowTrace& trace, double L0, double A0, double derivative_tolerance = 0.05);

struct DecayRates {
  double slope_D = 0.0;
  double slope_Ko = 0.0;
  double slope_ks = 0.0;
  double kbar0 = 0.0;
  double bound_D = 0.0;   // -4 kbar0^4
  double bound_Ko = 0.0;  // -2 kbar0^4
  double bound_ks = 0.0;  // -kbar0^4
  std::size_t samples = 0;

  bool d_ok() const { return slope_D <= 0.9 * bound_D; }
  bool ko_ok() const { return slope_Ko <= 0.9 * bound_Ko; }
  bool ks_ok() const { return slope_ks <= 0.9 * bound_ks; }
  bool passed() const { return d_ok() && ko_ok() && ks_ok(); }
};

/// Least-squares slopes of log D, log K_osc, log ||k_s||^2 over [t_lo, t_hi].
/// Throws std::invalid_argument when a value sits at round-off level
/// (D <= 1e-20 L0^2, K_osc <= 1e-16, ||k_s||^2 <= 1e-14 L0^-3).
DecayRates decay_rates(const FlowTrace& trace, double t_lo, double t_hi);

/// First row time after which min k stays positive; nullopt if never.
std::optional<double> convexity_waiting_time(const FlowTrace& trace);

/// L0^4 / (16 pi^4).
double wirtinger_bound(double L0);

}  // namespace cdflow
