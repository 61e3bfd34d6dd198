#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cdflow/flow.hpp"

namespace cdflow {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Round-trip decimal with 17 significant digits.
std::string format_number(double value);

inline constexpr const char* kTraceHeader = "t,dt,L,A,D,K_osc,ks_norm2_sq,min_k,max_abs_k";

void write_trace_csv(const FlowTrace& trace, std::ostream& out);
void write_trace_csv(const FlowTrace& trace, const std::string& path);
/// Reads rows only; metadata lives in run.json.
std::vector<TraceRow> read_trace_csv(const std::string& path);

nlohmann::json config_to_json(const FlowConfig& config);
/// Keys missing from `j` keep the values already in `config`.
void update_config(FlowConfig& config, const nlohmann::json& j);

/// {config, L0, A0, kbar0, winding, termination, T_est?, fit_exponent?, message?}
nlohmann::json run_metadata(const FlowTrace& trace, const FlowConfig& config);

/// Trace rebuilt from a directory holding trace.csv and run.json.
FlowTrace load_run(const std::string& dir, FlowConfig* config = nullptr);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace cdflow
