#include "cdflow/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cdflow {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(const FlowTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << format_number(r.t) << ',' << format_number(r.dt) << ',' << format_number(r.length) << ','
        << format_number(r.area) << ',' << format_number(r.defect) << ',' << format_number(r.oscillation) << ','
        << format_number(r.ks_norm2_sq) << ',' << format_number(r.min_k) << ',' << format_number(r.max_abs_k)
        << '\n';
  }
}

void write_trace_csv(const FlowTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_trace_csv(trace, out);
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw IoError(path + ": unexpected trace header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(fields, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != 9) throw IoError(path + ": expected 9 columns, got " + std::to_string(v.size()));
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
  }
  return rows;
}

nlohmann::json config_to_json(const FlowConfig& c) {
  return {{"dt_init", c.dt_init},
          {"dt_min", c.dt_min},
          {"dt_max", c.dt_max},
          {"t_end", c.t_end},
          {"tolerance_area", c.tolerance_area},
          {"tolerance_length_increase", c.tolerance_length_increase},
          {"k_max_blowup", c.k_max_blowup},
          {"resample_every", c.resample_every},
          {"n_modes", c.n_modes},
          {"audit_every", c.audit_every},
          {"local_tolerance", c.local_tolerance},
          {"max_steps", c.max_steps}};
}

void update_config(FlowConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw IoError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "dt_init") c.dt_init = value.get<double>();
    else if (key == "dt_min") c.dt_min = value.get<double>();
    else if (key == "dt_max") c.dt_max = value.get<double>();
    else if (key == "t_end") c.t_end = value.get<double>();
    else if (key == "tolerance_area") c.tolerance_area = value.get<double>();
    else if (key == "tolerance_length_increase") c.tolerance_length_increase = value.get<double>();
    else if (key == "k_max_blowup") c.k_max_blowup = value.get<double>();
    else if (key == "resample_every") c.resample_every = value.get<int>();
    else if (key == "n_modes") c.n_modes = value.get<int>();
    else if (key == "audit_every") c.audit_every = value.get<int>();
    else if (key == "local_tolerance") c.local_tolerance = value.get<double>();
    else if (key == "max_steps") c.max_steps = value.get<long>();
    else throw IoError("unknown config key '" + key + "'");
  }
}

nlohmann::json run_metadata(const FlowTrace& trace, const FlowConfig& config) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["L0"] = trace.length0();
  j["A0"] = trace.area0();
  j["winding"] = trace.winding;
  j["kbar0"] = 2.0 * trace.winding * std::numbers::pi / trace.length0();
  j["termination"] = to_string(trace.termination);
  if (std::isfinite(trace.T_est)) j["T_est"] = trace.T_est;
  if (std::isfinite(trace.fit_exponent)) j["fit_exponent"] = trace.fit_exponent;
  if (!trace.message.empty()) j["message"] = trace.message;
  return j;
}

FlowTrace load_run(const std::string& dir, FlowConfig* config) {
  const auto meta = read_json(dir + "/run.json");
  FlowTrace trace;
  trace.rows = read_trace_csv(dir + "/trace.csv");
  if (trace.rows.empty()) throw IoError(dir + ": empty trace");
  try {
    trace.winding = meta.at("winding").get<int>();
    trace.termination = termination_from_string(meta.at("termination").get<std::string>());
    if (meta.contains("T_est")) trace.T_est = meta["T_est"].get<double>();
    if (meta.contains("fit_exponent")) trace.fit_exponent = meta["fit_exponent"].get<double>();
    if (meta.contains("message")) trace.message = meta["message"].get<std::string>();
    if (config) update_config(*config, meta.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(dir + "/run.json: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(dir + "/run.json: " + e.what());
  }
  return trace;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace cdflow
