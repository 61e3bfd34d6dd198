#include "cdflow/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cdflow/flow.hpp"
#include "cdflow/fuzz.hpp"
#include "cdflow/identities.hpp"
#include "cdflow/presets.hpp"
#include "cdflow/report_io.hpp"
#include "cdflow/shrinker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cdflow {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string out = "cdlab-out";
  std::uint64_t seed = 42;
  unsigned threads = 0;
  int n_modes = kDefaultModes;
  bool quiet = false;
  std::string config;
};

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError(std::string(what) + " expects a,b");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + ": cannot parse '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// One manifest per output directory, written before the heavy work starts.
class Manifest {
 public:
  Manifest(std::string dir, const std::vector<std::string>& args, json config, json seeds)
      : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    std::string line;
    for (const auto& a : args) line += (line.empty() ? "" : " ") + a;
    body_ = {{"command_line", line}, {"config", std::move(config)},   {"seeds", std::move(seeds)},
             {"artifacts", json::array()}, {"tool_version", kToolVersion}, {"wall_clock", {{"started", now_iso()}}}};
    write();
  }

  void artifact(const std::string& name) { body_["artifacts"].push_back(name); }

  void finish(int exit_code) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    body_["wall_clock"]["elapsed_seconds"] = elapsed;
    body_["exit_code"] = exit_code;
    write();
  }

 private:
  void write() const { write_json(dir_ + "/manifest.json", body_); }

  std::string dir_;
  std::chrono::steady_clock::time_point start_;
  json body_;
};

// Follow-up commands on an existing run directory extend its manifest.
void record_followup(const std::string& dir, const std::vector<std::string>& args, const std::vector<std::string>& files) {
  const auto path = dir + "/manifest.json";
  json body = fs::exists(path) ? read_json(path) : json::object();
  std::string line;
  for (const auto& a : args) line += (line.empty() ? "" : " ") + a;
  body["followups"].push_back({{"command_line", line}, {"artifacts", files}, {"wall_clock", now_iso()}});
  write_json(path, body);
}

FlowConfig load_flow_config(const Globals& g) {
  FlowConfig config;
  config.n_modes = g.n_modes;
  if (!g.config.empty()) {
    const auto j = read_json(g.config);
    update_config(config, j.contains("flow") ? j["flow"] : j);
  }
  return config;
}

json identity_json(const IdentityReport& r) {
  return {{"q", r.q},
          {"series", r.series_side},
          {"integral", r.integral_side},
          {"abs_residual", r.abs_residual},
          {"rel_residual", r.rel_residual},
          {"resolved", r.resolved}};
}

json residual_json(const ShrinkerResidual& r) {
  return {{"l2_norm", r.l2_norm},
          {"linf_norm", r.linf_norm},
          {"support_l2", r.support_l2},
          {"relative", r.relative()},
          {"scale_used", r.scale_used}};
}

}  // namespace

ClosedCurve resolve_curve(const std::string& spec, int n_modes) {
  constexpr std::string_view prefix = "preset:";
  if (spec.rfind(prefix, 0) == 0) return make_preset(spec.substr(prefix.size()), n_modes);
  return load_curve(spec);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral simulator and verification lab for curve diffusion flow", "cdlab"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "base seed");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");
  app.add_option("--n-modes", g.n_modes, "Fourier modes N")->check(CLI::Range(kMinModes, 1 << 16));
  app.add_flag("--quiet", g.quiet, "suppress progress output");
  app.add_option("--config", g.config, "JSON config file; flags override it");

  std::function<int()> action;
  auto log = [&](const std::string& msg) {
    if (!g.quiet) out << msg << '\n';
  };

  // flow
  auto* flow = app.add_subcommand("flow", "curve diffusion flow runs");
  flow->require_subcommand(1);
  std::string initial = "preset:perturbed3";
  double t_end = std::nan("");
  auto* flow_run = flow->add_subcommand("run", "integrate and write trace.csv, run.json");
  flow_run->add_option("--initial", initial, "curve file or preset:<name>");
  flow_run->add_option("--t-end", t_end, "final time");
  flow_run->callback([&] {
    action = [&] {
      auto config = load_flow_config(g);
      if (!std::isnan(t_end)) config.t_end = t_end;
      config.validate();
      const auto curve = resolve_curve(initial, config.n_modes);
      Manifest manifest(g.out, args, {{"flow", config_to_json(config)}, {"initial", initial}}, json::object());
      log("flow run: " + initial + " to t = " + format_number(config.t_end));
      const auto trace = run(curve, config);
      write_trace_csv(trace, g.out + "/trace.csv");
      auto meta = run_metadata(trace, config);
      int code = kExitOk;
      if (trace.termination == Termination::step_failure) code = kExitViolation;
      if (trace.winding == 0) {
        const double bound = wirtinger_bound(trace.length0());
        meta["wirtinger_bound"] = bound;
        if (trace.termination == Termination::singularity && !(trace.T_est <= bound)) code = kExitViolation;
      }
      write_json(g.out + "/run.json", meta);
      save_curve(*trace.final_curve, g.out + "/final_curve.json");
      for (const char* a : {"trace.csv", "run.json", "final_curve.json"}) manifest.artifact(a);
      log("termination: " + to_string(trace.termination) + ", rows " + std::to_string(trace.rows.size()));
      manifest.finish(code);
      return code;
    };
  });

  std::string run_dir;
  double tolerance = 0.05;
  auto* flow_audit = flow->add_subcommand("audit", "check monotone and conserved quantities of a run");
  flow_audit->add_option("dir", run_dir, "run directory")->required();
  flow_audit->add_option("--tolerance", tolerance, "relative tolerance for time-derivative checks");
  flow_audit->callback([&] {
    action = [&] {
      const auto trace = load_run(run_dir);
      const auto report = audit(trace, trace.length0(), trace.area0(), tolerance);
      json j = {{"passed", report.passed()},
                {"rows_checked", report.rows_checked},
                {"max_area_drift", report.max_area_drift},
                {"max_dl_error", report.max_dl_error},
                {"max_dd_error", report.max_dd_error},
                {"violations", report.violations.size()}};
      std::ostringstream csv;
      csv << "check,row,t,detail\n";
      for (const auto& v : report.violations) {
        csv << v.check << ',' << v.row << ',' << format_number(trace.rows[v.row].t) << ',' << v.detail << '\n';
      }
      write_json(run_dir + "/audit.json", j);
      write_text(run_dir + "/audit_violations.csv", csv.str());
      record_followup(run_dir, args, {"audit.json", "audit_violations.csv"});
      if (!report.passed()) {
        log(std::string("audit failed, first check: ") + report.first_failure() + " at row " +
            std::to_string(report.violations.front().row));
        return int{kExitViolation};
      }
      log("audit passed over " + std::to_string(report.rows_checked) + " rows");
      return int{kExitOk};
    };
  });

  std::string window = "1,4";
  auto* flow_rates = flow->add_subcommand("rates", "fit exponential decay slopes on a window");
  flow_rates->add_option("dir", run_dir, "run directory")->required();
  flow_rates->add_option("--window", window, "time window a,b");
  flow_rates->callback([&] {
    action = [&] {
      const auto [lo, hi] = parse_pair(window, "--window");
      const auto trace = load_run(run_dir);
      json j = {{"window", {lo, hi}}};
      int code = kExitOk;
      try {
        const auto r = decay_rates(trace, lo, hi);
        j.update({{"slope_D", r.slope_D},   {"slope_Ko", r.slope_Ko}, {"slope_ks", r.slope_ks},
                  {"kbar0", r.kbar0},       {"bound_D", r.bound_D},   {"bound_Ko", r.bound_Ko},
                  {"bound_ks", r.bound_ks}, {"samples", r.samples},   {"passed", r.passed()}});
        j["final_K_osc"] = trace.rows.back().oscillation;
        if (!r.passed()) code = kExitViolation;
      } catch (const std::invalid_argument& e) {
        j["error"] = e.what();
        j["passed"] = false;
        code = kExitViolation;
      }
      write_json(run_dir + "/rates.json", j);
      record_followup(run_dir, args, {"rates.json"});
      log(j.dump());
      return code;
    };
  });

  // identities
  std::string curve_spec = "preset:circle";
  std::string q_spec = "all";
  auto* ident = app.add_subcommand("identities", "moment identities and series forms for one curve");
  auto* preset_opt = ident->add_option("--preset", curve_spec, "preset name");
  auto* curve_opt = ident->add_option("--curve", curve_spec, "curve file or preset:<name>");
  preset_opt->excludes(curve_opt);
  ident->add_option("--q", q_spec, "all or a comma list from 1..8");
  ident->callback([&] {
    action = [&] {
      const std::string spec = preset_opt->count() ? "preset:" + curve_spec : curve_spec;
      std::vector<int> qs;
      if (q_spec == "all") {
        for (int q = 1; q <= kMaxMoment; ++q) qs.push_back(q);
      } else {
        for (const auto& s : split(q_spec)) {
          try {
            qs.push_back(std::stoi(s));
          } catch (const std::exception&) {
            throw UsageError("--q: cannot parse '" + s + "'");
          }
          if (qs.back() < 1 || qs.back() > kMaxMoment) throw UsageError("--q values must lie in 1..8");
        }
      }
      const auto curve = resolve_curve(spec, g.n_modes);
      Manifest manifest(g.out, args, {{"curve", spec}, {"q", q_spec}, {"n_modes", g.n_modes}}, json::object());
      const auto all = verify_identities(curve);
      std::ostringstream csv;
      csv << "q,series,integral,abs_residual,rel_residual,resolved\n";
      json reports = json::array();
      bool ok = true;
      for (int q : qs) {
        const auto& r = all[static_cast<std::size_t>(q - 1)];
        csv << q << ',' << format_number(r.series_side) << ',' << format_number(r.integral_side) << ','
            << format_number(r.abs_residual) << ',' << format_number(r.rel_residual) << ',' << (r.resolved ? 1 : 0)
            << '\n';
        reports.push_back(identity_json(r));
        ok = ok && r.passed();
      }
      json j = {{"curve", spec}, {"identities", reports}};
      if (curve.winding() != 0) {
        const auto spectrum = spectrum_of(curve);
        const auto geo = geometric_report(curve, 0);
        j["series"] = {{"D", geo.defect},
                       {"D_series", series_defect(spectrum)},
                       {"K_osc", geo.oscillation},
                       {"K_osc_series", series_oscillation(spectrum)},
                       {"K_osc_cubic", series_oscillation_cubic(spectrum)}};
      }
      write_text(g.out + "/identities.csv", csv.str());
      write_json(g.out + "/identities.json", j);
      manifest.artifact("identities.csv");
      manifest.artifact("identities.json");
      const int code = ok ? kExitOk : kExitViolation;
      manifest.finish(code);
      log(ok ? "all identities within tolerance" : "identity residual above tolerance");
      return code;
    };
  });

  // fuzz
  FuzzOptions fuzz_options;
  std::string checks = "identities,series,lower,lower_l1,holder,eqapp2";
  std::string amplitudes = "0.2";
  auto* fuzz = app.add_subcommand("fuzz", "seeded sweep over random curves");
  fuzz->add_option("--n", fuzz_options.n, "curves per amplitude")->check(CLI::PositiveNumber);
  fuzz->add_option("--check", checks, "comma list of checks");
  fuzz->add_option("--amplitudes", amplitudes, "comma list of amplitudes");
  fuzz->add_option("--decay", fuzz_options.decay_rate, "spectral decay rate");
  fuzz->callback([&] {
    action = [&] {
      fuzz_options.seed = g.seed;
      fuzz_options.threads = g.threads;
      fuzz_options.n_modes = g.n_modes;
      const auto names = split(checks);
      fuzz_options.checks = {names.begin(), names.end()};
      fuzz_options.amplitudes.clear();
      for (const auto& a : split(amplitudes)) {
        try {
          fuzz_options.amplitudes.push_back(std::stod(a));
        } catch (const std::exception&) {
          throw UsageError("--amplitudes: cannot parse '" + a + "'");
        }
      }
      try {
        fuzz_options.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      Manifest manifest(g.out, args,
                        {{"n", fuzz_options.n}, {"checks", names}, {"amplitudes", fuzz_options.amplitudes},
                         {"n_modes", fuzz_options.n_modes}, {"decay_rate", fuzz_options.decay_rate},
                         {"threads", fuzz_options.threads}},
                        {{"base", fuzz_options.seed}, {"rule", "base + amplitude_index * n + i"}});
      log("fuzz: " + std::to_string(fuzz_options.n * static_cast<int>(fuzz_options.amplitudes.size())) + " curves");
      const auto results = run_fuzz(fuzz_options);
      const auto summary = summarize(results, fuzz_options);
      write_fuzz_outputs(results, summary, fuzz_options, g.out);
      for (const char* a : {"identities.csv", "series.csv", "inequalities.csv", "violations.csv", "summary.json"}) {
        manifest.artifact(a);
      }
      const int code = summary.total_violations() == 0 && summary.generation_failures == 0 ? kExitOk : kExitViolation;
      manifest.finish(code);
      log(summary.to_json().dump());
      return code;
    };
  });

  // shrinker
  auto* shrink = app.add_subcommand("shrinker", "self-similar shrinker tools");
  shrink->require_subcommand(1);
  std::string shrink_curve;
  auto* residual = shrink->add_subcommand("residual", "residual of <eta,nu> = 4 k_ss");
  residual->add_option("--curve", shrink_curve, "curve file or preset:<name>")->required();
  residual->callback([&] {
    action = [&] {
      const auto curve = resolve_curve(shrink_curve, g.n_modes);
      Manifest manifest(g.out, args, {{"curve", shrink_curve}, {"n_modes", g.n_modes}}, json::object());
      const auto r = shrinker_residual(curve);
      const auto area = geometric_report(curve, 0).signed_area;
      json j = residual_json(r);
      j["signed_area"] = area;
      write_json(g.out + "/shrinker_residual.json", j);
      manifest.artifact("shrinker_residual.json");
      manifest.finish(kExitOk);
      log(j.dump());
      return int{kExitOk};
    };
  });

  std::string search_preset = "lemniscate";
  std::string bracket = "0.1,10";
  double search_tol = 1e-8;
  auto* search = shrink->add_subcommand("search", "golden-section search for the shrinker scale");
  search->add_option("--preset", search_preset, "preset name");
  search->add_option("--curve", shrink_curve, "curve file or preset:<name>");
  search->add_option("--bracket", bracket, "scale bracket a,b");
  search->add_option("--tolerance", search_tol, "tolerance on the scale");
  search->callback([&] {
    action = [&] {
      const auto [lo, hi] = parse_pair(bracket, "--bracket");
      const std::string spec = shrink_curve.empty() ? "preset:" + search_preset : shrink_curve;
      const auto base = resolve_curve(spec, g.n_modes);
      Manifest manifest(g.out, args, {{"curve", spec}, {"bracket", {lo, hi}}, {"tolerance", search_tol}, {"n_modes", g.n_modes}},
                        json::object());
      json j = {{"curve", spec}, {"bracket", {lo, hi}}};
      int code = kExitOk;
      try {
        const auto r = scale_search(base, lo, hi, search_tol);
        j.update({{"a_star", r.a_star},
                  {"reversed", r.reversed},
                  {"evaluations", r.evaluations},
                  {"residual_at_star", residual_json(r.residual_at_star)}});
      } catch (const ShrinkerError& e) {
        j["error"] = e.what();
        code = kExitViolation;
      }
      write_json(g.out + "/shrinker_search.json", j);
      manifest.artifact("shrinker_search.json");
      manifest.finish(code);
      log(j.dump());
      return code;
    };
  });

  std::string trace_dir;
  double T_override = std::nan("");
  auto* type_one = shrink->add_subcommand("typeI", "Type I diagnostic of a singular run");
  type_one->add_option("--trace", trace_dir, "run directory")->required();
  type_one->add_option("--T", T_override, "blow-up time (default: fitted T_est)");
  type_one->callback([&] {
    action = [&] {
      const auto trace = load_run(trace_dir);
      const double T = std::isnan(T_override) ? trace.T_est : T_override;
      if (!std::isfinite(T)) throw UsageError("trace has no T_est; pass --T");
      Manifest manifest(g.out, args, {{"trace", trace_dir}, {"T", T}}, json::object());
      const auto d = type_one_diagnostic(trace, T);
      json sensitivity = json::array();
      for (const auto& s : type_one_sensitivity(trace, T)) sensitivity.push_back({{"T", s.T_used}, {"C_est", s.C_est}});
      std::ostringstream csv;
      csv << "t,value\n";
      for (std::size_t i = 0; i < d.times.size(); ++i) csv << format_number(d.times[i]) << ',' << format_number(d.samples[i]) << '\n';
      write_text(g.out + "/typeI.csv", csv.str());
      const json j = {{"C_est", d.C_est}, {"T_used", d.T_used}, {"sensitivity", sensitivity}};
      write_json(g.out + "/typeI.json", j);
      manifest.artifact("typeI.csv");
      manifest.artifact("typeI.json");
      manifest.finish(kExitOk);
      log(j.dump());
      return int{kExitOk};
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cdlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "cdlab: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!action) {
    err << "cdlab: no command given\n";
    return kExitUsage;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    err << "cdlab: " << e.what() << '\n';
  } catch (const IoError& e) {
    err << "cdlab: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "cdlab: bad JSON: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    err << "cdlab: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "cdlab: " << e.what() << '\n';
  } catch (const CurveError& e) {
    err << "cdlab: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "cdlab: unexpected error: " << e.what() << '\n';
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace cdflow
