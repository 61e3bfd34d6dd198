#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cdflow/curve.hpp"

namespace cdflow {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitUsage = 2 };

/// "preset:<name>" or a curve JSON file.
ClosedCurve resolve_curve(const std::string& spec, int n_modes);

/// Entry point of the cdlab tool. Never throws; maps failures to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace cdflow
