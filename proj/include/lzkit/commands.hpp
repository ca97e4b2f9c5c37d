#pragma once

#include "lzkit/envelope.hpp"
#include "lzkit/flatland.hpp"

#include <string>
#include <vector>

namespace lzkit {

/// Exit-code contract: 0 when all asserted tolerances pass, 1 for a
/// tolerance/computation failure, 2 for usage or domain errors.
struct CommandResult {
  ResultEnvelope envelope;
  int exit_code = 0;
};

CommandResult cmd_simulate(const RunConfig& config);
CommandResult cmd_verify_integrability(const RunConfig& config);
CommandResult cmd_verify_deformation(const RunConfig& config);
CommandResult cmd_verify_functional(const RunConfig& config);
CommandResult cmd_fit_exponent(const RunConfig& config);
CommandResult cmd_recurrence(const RunConfig& config);

/// Render an envelope JSON file into one of the supported figure kinds:
/// "sweep", "residual", "convergence", "curvature".
void cmd_plot(const std::string& input_path, const std::string& output_path,
              const std::string& kind);

/// Parse "t=-5:5:1,tau=0.5:4:0.5" (inclusive ranges) into a grid.
std::vector<PathPoint> parse_grid_spec(const std::string& spec);

/// Full command-line interface; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace lzkit
