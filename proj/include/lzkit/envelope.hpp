#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace lzkit {

/// Fully resolved configuration of one CLI run. Defaults here are the
/// built-in layer; config files and command-line flags override them in that
/// order.
struct RunConfig {
  std::string command;

  std::string model = "lz";
  double b = 1.0;
  double g = 1.0;
  double tau = 1.0;
  double gamma = 0.5;

  double T = 50.0;       // finite window / truncation where one is needed
  double tau0 = 8.0;
  double tolerance = 0.0;        // per-command assertion tolerance
  double prob_tolerance = 1e-4;  // ladder acceptance tolerance
  double threshold = 1e-10;      // integrability residual threshold

  std::vector<double> gammas;
  std::string a1 = "-1";
  int n = 10;
  int level = 0;
  bool zero_branch = false;
  bool full_matrix = false;
  bool via_reduction = false;
  bool corrupt_partner = false;
  std::string grid = "t=-5:5:1,tau=0.5:4:0.5";
  std::string synthetic;

  std::string output_format = "json";  // "json" or "csv"
  std::string output_path;             // empty writes to stdout
  bool no_timestamp = false;
};

/// Everything one command emits: the payload plus the provenance needed to
/// reproduce it (resolved config, tool version, optional timestamp).
struct ResultEnvelope {
  std::string command;
  nlohmann::ordered_json config_echo;
  nlohmann::ordered_json records;
  std::string version;
  std::string timestamp;  // empty when suppressed
};

nlohmann::ordered_json envelope_to_json(const ResultEnvelope& envelope);

/// CSV rendering for payloads with a natural row schema (sweep, recurrence,
/// curvature). Throws std::invalid_argument for other payloads.
std::string envelope_to_csv(const ResultEnvelope& envelope);

nlohmann::ordered_json config_to_json(const RunConfig& config);

/// %.12g — 12 significant digits, the frozen CSV number format.
std::string format_sig(double value);

/// Write content to path atomically (temp file + rename); "" writes stdout.
/// Relative paths are resolved against $LZKIT_OUTPUT_DIR when that is set.
void write_output(const std::string& path, const std::string& content);

std::string resolve_output_path(const std::string& path);

std::string iso_timestamp_utc();

}  // namespace lzkit
