#include "lzkit/envelope.hpp"

#include "lzkit/version.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lzkit {

std::string format_sig(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  j["model"] = c.model;
  j["b"] = c.b;
  j["g"] = c.g;
  j["tau"] = c.tau;
  j["gamma"] = c.gamma;
  j["T"] = c.T;
  j["tau0"] = c.tau0;
  j["tolerance"] = c.tolerance;
  j["prob_tolerance"] = c.prob_tolerance;
  j["threshold"] = c.threshold;
  j["gammas"] = c.gammas;
  j["a1"] = c.a1;
  j["n"] = c.n;
  j["level"] = c.level;
  j["zero_branch"] = c.zero_branch;
  j["full_matrix"] = c.full_matrix;
  j["via_reduction"] = c.via_reduction;
  j["corrupt_partner"] = c.corrupt_partner;
  j["grid"] = c.grid;
  j["synthetic"] = c.synthetic;
  j["output_format"] = c.output_format;
  return j;
}

nlohmann::ordered_json envelope_to_json(const ResultEnvelope& envelope) {
  nlohmann::ordered_json j;
  j["command"] = envelope.command;
  j["version"] = envelope.version.empty() ? kVersion : envelope.version;
  if (!envelope.timestamp.empty()) j["timestamp"] = envelope.timestamp;
  j["config"] = envelope.config_echo;
  j["records"] = envelope.records;
  return j;
}

namespace {

std::string csv_number(const nlohmann::ordered_json& v) {
  if (v.is_number()) return format_sig(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string envelope_to_csv(const ResultEnvelope& envelope) {
  std::ostringstream out;
  const auto& rec = envelope.records;

  if (rec.contains("rows")) {  // functional sweep
    out << "gamma,p,p_error,p_double_gamma,residual\n";
    for (const auto& row : rec["rows"]) {
      out << csv_number(row["gamma"]) << ',' << csv_number(row["p"]) << ','
          << csv_number(row["p_error"]) << ','
          << csv_number(row["p_double_gamma"]) << ','
          << csv_number(row["residual"]) << '\n';
    }
    return out.str();
  }
  if (rec.contains("coefficients")) {  // recurrence table
    out << "n,a_n,closed_form_match\n";
    const auto& coeffs = rec["coefficients"];
    const auto& match = rec["closed_form_match"];
    for (size_t k = 0; k < coeffs.size(); ++k) {
      out << k << ',' << coeffs[k].get<std::string>() << ','
          << (match[k].get<bool>() ? "true" : "false") << '\n';
    }
    return out.str();
  }
  if (rec.contains("points")) {  // curvature report
    out << "t,tau,commutator_residual,compatibility_residual\n";
    for (const auto& row : rec["points"]) {
      out << csv_number(row["t"]) << ',' << csv_number(row["tau"]) << ','
          << csv_number(row["commutator"]) << ','
          << csv_number(row["compatibility"]) << '\n';
    }
    return out.str();
  }
  throw std::invalid_argument(
      "this command's payload has no CSV schema; use --format json");
}

std::string resolve_output_path(const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("LZKIT_OUTPUT_DIR"))
      p = std::filesystem::path(dir) / p;
  }
  return p.string();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  const std::filesystem::path target(resolve_output_path(path));
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open output file " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, target);
}

std::string iso_timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace lzkit
