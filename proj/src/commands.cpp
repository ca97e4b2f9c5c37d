#include "lzkit/commands.hpp"

#include "lzkit/functional.hpp"
#include "lzkit/svg.hpp"
#include "lzkit/version.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace lzkit {

namespace {

ResultEnvelope make_envelope(const RunConfig& config,
                             nlohmann::ordered_json records) {
  ResultEnvelope env;
  env.command = config.command;
  env.config_echo = config_to_json(config);
  env.records = std::move(records);
  env.version = kVersion;
  if (!config.no_timestamp) env.timestamp = iso_timestamp_utc();
  return env;
}

LimitPolicy policy_from(const RunConfig& config) {
  LimitPolicy policy;
  policy.tolerance = config.prob_tolerance;
  return policy;
}

ModelParams params_from(const RunConfig& config) {
  return ModelParams{config.b, config.g, config.tau};
}

nlohmann::ordered_json ladder_json(const ProbabilityResult& r) {
  nlohmann::ordered_json ladder = nlohmann::ordered_json::array();
  for (const auto& rung : r.ladder)
    ladder.push_back({{"T", rung.T}, {"p", rung.p}});
  return ladder;
}

nlohmann::ordered_json sweep_rows_json(const std::vector<SweepRecord>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["gamma"] = r.gamma;
    row["p"] = r.p;
    row["p_error"] = r.p_error;
    row["p_double_gamma"] = r.p_double_gamma;
    row["residual"] = r.residual;
    row["ok"] = r.ok;
    if (!r.note.empty()) row["note"] = r.note;
    out.push_back(row);
  }
  return out;
}

}  // namespace

CommandResult cmd_simulate(const RunConfig& config) {
  const HamiltonianFamily& family = find_family(config.model);
  const ModelParams params = params_from(config);

  nlohmann::ordered_json rec;
  rec["model"] = family.name;

  if (config.full_matrix) {
    const EvolutionWindow window{-config.T, config.T, config.tau};
    const UnitaryResult U = evolve_window(family, params, window);
    const TransitionMatrix P = transition_matrix(U);
    rec["window_T"] = config.T;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < P.entries.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (Eigen::Index j = 0; j < P.entries.cols(); ++j)
        row.push_back(P.entries(i, j));
      entries.push_back(row);
    }
    rec["entries"] = entries;
    rec["row_defect"] = P.row_defect;
    rec["col_defect"] = P.col_defect;
    rec["unitarity_defect"] = U.unitarity_defect;
    rec["steps"] = U.steps_taken;
  } else {
    if (config.level < 0 || config.level >= family.dim)
      throw std::domain_error("--level out of range for model " + family.name);
    const ProbabilityResult r = survival_probability(
        family, params, config.level, policy_from(config));
    rec["level"] = config.level;
    rec["gamma"] = params.gamma();
    rec["p"] = r.p;
    rec["p_error"] = r.error;
    rec["final_T"] = r.final_T;
    rec["total_steps"] = r.total_steps;
    rec["unitarity_defect"] = r.unitarity_defect;
    rec["ladder"] = ladder_json(r);
  }
  return {make_envelope(config, std::move(rec)), 0};
}

CommandResult cmd_verify_integrability(const RunConfig& config) {
  const HamiltonianFamily family = config.corrupt_partner
                                       ? corrupted_tau_family()
                                       : find_family(config.model);
  const std::vector<PathPoint> grid = parse_grid_spec(config.grid);
  const CurvatureReport report =
      curvature_check(family, params_from(config), grid);

  const bool pass = report.max_commutator <= config.threshold &&
                    report.max_compatibility <= config.threshold;

  nlohmann::ordered_json rec;
  rec["model"] = family.name;
  rec["grid_points"] = report.grid.size();
  rec["max_commutator"] = report.max_commutator;
  rec["max_compatibility"] = report.max_compatibility;
  rec["max_fd_mismatch"] = report.max_fd_mismatch;
  rec["threshold"] = config.threshold;
  rec["pass"] = pass;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (size_t k = 0; k < report.grid.size(); ++k) {
    points.push_back({{"t", report.grid[k].t},
                      {"tau", report.grid[k].tau},
                      {"commutator", report.commutator_residuals[k]},
                      {"compatibility", report.compatibility_residuals[k]}});
  }
  rec["points"] = points;
  return {make_envelope(config, std::move(rec)), pass ? 0 : 1};
}

CommandResult cmd_verify_deformation(const RunConfig& config) {
  ModelParams params = params_from(config);
  params.g = std::sqrt(config.gamma * params.b);
  params.tau = 1.0;
  const double tolerance = config.tolerance > 0.0 ? config.tolerance : 1e-3;
  const DeformationRecord rec =
      deformation_experiment(params, config.tau0, config.T);

  const bool pass = std::abs(rec.difference) <= tolerance;
  nlohmann::ordered_json j;
  j["gamma"] = rec.gamma;
  j["tau0"] = rec.tau0;
  j["T"] = rec.T;
  j["p_horizontal"] = rec.p_horizontal;
  j["p_deformed"] = rec.p_deformed;
  j["difference"] = rec.difference;
  j["vertical_offdiag_up"] = rec.vertical_offdiag_up;
  j["vertical_offdiag_down"] = rec.vertical_offdiag_down;
  j["unitarity_defect"] = rec.unitarity_defect;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  return {make_envelope(config, std::move(j)), pass ? 0 : 1};
}

CommandResult cmd_verify_functional(const RunConfig& config) {
  if (config.gammas.empty())
    throw std::invalid_argument("verify-functional needs --gammas");
  for (double gamma : config.gammas)
    if (!(gamma >= 0.0))
      throw std::domain_error("gamma values must be non-negative");

  const LimitPolicy policy = policy_from(config);
  std::vector<SweepRecord> rows;
  if (config.via_reduction) {
    for (double gamma : config.gammas)
      rows.push_back(
          functional_residual_via_reduction(gamma, config.tau, policy));
  } else {
    rows = gamma_sweep(config.gammas, policy);
  }

  const double tolerance = config.tolerance > 0.0 ? config.tolerance : 5e-4;
  bool pass = true;
  for (const auto& r : rows)
    if (!r.ok || !(std::abs(r.residual) <= tolerance)) pass = false;

  nlohmann::ordered_json rec;
  rec["via_reduction"] = config.via_reduction;
  if (config.via_reduction) rec["tau"] = config.tau;
  rec["tolerance"] = tolerance;
  rec["pass"] = pass;
  rec["rows"] = sweep_rows_json(rows);
  return {make_envelope(config, std::move(rec)), pass ? 0 : 1};
}

CommandResult cmd_fit_exponent(const RunConfig& config) {
  FitResult fit;
  if (!config.synthetic.empty()) {
    if (config.synthetic.rfind("exp:", 0) != 0)
      throw std::invalid_argument(
          "--synthetic expects exp:<c>, e.g. exp:-2");
    const double c = std::stod(config.synthetic.substr(4));
    fit = fit_exponent_synthetic(config.gammas, c);
  } else {
    fit = fit_exponent(config.gammas, policy_from(config));
  }

  nlohmann::ordered_json rec;
  rec["model"] = fit.model;
  rec["c_estimate"] = fit.c_estimate;
  rec["deviation_from_minus_pi"] = fit.c_estimate + std::numbers::pi;
  rec["covariance"] = fit.covariance;
  rec["residual_norm"] = fit.residual_norm;
  nlohmann::ordered_json data = nlohmann::ordered_json::array();
  for (const auto& [gamma, p] : fit.data)
    data.push_back({{"gamma", gamma}, {"p", p}});
  rec["data"] = data;
  if (!config.synthetic.empty()) rec["synthetic"] = config.synthetic;
  return {make_envelope(config, std::move(rec)), 0};
}

CommandResult cmd_recurrence(const RunConfig& config) {
  const Rational a1 = parse_rational(config.a1);
  const RecurrenceTable table =
      solve_recurrence(a1, config.n, config.zero_branch ? 0 : 1);

  bool all_match = true;
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
  nlohmann::ordered_json match = nlohmann::ordered_json::array();
  for (size_t k = 0; k < table.coefficients.size(); ++k) {
    coeffs.push_back(table.coefficients[k].str());
    match.push_back(static_cast<bool>(table.closed_form_match[k]));
    if (!table.closed_form_match[k]) all_match = false;
  }

  nlohmann::ordered_json rec;
  rec["a1"] = table.a1.str();
  rec["n"] = config.n;
  rec["a0_branch"] = table.a0_branch;
  rec["coefficients"] = coeffs;
  rec["closed_form_match"] = match;
  rec["all_match"] = all_match;
  return {make_envelope(config, std::move(rec)), all_match ? 0 : 1};
}

namespace {

PlotSeries reference_curve(double lo, double hi) {
  PlotSeries ref;
  ref.label = "exp(-pi*gamma)";
  ref.line = true;
  const int n = 200;
  for (int k = 0; k <= n; ++k) {
    const double gamma = lo + (hi - lo) * k / n;
    ref.x.push_back(gamma);
    ref.y.push_back(std::exp(-std::numbers::pi * gamma));
  }
  return ref;
}

}  // namespace

void cmd_plot(const std::string& input_path, const std::string& output_path,
              const std::string& kind) {
  std::ifstream in(resolve_output_path(input_path));
  if (!in)
    throw std::invalid_argument("cannot open input envelope " + input_path);
  nlohmann::json env;
  try {
    in >> env;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("input is not a JSON envelope: ") +
                                e.what());
  }
  if (!env.contains("records") || !env.contains("command"))
    throw std::invalid_argument("input is not a result envelope");
  const auto& rec = env["records"];
  const std::string command = env["command"].get<std::string>();

  PlotSpec spec;
  if (kind == "sweep") {
    if (!rec.contains("rows") && !rec.contains("data"))
      throw std::invalid_argument("sweep plot needs a sweep or fit envelope");
    PlotSeries pts;
    pts.label = "measured p";
    const auto& rows = rec.contains("rows") ? rec["rows"] : rec["data"];
    for (const auto& row : rows) {
      const double p = row["p"].get<double>();
      if (!std::isfinite(p)) continue;
      pts.x.push_back(row["gamma"].get<double>());
      pts.y.push_back(p);
    }
    if (pts.x.empty()) throw std::invalid_argument("envelope has no points");
    const auto [lo, hi] =
        std::minmax_element(pts.x.begin(), pts.x.end());
    spec.title = "Survival probability vs gamma";
    spec.xlabel = "gamma = g^2/b";
    spec.ylabel = "p";
    spec.series.push_back(reference_curve(*lo, *hi));
    spec.series.push_back(std::move(pts));
  } else if (kind == "residual") {
    if (!rec.contains("rows"))
      throw std::invalid_argument("residual plot needs a sweep envelope");
    PlotSeries pts;
    pts.label = "|p(2g) - p(g)^2|";
    for (const auto& row : rec["rows"]) {
      const double r = row["residual"].get<double>();
      if (!std::isfinite(r)) continue;
      pts.x.push_back(row["gamma"].get<double>());
      pts.y.push_back(std::abs(r));
    }
    if (pts.x.empty()) throw std::invalid_argument("envelope has no points");
    spec.title = "Functional-equation residual";
    spec.xlabel = "gamma";
    spec.ylabel = "|residual|";
    spec.logy = true;
    spec.series.push_back(std::move(pts));
  } else if (kind == "convergence") {
    if (!rec.contains("ladder"))
      throw std::invalid_argument(
          "convergence plot needs a simulate envelope with a T-ladder");
    const auto& ladder = rec["ladder"];
    if (ladder.size() < 2)
      throw std::invalid_argument("ladder too short to plot convergence");
    const double p_final = ladder.back()["p"].get<double>();
    PlotSeries pts;
    pts.label = "|p(T) - p(final)|";
    for (size_t k = 0; k + 1 < ladder.size(); ++k) {
      pts.x.push_back(ladder[k]["T"].get<double>());
      pts.y.push_back(std::abs(ladder[k]["p"].get<double>() - p_final));
    }
    spec.title = "Finite-window convergence";
    spec.xlabel = "window half-width T";
    spec.ylabel = "|p(T) - p(final)|";
    spec.logx = true;
    spec.logy = true;
    spec.series.push_back(std::move(pts));
  } else if (kind == "curvature") {
    if (!rec.contains("points"))
      throw std::invalid_argument(
          "curvature plot needs a verify-integrability envelope");
    PlotSeries comm, compat;
    comm.label = "||[H,H']||";
    compat.label = "||dH/dtau - dH'/dt||";
    for (const auto& row : rec["points"]) {
      const double t = row["t"].get<double>();
      comm.x.push_back(t);
      comm.y.push_back(std::max(row["commutator"].get<double>(), 1e-18));
      compat.x.push_back(t);
      compat.y.push_back(std::max(row["compatibility"].get<double>(), 1e-18));
    }
    spec.title = "Integrability residuals";
    spec.xlabel = "t";
    spec.ylabel = "residual (Frobenius)";
    spec.logy = true;
    spec.series.push_back(std::move(comm));
    spec.series.push_back(std::move(compat));
  } else {
    throw std::invalid_argument(
        "unknown plot kind '" + kind +
        "' (expected sweep, residual, convergence or curvature)");
  }

  write_output(output_path, render_svg(spec));
}

std::vector<PathPoint> parse_grid_spec(const std::string& spec) {
  // "t=<lo>:<hi>:<step>,tau=<lo>:<hi>:<step>"
  double t_lo = 0, t_hi = 0, t_step = 0, tau_lo = 0, tau_hi = 0, tau_step = 0;
  bool have_t = false, have_tau = false;
  std::istringstream in(spec);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad grid spec '" + spec + "'");
    const std::string axis = part.substr(0, eq);
    double lo, hi, step;
    char c1, c2;
    std::istringstream vals(part.substr(eq + 1));
    if (!(vals >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
      throw std::invalid_argument("bad grid range '" + part + "'");
    if (axis == "t") {
      t_lo = lo; t_hi = hi; t_step = step; have_t = true;
    } else if (axis == "tau") {
      tau_lo = lo; tau_hi = hi; tau_step = step; have_tau = true;
    } else {
      throw std::invalid_argument("unknown grid axis '" + axis + "'");
    }
  }
  if (!have_t || !have_tau)
    throw std::invalid_argument("grid spec needs both t=... and tau=...");
  return make_grid(t_lo, t_hi, t_step, tau_lo, tau_hi, tau_step);
}

namespace {

void emit(const RunConfig& config, const ResultEnvelope& envelope) {
  if (config.output_format == "csv") {
    write_output(config.output_path, envelope_to_csv(envelope));
  } else {
    write_output(config.output_path, envelope_to_json(envelope).dump(2));
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"lzkit: Landau-Zener propagation, integrability and "
               "functional-equation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  // key=value files, [subcommand] sections; flags override file values
  app.set_config("--config", "", "configuration file");

  RunConfig cfg;
  std::string plot_input, plot_output, plot_kind = "sweep";

  auto add_output_opts = [&cfg](CLI::App* sub) {
    sub->configurable();
    sub->add_option("--output", cfg.output_path,
                    "output file (default: stdout)");
    sub->add_option("--format", cfg.output_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--no-timestamp", cfg.no_timestamp,
                  "omit the timestamp for byte-reproducible output");
  };

  CLI::App* sim = app.add_subcommand(
      "simulate", "propagate a model and report survival probability");
  sim->add_option("--model", cfg.model, "registered model name");
  sim->add_option("--b", cfg.b, "slope b > 0");
  sim->add_option("--g", cfg.g, "coupling g");
  sim->add_option("--tau", cfg.tau, "deformation parameter tau > 0");
  sim->add_option("--level", cfg.level, "diabatic level (0-based)");
  sim->add_flag("--full-matrix", cfg.full_matrix,
                "emit the full finite-window transition matrix instead");
  sim->add_option("--T", cfg.T, "window half-width for --full-matrix");
  sim->add_option("--tolerance", cfg.prob_tolerance,
                  "ladder acceptance tolerance for p");
  add_output_opts(sim);

  CLI::App* integ = app.add_subcommand(
      "verify-integrability",
      "check [H,H'] = 0 and dH/dtau = dH'/dt on a (t, tau) grid");
  integ->add_option("--model", cfg.model, "family with a commuting partner")
      ->default_str("three-level-tau");
  integ->add_option("--b", cfg.b, "slope b > 0");
  integ->add_option("--g", cfg.g, "coupling g");
  integ->add_option("--grid", cfg.grid, "t=<lo>:<hi>:<step>,tau=<lo>:<hi>:<step>");
  integ->add_option("--threshold", cfg.threshold,
                    "residual threshold for exit code 0");
  integ->add_flag("--corrupt-partner", cfg.corrupt_partner,
                  "negative control: break the partner and expect failure");
  add_output_opts(integ);

  CLI::App* deform = app.add_subcommand(
      "verify-deformation",
      "compare the straight path with the three-segment path through tau0");
  deform->add_option("--gamma", cfg.gamma, "gamma = g^2/b");
  deform->add_option("--b", cfg.b, "slope b > 0");
  deform->add_option("--tau0", cfg.tau0, "deformation height tau0 > 1");
  deform->add_option("--T", cfg.T, "window half-width");
  deform->add_option("--tolerance", cfg.tolerance,
                     "pass threshold on |difference| (default 1e-3)");
  add_output_opts(deform);

  CLI::App* func = app.add_subcommand(
      "verify-functional", "measure p(2 gamma) - p(gamma)^2 over a gamma grid");
  func->add_option("--gammas", cfg.gammas, "comma-separated gamma values")
      ->delimiter(',');
  func->add_flag("--via-reduction", cfg.via_reduction,
                 "measure p(2 gamma) through the tau-reduction chain");
  func->add_option("--tau", cfg.tau, "tau used by --via-reduction");
  func->add_option("--tolerance", cfg.tolerance,
                   "pass threshold on |residual| (default 5e-4)");
  func->add_option("--prob-tolerance", cfg.prob_tolerance,
                   "ladder acceptance tolerance for p");
  add_output_opts(func);

  CLI::App* fit = app.add_subcommand(
      "fit-exponent", "least-squares fit of ln p = c*gamma");
  fit->add_option("--gammas", cfg.gammas, "comma-separated gamma values")
      ->delimiter(',');
  fit->add_option("--synthetic", cfg.synthetic,
                  "exp:<c> fits synthetic data instead of measurements");
  fit->add_option("--prob-tolerance", cfg.prob_tolerance,
                  "ladder acceptance tolerance for p");
  add_output_opts(fit);

  CLI::App* recur = app.add_subcommand(
      "recurrence", "solve the Taylor recurrence 2^n a_n = sum a_l a_{n-l} "
                    "in exact rationals");
  recur->add_option("--a1", cfg.a1, "rational seed, e.g. -1 or -355/113");
  recur->add_option("--n", cfg.n, "highest order N >= 1");
  recur->add_flag("--zero-branch", cfg.zero_branch,
                  "use the a0 = 0 branch (zero solution)");
  add_output_opts(recur);

  CLI::App* plot = app.add_subcommand(
      "plot", "render an envelope JSON file as a self-contained SVG");
  plot->add_option("--input", plot_input, "envelope JSON path")->required();
  plot->add_option("--output", plot_output, "SVG output path")->required();
  plot->add_option("--kind", plot_kind,
                   "sweep, residual, convergence or curvature");

  // verify-integrability defaults to the only family with a partner
  cfg.model = "lz";

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CommandResult result;
    if (sim->parsed()) {
      cfg.command = "simulate";
      result = cmd_simulate(cfg);
    } else if (integ->parsed()) {
      cfg.command = "verify-integrability";
      if (integ->count("--model") == 0) cfg.model = "three-level-tau";
      result = cmd_verify_integrability(cfg);
    } else if (deform->parsed()) {
      cfg.command = "verify-deformation";
      result = cmd_verify_deformation(cfg);
    } else if (func->parsed()) {
      cfg.command = "verify-functional";
      if (func->count("--format") == 0) cfg.output_format = "csv";
      result = cmd_verify_functional(cfg);
    } else if (fit->parsed()) {
      cfg.command = "fit-exponent";
      result = cmd_fit_exponent(cfg);
    } else if (recur->parsed()) {
      cfg.command = "recurrence";
      result = cmd_recurrence(cfg);
    } else if (plot->parsed()) {
      cmd_plot(plot_input, plot_output, plot_kind);
      return 0;
    }
    emit(cfg, result.envelope);
    return result.exit_code;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lzkit
