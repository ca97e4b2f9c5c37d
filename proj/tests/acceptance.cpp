// Acceptance suite: every quantitative claim the toolkit is built to
// reproduce, one test case per criterion, each printing a PASS/FAIL line.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lzkit/flatland.hpp"
#include "lzkit/functional.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

using namespace lzkit;

namespace {

void report(int id, const char* name, bool ok) {
  std::printf("criterion %2d  %-26s %s\n", id, name, ok ? "PASS" : "FAIL");
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", id, " (", name, ")");
}

// Worst diagnostics across every accepted run in criteria 1-8, asserted by
// criterion 12.
struct DefectLog {
  double unitarity = 0.0;
  double stochastic = 0.0;

  void add(double u, double row, double col) {
    unitarity = std::max(unitarity, u);
    stochastic = std::max({stochastic, row, col});
  }
  void add(const ProbabilityResult& r) {
    add(r.unitarity_defect, r.row_defect, r.col_defect);
  }
  void add(const SweepRecord& r) {
    add(r.unitarity_defect, r.row_defect, r.col_defect);
  }
};

DefectLog defects;

ProbabilityResult lz_survival(double b, double g) {
  const ModelParams params{b, g, 1.0};
  return survival_probability(find_family("lz"), params, 0);
}

}  // namespace

TEST_CASE("criterion 1: LZ formula") {
  bool ok = true;
  for (double gamma : {0.25, 0.5, 1.0, 2.0}) {
    const auto r = lz_survival(1.0, std::sqrt(gamma));
    defects.add(r);
    const double exact = std::exp(-std::numbers::pi * gamma);
    ok = ok && std::abs(r.p - exact) <= 2e-4;
  }
  report(1, "lz-formula", ok);
}

TEST_CASE("criterion 2: scaling collapse") {
  const auto p11 = lz_survival(1.0, 1.0);
  const auto p42 = lz_survival(4.0, 2.0);
  const auto p21 = lz_survival(2.0, 1.0);
  const auto p1r = lz_survival(1.0, 1.0 / std::sqrt(2.0));
  for (const auto& r : {p11, p42, p21, p1r}) defects.add(r);
  const bool ok = std::abs(p42.p - p11.p) <= 4e-4 &&
                  std::abs(p21.p - p1r.p) <= 4e-4;
  report(2, "scaling-collapse", ok);
}

TEST_CASE("criterion 3: tensor factorization") {
  const ModelParams params{1.0, std::sqrt(0.5), 1.0};  // gamma = 0.5
  const EvolutionWindow window{-40.0, 40.0, 1.0};
  IntegratorConfig cfg;
  cfg.step_tolerance = 1e-12;
  const auto U2 = evolve_window(find_family("lz"), params, window, cfg);
  const auto U4 = evolve_window(find_family("composite4"), params, window, cfg);
  const auto P2 = transition_matrix(U2);
  const auto P4 = transition_matrix(U4);
  defects.add(U2.unitarity_defect, P2.row_defect, P2.col_defect);
  defects.add(U4.unitarity_defect, P4.row_defect, P4.col_defect);
  const double dev =
      (P4.entries - oracle::kron(P2.entries, P2.entries)).cwiseAbs().maxCoeff();
  report(3, "tensor-factorization", dev <= 1e-6);
}

TEST_CASE("criterion 4: dark-state reduction") {
  bool ok = true;
  for (double gamma : {0.25, 1.0}) {
    const ModelParams params{1.0, std::sqrt(gamma), 1.0};
    const EvolutionWindow window{-40.0, 40.0, 1.0};
    IntegratorConfig cfg;
    cfg.step_tolerance = 1e-12;
    const auto U4 = evolve_window(find_family("composite4"), params, window, cfg);
    const auto U3 = evolve_window(find_family("three-level"), params, window, cfg);
    const auto P4 = transition_matrix(U4);
    const auto P3 = transition_matrix(U3);
    defects.add(U4.unitarity_defect, P4.row_defect, P4.col_defect);
    defects.add(U3.unitarity_defect, P3.row_defect, P3.col_defect);
    ok = ok && std::abs(P4.entries(0, 0) - P3.entries(0, 0)) <= 1e-6;
  }
  report(4, "dark-state-reduction", ok);
}

TEST_CASE("criterion 5: integrability") {
  const auto rep = curvature_check(find_family("three-level-tau"),
                                   {1.0, 1.0, 1.0}, standard_grid());
  const bool ok = rep.max_commutator <= 1e-12 &&
                  rep.max_compatibility <= 1e-12 &&
                  rep.max_fd_mismatch <= 1e-6;
  report(5, "integrability", ok);
}

TEST_CASE("criterion 6: path deformation") {
  const ModelParams params{1.0, std::sqrt(0.5), 1.0};  // gamma = 0.5
  const auto rec = deformation_experiment(params, 8.0, 50.0);
  defects.add(rec.unitarity_defect, rec.row_defect, rec.col_defect);
  const bool ok = std::abs(rec.difference) <= 1e-3 &&
                  rec.vertical_offdiag_up <= 1e-3 &&
                  rec.vertical_offdiag_down <= 1e-3;
  report(6, "path-deformation", ok);
}

TEST_CASE("criterion 7: tau independence and reduction") {
  const double gamma = 0.5;
  const ModelParams params{1.0, std::sqrt(gamma), 1.0};
  std::vector<double> ps;
  for (double tau : {1.0, 2.0, 4.0, 8.0}) {
    const auto r = tau_scaling_probability(params, tau);
    defects.add(r);
    ps.push_back(r.p);
  }
  const auto direct = lz_survival(1.0, std::sqrt(2.0 * gamma));
  defects.add(direct);

  bool ok = true;
  for (size_t i = 0; i < ps.size(); ++i) {
    ok = ok && std::abs(ps[i] - direct.p) <= 6e-4;
    for (size_t j = i + 1; j < ps.size(); ++j)
      ok = ok && std::abs(ps[i] - ps[j]) <= 6e-4;
  }
  report(7, "tau-independence", ok);
}

TEST_CASE("criterion 8: functional equation") {
  const std::vector<double> gammas = {0.1, 0.25, 0.5, 0.75,
                                      1.0, 1.25, 1.5, 2.0};
  const auto records = gamma_sweep(gammas);
  bool ok = true;
  for (const auto& r : records) {
    defects.add(r);
    ok = ok && r.ok && std::abs(r.residual) <= 5e-4;
  }
  report(8, "functional-equation", ok);
}

TEST_CASE("criterion 9: recurrence closed form") {
  bool ok = true;
  for (const Rational& a1 :
       {Rational(-355, 113), Rational(-1), Rational(1, 2)}) {
    const auto table = solve_recurrence(a1, 30);
    for (bool m : table.closed_form_match) ok = ok && m;
  }
  const auto zero = solve_recurrence(Rational(-1), 30, 0);
  for (const auto& a : zero.coefficients) ok = ok && (a == 0);
  report(9, "recurrence-closed-form", ok);
}

TEST_CASE("criterion 10: fresnel identity") {
  const auto r = fresnel_integral(1.0, 30.0, 3);
  const std::complex<double> target(oracle::kSqrtPi / std::sqrt(2.0),
                                    oracle::kSqrtPi / std::sqrt(2.0));
  report(10, "fresnel-identity", std::abs(r.value - target) <= 1e-6);
}

TEST_CASE("criterion 11: perturbative coefficient") {
  LimitPolicy tight;
  tight.tolerance = 1e-6;
  const auto slope = perturbative_slope({0.0025, 0.005, 0.01}, tight);
  const bool slope_ok =
      std::abs(slope.slope - std::numbers::pi) / std::numbers::pi <= 0.01;

  const auto fit = fit_exponent({0.1, 0.2, 0.4, 0.7, 1.0});
  const bool fit_ok = std::abs(fit.c_estimate + std::numbers::pi) <= 0.01;
  report(11, "perturbative-coefficient", slope_ok && fit_ok);
}

TEST_CASE("criterion 12: structural invariants") {
  const bool ok = defects.unitarity <= 1e-8 && defects.stochastic <= 1e-7;
  std::printf("              max unitarity defect %.3e, max stochasticity "
              "defect %.3e\n",
              defects.unitarity, defects.stochastic);
  report(12, "structural-invariants", ok);
}
