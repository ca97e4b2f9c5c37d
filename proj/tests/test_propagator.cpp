#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lzkit/propagator.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>

using namespace lzkit;
using doctest::Approx;

namespace {

HermitianFn family_fn(const HamiltonianFamily& fam, const ModelParams& p) {
  return [&fam, p](double t) { return fam.eval_H(t, p); };
}

}  // namespace

TEST_CASE("uncoupled evolution stays diagonal with unit-modulus entries") {
  const ModelParams p{1.0, 0.0, 1.0};
  const auto U = evolve_window(find_family("lz"), p, {-20.0, 20.0, 1.0});
  CHECK(std::abs(U.matrix(0, 1)) < 1e-14);
  CHECK(std::abs(U.matrix(1, 0)) < 1e-14);
  CHECK(std::abs(U.matrix(0, 0)) == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(U.matrix(1, 1)) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate window is rejected") {
  const ModelParams p{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(evolve_window(find_family("lz"), p, {3.0, 3.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve_window(find_family("lz"), p, {3.0, -3.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("stepper agrees with an independent RK4 reference") {
  const ModelParams p{1.0, 0.8, 1.0};
  const auto& lz = find_family("lz");
  const auto U = evolve_window(lz, p, {-6.0, 6.0, 1.0});
  const auto ref =
      oracle::rk4_propagator(family_fn(lz, p), -6.0, 6.0, 2, 200000);
  CHECK((U.matrix - ref).norm() < 1e-7);

  const auto& h3 = find_family("three-level");
  const auto U3 = evolve_window(h3, p, {-5.0, 5.0, 1.0});
  const auto ref3 =
      oracle::rk4_propagator(family_fn(h3, p), -5.0, 5.0, 3, 200000);
  CHECK((U3.matrix - ref3).norm() < 1e-7);
}

TEST_CASE("fixed-step convergence is 4th order") {
  const ModelParams p{1.0, 1.0, 1.0};
  const auto& lz = find_family("lz");
  IntegratorConfig fine;
  fine.method = StepMethod::FixedStep;
  fine.max_step = 1e-4;
  const auto ref = evolve_window(lz, p, {-4.0, 4.0, 1.0}, fine);

  std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double h : hs) {
    IntegratorConfig cfg;
    cfg.method = StepMethod::FixedStep;
    cfg.max_step = h;
    const auto U = evolve_window(lz, p, {-4.0, 4.0, 1.0}, cfg);
    errs.push_back((U.matrix - ref.matrix).norm());
  }
  // log-log slope over successive halvings
  double slope_min = 10.0;
  for (size_t k = 1; k < hs.size(); ++k) {
    const double slope =
        std::log(errs[k - 1] / errs[k]) / std::log(hs[k - 1] / hs[k]);
    slope_min = std::min(slope_min, slope);
  }
  CHECK(slope_min >= 3.5);
}

TEST_CASE("unitarity holds on long windows") {
  const ModelParams p{1.0, 1.2, 1.0};
  const auto U = evolve_window(find_family("lz"), p, {-100.0, 100.0, 1.0});
  CHECK(U.unitarity_defect <= 1e-8);
  const auto U4 =
      evolve_window(find_family("composite4"), p, {-30.0, 30.0, 1.0});
  CHECK(U4.unitarity_defect <= 1e-8);
}

TEST_CASE("transition matrix structure for a two-level run") {
  const ModelParams p{1.0, 0.9, 1.0};
  const auto U = evolve_window(find_family("lz"), p, {-40.0, 40.0, 1.0});
  const auto P = transition_matrix(U);
  CHECK(P.row_defect <= 1e-7);
  CHECK(P.col_defect <= 1e-7);
  // doubly stochastic 2x2: equal diagonal, equal off-diagonal entries
  CHECK(P.entries(0, 0) == Approx(P.entries(1, 1)).epsilon(1e-7));
  CHECK(P.entries(0, 1) == Approx(P.entries(1, 0)).epsilon(1e-7));
  CHECK(P.entries.minCoeff() >= -1e-12);
  CHECK(P.entries.maxCoeff() <= 1.0 + 1e-12);

  UnitaryResult identity;
  identity.matrix = Eigen::MatrixXcd::Identity(3, 3);
  const auto PI = transition_matrix(identity);
  CHECK((PI.entries - Eigen::MatrixXd::Identity(3, 3)).norm() == Approx(0.0));

  UnitaryResult bad;
  bad.matrix = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
  bad.unitarity_defect = 1.0;
  CHECK_THROWS_AS(transition_matrix(bad), UnitarityError);
}

TEST_CASE("4-level probability matrix factorizes as P2 (x) P2") {
  for (double gamma : {0.25, 0.5, 1.0, 2.0}) {
    const ModelParams p{1.0, std::sqrt(gamma), 1.0};
    const EvolutionWindow window{-40.0, 40.0, 1.0};
    IntegratorConfig cfg;
    cfg.step_tolerance = 1e-12;
    const auto P2 =
        transition_matrix(evolve_window(find_family("lz"), p, window, cfg));
    const auto P4 = transition_matrix(
        evolve_window(find_family("composite4"), p, window, cfg));
    const Eigen::MatrixXd expected = oracle::kron(P2.entries, P2.entries);
    CHECK((P4.entries - expected).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("rotating out the dark state preserves (P)_11") {
  const ModelParams p{1.0, 0.8, 1.0};
  IntegratorConfig cfg;
  cfg.step_tolerance = 1e-12;
  const auto U4 =
      evolve_window(find_family("composite4"), p, {-30.0, 30.0, 1.0}, cfg);
  const HermitianFn rotated = [p](double t) {
    return rotate_out_dark_state(composite4_hamiltonian(t, p));
  };
  const auto Ur = evolve_hermitian(rotated, -30.0, 30.0, 4, cfg);
  CHECK(std::norm(U4.matrix(0, 0)) ==
        doctest::Approx(std::norm(Ur.matrix(0, 0))).epsilon(1e-8));
}

TEST_CASE("gauge-shifted evolution leaves every probability unchanged") {
  const ModelParams p{1.5, 0.8, 2.0};
  IntegratorConfig cfg;
  cfg.step_tolerance = 1e-12;
  const auto& eff = find_family("effective-two-level");
  const auto U = evolve_window(eff, p, {-20.0, 20.0, p.tau}, cfg);
  const HermitianFn shifted = [p](double t) {
    return gauge_shift(effective_two_level(t, p), t,
                       [&p](double s) { return p.b * p.tau * s; });
  };
  const auto Us = evolve_hermitian(shifted, -20.0, 20.0, 2, cfg);
  CHECK((U.matrix.cwiseAbs2() - Us.matrix.cwiseAbs2()).cwiseAbs().maxCoeff() <=
        1e-8);
}

TEST_CASE("windowed survival at T = 60 approximates e^{-pi} to 2e-4") {
  // The raw endpoint value |U11|^2 oscillates with ~3e-3 amplitude at this
  // window; the endpoint-averaged probability is what converges.
  const ModelParams p{1.0, 1.0, 1.0};
  const auto U = evolve_window(find_family("lz"), p, {-60.0, 60.0, 1.0});
  CHECK(std::abs(std::norm(U.matrix(0, 0)) - oracle::kExpMinusPi) <= 5e-3);

  const double averaged =
      windowed_survival_probability(find_family("lz"), p, 0, 60.0);
  CHECK(std::abs(averaged - oracle::kExpMinusPi) <= 2e-4);
}

TEST_CASE("dark state protects (P4)_11 = (P3)_11") {
  for (double gamma : {0.25, 1.0}) {
    const ModelParams p{1.0, std::sqrt(gamma), 1.0};
    const EvolutionWindow window{-40.0, 40.0, 1.0};
    IntegratorConfig cfg;
    cfg.step_tolerance = 1e-12;
    const auto U4 = evolve_window(find_family("composite4"), p, window, cfg);
    const auto U3 = evolve_window(find_family("three-level"), p, window, cfg);
    CHECK(std::norm(U4.matrix(0, 0)) ==
          Approx(std::norm(U3.matrix(0, 0))).epsilon(1e-6));
  }
}

TEST_CASE("survival probability reproduces the LZ formula") {
  const auto& lz = find_family("lz");

  SUBCASE("g = 0 gives p = 1") {
    const auto r = survival_probability(lz, {1.0, 0.0, 1.0}, 0);
    CHECK(r.p == Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("gamma = 1") {
    const auto r = survival_probability(lz, {1.0, 1.0, 1.0}, 0);
    CHECK(std::abs(r.p - oracle::kExpMinusPi) < 2e-4);
    CHECK(r.unitarity_defect <= 1e-8);
  }
  SUBCASE("gamma = 0.5 via g = sqrt(0.5)") {
    const auto r = survival_probability(lz, {1.0, std::sqrt(0.5), 1.0}, 0);
    CHECK(std::abs(r.p - oracle::kExpMinusHalfPi) < 2e-4);
  }
  SUBCASE("level out of range") {
    CHECK_THROWS_AS(survival_probability(lz, {1.0, 1.0, 1.0}, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("scaling collapse: p depends on g^2/b only") {
  const auto& lz = find_family("lz");
  const auto a = survival_probability(lz, {4.0, 2.0, 1.0}, 0);
  const auto b = survival_probability(lz, {1.0, 1.0, 1.0}, 0);
  CHECK(std::abs(a.p - b.p) <= 2.0 * (a.error + b.error));

  const auto c = survival_probability(lz, {2.0, 1.0, 1.0}, 0);
  const auto d =
      survival_probability(lz, {1.0, 1.0 / std::sqrt(2.0), 1.0}, 0);
  CHECK(std::abs(c.p - d.p) <= 2.0 * (c.error + d.error));

  const auto e = survival_probability(lz, {0.5, 0.5, 1.0}, 0);
  const auto f = scaled_time_equivalent({0.5, 0.5, 1.0});
  const auto g = survival_probability(lz, f, 0);
  CHECK(std::abs(e.p - g.p) <= 2.0 * (e.error + g.error));
}

TEST_CASE("sign of the coupling does not change the probability matrix") {
  IntegratorConfig cfg;
  cfg.step_tolerance = 1e-12;
  const EvolutionWindow window{-20.0, 20.0, 1.0};
  const auto Pp = transition_matrix(
      evolve_window(find_family("lz"), {1.0, 0.8, 1.0}, window, cfg));
  const auto Pm = transition_matrix(
      evolve_window(find_family("lz"), {1.0, -0.8, 1.0}, window, cfg));
  CHECK((Pp.entries - Pm.entries).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("interaction picture gives the same probabilities") {
  const ModelParams p{1.0, 0.7, 1.0};
  const EvolutionWindow window{-15.0, 15.0, 1.0};
  IntegratorConfig plain, ip;
  ip.interaction_picture = true;
  const auto Up = evolve_window(find_family("lz"), p, window, plain);
  const auto Ui = evolve_window(find_family("lz"), p, window, ip);
  CHECK((Up.matrix.cwiseAbs2() - Ui.matrix.cwiseAbs2()).norm() < 1e-8);
  // the back-transformed unitaries agree entry-wise, not only in modulus
  CHECK((Up.matrix - Ui.matrix).norm() < 1e-7);
}

TEST_CASE("step halving changes p by less than the reported error") {
  const ModelParams p{1.0, 1.0, 1.0};
  const auto& lz = find_family("lz");
  const auto r = survival_probability(lz, p, 0);

  LimitPolicy policy;
  IntegratorConfig tight;
  tight.max_step = 0.125;
  const auto r2 = survival_probability(lz, p, 0, policy, tight);
  CHECK(std::abs(r.p - r2.p) < r.error);
}

TEST_CASE("ladder reports its rungs and non-convergence carries them") {
  const ModelParams p{1.0, 1.0, 1.0};
  const auto r = survival_probability(find_family("lz"), p, 0);
  CHECK(r.ladder.size() >= 2);
  CHECK(r.final_T == Approx(r.ladder.back().T));

  LimitPolicy impossible;
  impossible.tolerance = 1e-15;
  impossible.max_rungs = 2;
  try {
    survival_probability(find_family("lz"), p, 0, impossible);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.ladder.size() == 2);
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
}

TEST_CASE("an unresolvable generator drives the step size to underflow") {
  // deterministic bit-noise: samples at any two distinct times are
  // unrelated, so no step size can ever pass the error test
  const HermitianFn noise = [](double t) {
    std::uint64_t bits;
    std::memcpy(&bits, &t, sizeof(bits));
    bits ^= bits >> 33;
    bits *= 0xff51afd7ed558ccdULL;
    bits ^= bits >> 33;
    const double g =
        1e6 * (static_cast<double>(bits & 0xffff) / 65535.0 - 0.5);
    Eigen::MatrixXcd H(2, 2);
    H << 0.0, g, g, 0.0;
    return H;
  };
  CHECK_THROWS_AS(evolve_hermitian(noise, 0.0, 1.0, 2, {}),
                  StepUnderflowError);
}

TEST_CASE("invalid integrator and policy parameters are rejected") {
  const ModelParams p{1.0, 1.0, 1.0};
  IntegratorConfig bad;
  bad.step_tolerance = 0.0;
  CHECK_THROWS_AS(evolve_window(find_family("lz"), p, {-1.0, 1.0, 1.0}, bad),
                  std::invalid_argument);

  LimitPolicy bad_policy;
  bad_policy.max_rungs = 1;
  CHECK_THROWS_AS(survival_probability(find_family("lz"), p, 0, bad_policy),
                  std::invalid_argument);
}
