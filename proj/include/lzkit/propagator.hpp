#pragma once

#include "lzkit/models.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lzkit {

enum class StepMethod {
  FixedStep,  // fixed-step 4th-order unitary stepper (h = max_step)
  Adaptive,   // same stepper with step-doubling Richardson control
};

struct IntegratorConfig {
  StepMethod method = StepMethod::Adaptive;
  /// Local error budget per unit time; the accumulated propagator error over
  /// a window of length L is of order step_tolerance * L.
  double step_tolerance = 1e-10;
  double max_step = 0.25;
  /// Propagate in the zero-diagonal gauge (diagonal phases absorbed into the
  /// state). Requires the family diagonal to be linear in t; the returned
  /// unitary is transformed back to the original frame.
  bool interaction_picture = false;
};

struct EvolutionWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  double tau = 1.0;  // deformation parameter held fixed during t-evolution
};

struct UnitaryResult {
  Eigen::MatrixXcd matrix;
  double unitarity_defect = 0.0;  // ||U^dag U - 1||_F
  long steps_taken = 0;
  EvolutionWindow window;
};

/// Policy for extrapolating finite-window probabilities to t -> +-infinity:
/// evaluate on the window ladder T_k = T0 * factor^k (T0 scaled by the
/// family's slope structure), average each rung over endpoint offsets that
/// cancel every diagonal-slope-gap oscillation frequency exactly, and accept
/// when consecutive rung averages agree within tolerance.
struct LimitPolicy {
  double t_base = 25.0;
  double ladder_factor = 2.0;
  int max_rungs = 6;
  double tolerance = 1e-4;
  /// samples per distinct oscillation frequency (2 = half-period pairs)
  int endpoint_samples = 2;
};

struct LadderRung {
  double T = 0.0;
  double p = 0.0;
};

struct ProbabilityResult {
  double p = 0.0;
  double error = 0.0;
  std::vector<LadderRung> ladder;
  double final_T = 0.0;
  long total_steps = 0;
  double unitarity_defect = 0.0;
  // stochasticity defects of the accepted window's probability matrix
  double row_defect = 0.0;
  double col_defect = 0.0;
};

struct StepUnderflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, std::vector<LadderRung> rungs)
      : std::runtime_error(msg), ladder(std::move(rungs)) {}
  std::vector<LadderRung> ladder;
};

struct UnitarityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using HermitianFn = std::function<Eigen::MatrixXcd(double)>;

/// Time-ordered exponential of -i H(s) ds from s0 to s1 (either direction).
/// Every step is the exact exponential of a Hermitian generator built from
/// two Gauss-node samples plus their commutator, so the result is unitary by
/// construction and 4th-order accurate in the step size.
UnitaryResult evolve_hermitian(const HermitianFn& H, double s0, double s1,
                               int dim, const IntegratorConfig& config);

/// Evolution operator of a registered family over [t_start, t_end] at the
/// window's tau. Throws std::invalid_argument for degenerate windows.
UnitaryResult evolve_window(const HamiltonianFamily& family,
                            const ModelParams& params,
                            const EvolutionWindow& window,
                            const IntegratorConfig& config = {});

/// |U_ij|^2 with row/column stochasticity defects. Rejects results whose
/// unitarity defect exceeds 1e-8.
TransitionMatrix transition_matrix(const UnitaryResult& U);

/// Infinite-time survival probability (P)_{level,level} of a family,
/// extrapolated with the T-ladder / endpoint-averaging policy. The reported
/// error is the last ladder difference (floored at 1e-7).
ProbabilityResult survival_probability(const HamiltonianFamily& family,
                                       const ModelParams& params, int level,
                                       const LimitPolicy& policy = {},
                                       const IntegratorConfig& config = {});

/// Survival probability of the single window [-T, T], averaged over the
/// frequency-cancelling endpoint offsets (one rung of the ladder). Cancels
/// the leading O(1/T) oscillatory finite-window correction without
/// extrapolating in T.
double windowed_survival_probability(const HamiltonianFamily& family,
                                     const ModelParams& params, int level,
                                     double T, int samples = 2,
                                     const IntegratorConfig& config = {});

}  // namespace lzkit
