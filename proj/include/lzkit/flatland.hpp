#pragma once

#include "lzkit/models.hpp"
#include "lzkit/propagator.hpp"

#include <vector>

namespace lzkit {

struct PathPoint {
  double t = 0.0;
  double tau = 1.0;
};

/// Axis-aligned polyline in the (t, tau) plane. Pure-t segments evolve under
/// H at fixed tau; pure-tau segments evolve under the commuting partner H'
/// at fixed t. Diagonal segments and tau <= 0 are rejected.
struct ParamPath {
  std::vector<PathPoint> vertices;

  explicit ParamPath(std::vector<PathPoint> points);
};

struct CurvatureReport {
  std::vector<PathPoint> grid;
  std::vector<double> commutator_residuals;    // ||[H, H']||_F
  std::vector<double> compatibility_residuals; // ||dH/dtau - dH'/dt||_F
  double max_commutator = 0.0;
  double max_compatibility = 0.0;
  /// Largest deviation between analytic derivatives and central finite
  /// differences at the randomly chosen cross-check points.
  double max_fd_mismatch = 0.0;
};

/// Evaluate both integrability residuals of the (H, H') pair on a grid with
/// the family's analytic derivatives, cross-checked against central finite
/// differences (step 1e-5) at 10 points drawn from the grid's bounding box.
CurvatureReport curvature_check(const HamiltonianFamily& family,
                                const ModelParams& params,
                                const std::vector<PathPoint>& grid);

/// Ordered product of segment propagators along an axis-aligned path.
UnitaryResult evolve_along_path(const HamiltonianFamily& family,
                                const ModelParams& params,
                                const ParamPath& path,
                                const IntegratorConfig& config = {});

struct DeformationRecord {
  double gamma = 0.0;
  double tau0 = 0.0;
  double T = 0.0;
  double p_horizontal = 0.0;  // (P)_{1,1} along the straight path at tau = 1
  double p_deformed = 0.0;    // (P)_{1,1} along the three-segment path
  double difference = 0.0;
  /// Max row-wise off-diagonal probability mass of the two vertical-segment
  /// propagators; small values mean the tau-legs are adiabatic.
  double vertical_offdiag_up = 0.0;
  double vertical_offdiag_down = 0.0;
  double unitarity_defect = 0.0;
  // worst stochasticity defects over the two full-path probability matrices
  double row_defect = 0.0;
  double col_defect = 0.0;
};

/// Fig.-style deformation experiment for the tau family: compare the
/// horizontal path at tau = 1 with the three-segment path through tau0.
DeformationRecord deformation_experiment(const ModelParams& params,
                                         double tau0, double T,
                                         const IntegratorConfig& config = {});

/// (P2)_{1,1} of the effective two-level model at the given tau; equal to
/// p(2 gamma) independent of tau.
ProbabilityResult tau_scaling_probability(const ModelParams& params,
                                          double tau,
                                          const LimitPolicy& policy = {},
                                          const IntegratorConfig& config = {});

/// Cartesian grid with inclusive axis ranges.
std::vector<PathPoint> make_grid(double t_lo, double t_hi, double t_step,
                                 double tau_lo, double tau_hi,
                                 double tau_step);

/// t in [-5, 5] step 1, tau in [0.5, 4] step 0.5 (88 points).
std::vector<PathPoint> standard_grid();

}  // namespace lzkit
