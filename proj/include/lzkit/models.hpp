#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lzkit {

using Complex = std::complex<double>;

/// Physical parameters of the linearly driven models: slope b > 0 of the
/// diabatic levels, constant coupling g, and the deformation parameter
/// tau > 0 used by the tau-dependent families.
struct ModelParams {
  double b = 1.0;
  double g = 1.0;
  double tau = 1.0;

  /// The dimensionless combination g^2/b the survival probability depends on.
  double gamma() const { return g * g / b; }
};

/// Element-wise |U_ij|^2 of a unitary, with the double-stochasticity defects
/// max|row sum - 1| and max|column sum - 1|.
struct TransitionMatrix {
  Eigen::MatrixXd entries;
  double row_defect = 0.0;
  double col_defect = 0.0;
};

using MatrixFn = std::function<Eigen::MatrixXcd(double, const ModelParams&)>;

/// A named Hermitian matrix family H(t; params). Families that support the
/// two-parameter (t, tau) structure also carry the commuting partner
/// H'(t, tau) and the analytic derivatives dH/dtau and dH'/dt entering the
/// integrability conditions [H, H'] = 0, dH/dtau = dH'/dt.
struct HamiltonianFamily {
  std::string name;
  int dim = 0;
  MatrixFn eval_H;
  MatrixFn eval_Hprime;     // empty when the family has no commuting partner
  MatrixFn eval_dtau_H;     // analytic dH/dtau, empty if not available
  MatrixFn eval_dt_Hprime;  // analytic dH'/dt, empty if not available

  bool has_partner() const { return static_cast<bool>(eval_Hprime); }

  /// d(H_kk)/dt per level. Every registered family is linear in t, so the
  /// sampled difference H(1) - H(0) gives the slopes exactly.
  std::vector<double> diagonal_slopes(const ModelParams& params) const;
};

// --- model matrices -------------------------------------------------------

/// Two-level Landau-Zener Hamiltonian [[b t, g], [g, -b t]].
Eigen::MatrixXcd lz_hamiltonian(double t, const ModelParams& params);

/// Two uncoupled copies of the LZ model: H (x) 1 + 1 (x) H, a 4-level
/// multistate LZ Hamiltonian.
Eigen::MatrixXcd composite4_hamiltonian(double t, const ModelParams& params);

/// Orthogonal rotation in the {2,3} subspace that sends the antisymmetric
/// combination (the dark state) to position 3. Applied to the composite
/// 4-level matrix it zeroes the third row and column and promotes the
/// couplings to sqrt(2) g.
Eigen::MatrixXcd dark_state_rotation();

/// V^{-1} H4 V for the composite pattern. Requires the input to carry the
/// composite4 structure (checked); the result has an exactly zero third
/// row/column so the reduction to three levels is an exact submatrix.
Eigen::MatrixXcd rotate_out_dark_state(const Eigen::MatrixXcd& H4);

/// Three-level reduction [[2bt, s2 g, 0], [s2 g, 0, s2 g], [0, s2 g, -2bt]]
/// with s2 = sqrt(2).
Eigen::MatrixXcd three_level_hamiltonian(double t, const ModelParams& params);

/// tau-deformed three-level family; tau = 1 recovers three_level_hamiltonian
/// identically.
Eigen::MatrixXcd three_level_tau_family(double t, const ModelParams& params);

/// Commuting partner H' of the tau-deformed family; together they satisfy
/// [H, H'] = 0 and dH/dtau = dH'/dt for all t and tau > 0.
Eigen::MatrixXcd commuting_partner(double t, const ModelParams& params);

/// Analytic dH/dtau of three_level_tau_family.
Eigen::MatrixXcd dtau_three_level_tau(double t, const ModelParams& params);

/// Analytic dH'/dt of commuting_partner.
Eigen::MatrixXcd dt_commuting_partner(double t, const ModelParams& params);

/// Large-tau0 effective two-level Hamiltonian [[2 b tau t, sqrt(2 tau) g],
/// [sqrt(2 tau) g, 0]]; gauge-equivalent to the LZ model with slope b*tau
/// and coupling sqrt(2 tau) g, i.e. it measures p(2 gamma).
Eigen::MatrixXcd effective_two_level(double t, const ModelParams& params);

/// H - shift(t) * identity. Shifting by a multiple of the identity changes
/// only an overall phase of the evolution, never transition probabilities.
Eigen::MatrixXcd gauge_shift(const Eigen::MatrixXcd& H, double t,
                             const std::function<double(double)>& shift);

/// The unit-slope model (b = 1, g/sqrt(b)) with the same probability matrix,
/// obtained by rescaling time t -> sqrt(b) t.
ModelParams scaled_time_equivalent(const ModelParams& params);

// --- registry --------------------------------------------------------------

/// Look up a registered family by name ("lz", "composite4", "three-level",
/// "three-level-tau", "effective-two-level"). Throws std::invalid_argument
/// listing the registered names when unknown.
const HamiltonianFamily& find_family(std::string_view name);

std::vector<std::string> family_names();

/// Negative control for the integrability checks: the tau family with the
/// partner's (2,3) entry overwritten by g, which breaks [H, H'] = 0.
HamiltonianFamily corrupted_tau_family();

}  // namespace lzkit
