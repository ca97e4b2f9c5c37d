#include "lzkit/models.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lzkit {

namespace {

void require_slope(const ModelParams& params) {
  if (!(params.b > 0.0))
    throw std::domain_error("slope b must be positive, got b = " +
                            std::to_string(params.b));
}

void require_tau(const ModelParams& params) {
  if (!(params.tau > 0.0))
    throw std::domain_error("deformation parameter tau must be positive, got tau = " +
                            std::to_string(params.tau));
}

}  // namespace

Eigen::MatrixXcd lz_hamiltonian(double t, const ModelParams& params) {
  require_slope(params);
  Eigen::MatrixXcd H(2, 2);
  H << params.b * t, params.g,
       params.g, -params.b * t;
  return H;
}

Eigen::MatrixXcd composite4_hamiltonian(double t, const ModelParams& params) {
  require_slope(params);
  const double bt = params.b * t;
  const double g = params.g;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(4, 4);
  H(0, 0) = 2.0 * bt;
  H(3, 3) = -2.0 * bt;
  H(0, 1) = H(1, 0) = g;
  H(0, 2) = H(2, 0) = g;
  H(1, 3) = H(3, 1) = g;
  H(2, 3) = H(3, 2) = g;
  return H;
}

Eigen::MatrixXcd dark_state_rotation() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Identity(4, 4);
  // Columns 2,3: symmetric combination second, antisymmetric (dark) third.
  V(1, 1) = r;  V(1, 2) = r;
  V(2, 1) = r;  V(2, 2) = -r;
  return V;
}

Eigen::MatrixXcd rotate_out_dark_state(const Eigen::MatrixXcd& H4) {
  if (H4.rows() != 4 || H4.cols() != 4)
    throw std::invalid_argument("rotate_out_dark_state expects a 4x4 matrix");

  // The contract covers the composite pattern [[2bt, g, g, 0], [g,0,0,g],
  // [g,0,0,g], [0,g,g,-2bt]]. Reading (2bt, g) off the input and emitting
  // the rotated pattern directly keeps the three-level reduction an exact
  // (bit-for-bit) submatrix, which a numeric triple product cannot do.
  const Complex d = H4(0, 0);
  const Complex g = H4(0, 1);
  const double scale = std::max(std::abs(d), std::abs(g)) + 1.0;
  auto near = [scale](Complex a, Complex b) {
    return std::abs(a - b) <= 1e-9 * scale;
  };
  const bool pattern =
      near(H4(0, 2), g) && near(H4(1, 3), g) && near(H4(2, 3), g) &&
      near(H4(3, 3), -d) && near(H4(0, 3), 0.0) && near(H4(1, 1), 0.0) &&
      near(H4(2, 2), 0.0) && near(H4(1, 2), 0.0) &&
      near(H4(1, 0), g) && near(H4(2, 0), g) && near(H4(3, 1), g) &&
      near(H4(3, 2), g) && near(H4(3, 0), 0.0) && near(H4(2, 1), 0.0);
  if (!pattern)
    throw std::invalid_argument(
        "rotate_out_dark_state expects the composite 4-level pattern");

  const Complex c = std::sqrt(2.0) * g;
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(4, 4);
  R(0, 0) = d;
  R(3, 3) = -d;
  R(0, 1) = R(1, 0) = c;
  R(1, 3) = R(3, 1) = c;
  return R;
}

Eigen::MatrixXcd three_level_hamiltonian(double t, const ModelParams& params) {
  require_slope(params);
  const double bt2 = 2.0 * params.b * t;
  const double c = std::sqrt(2.0) * params.g;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(3, 3);
  H(0, 0) = bt2;
  H(2, 2) = -bt2;
  H(0, 1) = H(1, 0) = c;
  H(1, 2) = H(2, 1) = c;
  return H;
}

Eigen::MatrixXcd three_level_tau_family(double t, const ModelParams& params) {
  require_slope(params);
  require_tau(params);
  const double tau = params.tau;
  const double g = params.g;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(3, 3);
  H(0, 0) = 2.0 * params.b * tau * t;
  H(2, 2) = -2.0 * params.b * t;
  H(0, 1) = H(1, 0) = std::sqrt(2.0 * tau) * g;
  H(1, 2) = H(2, 1) = std::sqrt(2.0) * g;
  return H;
}

Eigen::MatrixXcd commuting_partner(double t, const ModelParams& params) {
  require_slope(params);
  require_tau(params);
  const double b = params.b;
  const double g = params.g;
  const double tau = params.tau;
  const double g2 = g * g;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(3, 3);
  H(0, 0) = g2 / (2.0 * b * (tau + 1.0)) + b * t * t;
  H(1, 1) = g2 / (2.0 * b * tau);
  H(2, 2) = g2 / (2.0 * b * tau * (tau + 1.0));
  H(0, 1) = H(1, 0) = g * t / std::sqrt(2.0 * tau);
  H(0, 2) = H(2, 0) = g2 / (2.0 * b * (tau + 1.0) * std::sqrt(tau));
  return H;
}

Eigen::MatrixXcd dtau_three_level_tau(double t, const ModelParams& params) {
  require_slope(params);
  require_tau(params);
  // Hand-differentiated from the tau family: d(2 b tau t)/dtau = 2 b t,
  // d(sqrt(2 tau) g)/dtau = g / sqrt(2 tau); the tau-independent entries drop.
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D(0, 0) = 2.0 * params.b * t;
  D(0, 1) = D(1, 0) = params.g / std::sqrt(2.0 * params.tau);
  return D;
}

Eigen::MatrixXcd dt_commuting_partner(double t, const ModelParams& params) {
  require_slope(params);
  require_tau(params);
  // Only the b t^2 diagonal term and the g t / sqrt(2 tau) coupling move in t.
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D(0, 0) = 2.0 * params.b * t;
  D(0, 1) = D(1, 0) = params.g / std::sqrt(2.0 * params.tau);
  return D;
}

Eigen::MatrixXcd effective_two_level(double t, const ModelParams& params) {
  require_slope(params);
  require_tau(params);
  Eigen::MatrixXcd H(2, 2);
  const double c = std::sqrt(2.0 * params.tau) * params.g;
  H << 2.0 * params.b * params.tau * t, c,
       c, 0.0;
  return H;
}

Eigen::MatrixXcd gauge_shift(const Eigen::MatrixXcd& H, double t,
                             const std::function<double(double)>& shift) {
  return H - shift(t) * Eigen::MatrixXcd::Identity(H.rows(), H.cols());
}

ModelParams scaled_time_equivalent(const ModelParams& params) {
  require_slope(params);
  return ModelParams{1.0, params.g / std::sqrt(params.b), params.tau};
}

std::vector<double> HamiltonianFamily::diagonal_slopes(
    const ModelParams& params) const {
  const Eigen::MatrixXcd H0 = eval_H(0.0, params);
  const Eigen::MatrixXcd H1 = eval_H(1.0, params);
  std::vector<double> slopes(static_cast<size_t>(dim));
  for (int k = 0; k < dim; ++k)
    slopes[static_cast<size_t>(k)] = (H1(k, k) - H0(k, k)).real();
  return slopes;
}

namespace {

std::map<std::string, HamiltonianFamily, std::less<>> build_registry() {
  std::map<std::string, HamiltonianFamily, std::less<>> reg;
  reg["lz"] = HamiltonianFamily{"lz", 2, &lz_hamiltonian, {}, {}, {}};
  reg["composite4"] =
      HamiltonianFamily{"composite4", 4, &composite4_hamiltonian, {}, {}, {}};
  reg["three-level"] =
      HamiltonianFamily{"three-level", 3, &three_level_hamiltonian, {}, {}, {}};
  reg["three-level-tau"] = HamiltonianFamily{
      "three-level-tau", 3, &three_level_tau_family, &commuting_partner,
      &dtau_three_level_tau, &dt_commuting_partner};
  reg["effective-two-level"] = HamiltonianFamily{
      "effective-two-level", 2, &effective_two_level, {}, {}, {}};
  return reg;
}

const std::map<std::string, HamiltonianFamily, std::less<>>& registry() {
  static const auto reg = build_registry();
  return reg;
}

}  // namespace

const HamiltonianFamily& find_family(std::string_view name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::ostringstream msg;
    msg << "unknown model '" << name << "'; registered models:";
    for (const auto& [key, fam] : reg) msg << ' ' << key;
    throw std::invalid_argument(msg.str());
  }
  return it->second;
}

std::vector<std::string> family_names() {
  std::vector<std::string> names;
  for (const auto& [key, fam] : registry()) names.push_back(key);
  return names;
}

HamiltonianFamily corrupted_tau_family() {
  HamiltonianFamily fam = find_family("three-level-tau");
  fam.name = "three-level-tau-corrupted";
  fam.eval_Hprime = [](double t, const ModelParams& p) {
    Eigen::MatrixXcd Hp = commuting_partner(t, p);
    Hp(1, 2) = Hp(2, 1) = p.g;
    return Hp;
  };
  return fam;
}

}  // namespace lzkit
