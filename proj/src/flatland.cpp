#include "lzkit/flatland.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lzkit {

ParamPath::ParamPath(std::vector<PathPoint> points)
    : vertices(std::move(points)) {
  if (vertices.size() < 2)
    throw std::invalid_argument("path needs at least 2 vertices");
  for (const auto& v : vertices)
    if (!(v.tau > 0.0))
      throw std::invalid_argument("path touches tau <= 0");
  for (size_t k = 1; k < vertices.size(); ++k) {
    const auto& a = vertices[k - 1];
    const auto& b = vertices[k];
    const bool t_fixed = a.t == b.t;
    const bool tau_fixed = a.tau == b.tau;
    if (t_fixed && tau_fixed)
      throw std::invalid_argument("consecutive path vertices must differ");
    if (!t_fixed && !tau_fixed)
      throw std::invalid_argument(
          "path segments must be axis-aligned (pure-t or pure-tau)");
  }
}

CurvatureReport curvature_check(const HamiltonianFamily& family,
                                const ModelParams& params,
                                const std::vector<PathPoint>& grid) {
  if (!family.has_partner() || !family.eval_dtau_H || !family.eval_dt_Hprime)
    throw std::invalid_argument(
        "curvature_check requires a family with a commuting partner and "
        "analytic derivatives");
  if (grid.empty()) throw std::invalid_argument("curvature grid is empty");

  CurvatureReport report;
  report.grid = grid;
  report.commutator_residuals.reserve(grid.size());
  report.compatibility_residuals.reserve(grid.size());

  auto at = [&](const PathPoint& pt) {
    ModelParams p = params;
    p.tau = pt.tau;
    return p;
  };

  for (const auto& pt : grid) {
    const ModelParams p = at(pt);
    const Eigen::MatrixXcd H = family.eval_H(pt.t, p);
    const Eigen::MatrixXcd Hp = family.eval_Hprime(pt.t, p);
    const double comm = (H * Hp - Hp * H).norm();
    const double compat =
        (family.eval_dtau_H(pt.t, p) - family.eval_dt_Hprime(pt.t, p)).norm();
    report.commutator_residuals.push_back(comm);
    report.compatibility_residuals.push_back(compat);
    report.max_commutator = std::max(report.max_commutator, comm);
    report.max_compatibility = std::max(report.max_compatibility, compat);
  }

  // Finite-difference cross-check of both analytic derivatives at 10 points
  // from the grid's bounding box. Fixed seed keeps runs reproducible.
  double t_lo = grid.front().t, t_hi = grid.front().t;
  double tau_lo = grid.front().tau, tau_hi = grid.front().tau;
  for (const auto& pt : grid) {
    t_lo = std::min(t_lo, pt.t);
    t_hi = std::max(t_hi, pt.t);
    tau_lo = std::min(tau_lo, pt.tau);
    tau_hi = std::max(tau_hi, pt.tau);
  }
  std::mt19937 rng(0x5eed);
  std::uniform_real_distribution<double> ut(t_lo, t_hi);
  std::uniform_real_distribution<double> utau(tau_lo, tau_hi);
  const double fd_step = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const double t = ut(rng);
    const double tau = std::max(utau(rng), 2.0 * fd_step);

    ModelParams p = params;
    p.tau = tau;
    ModelParams p_hi = p, p_lo = p;
    p_hi.tau = tau + fd_step;
    p_lo.tau = tau - fd_step;
    const Eigen::MatrixXcd dtau_fd =
        (family.eval_H(t, p_hi) - family.eval_H(t, p_lo)) / (2.0 * fd_step);
    const Eigen::MatrixXcd dt_fd =
        (family.eval_Hprime(t + fd_step, p) -
         family.eval_Hprime(t - fd_step, p)) /
        (2.0 * fd_step);
    const double mismatch =
        std::max((dtau_fd - family.eval_dtau_H(t, p)).norm(),
                 (dt_fd - family.eval_dt_Hprime(t, p)).norm());
    report.max_fd_mismatch = std::max(report.max_fd_mismatch, mismatch);
  }

  return report;
}

UnitaryResult evolve_along_path(const HamiltonianFamily& family,
                                const ModelParams& params,
                                const ParamPath& path,
                                const IntegratorConfig& config) {
  const int dim = family.dim;
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(dim, dim);
  long steps = 0;

  for (size_t k = 1; k < path.vertices.size(); ++k) {
    const PathPoint a = path.vertices[k - 1];
    const PathPoint b = path.vertices[k];
    UnitaryResult seg;
    if (a.tau == b.tau) {
      ModelParams p = params;
      p.tau = a.tau;
      HermitianFn H = [&family, p](double t) { return family.eval_H(t, p); };
      seg = evolve_hermitian(H, a.t, b.t, dim, config);
    } else {
      if (!family.has_partner())
        throw std::invalid_argument(
            "tau-directed segment requires a commuting partner");
      const double t_fixed = a.t;
      HermitianFn Hp = [&family, &params, t_fixed](double tau) {
        ModelParams p = params;
        p.tau = tau;
        return family.eval_Hprime(t_fixed, p);
      };
      seg = evolve_hermitian(Hp, a.tau, b.tau, dim, config);
    }
    U = seg.matrix * U;
    steps += seg.steps_taken;
  }

  UnitaryResult result;
  result.matrix = U;
  result.steps_taken = steps;
  result.unitarity_defect =
      (U.adjoint() * U - Eigen::MatrixXcd::Identity(dim, dim)).norm();
  result.window = EvolutionWindow{path.vertices.front().t,
                                  path.vertices.back().t,
                                  path.vertices.back().tau};
  return result;
}

namespace {

double offdiag_mass(const Eigen::MatrixXcd& U) {
  const Eigen::MatrixXd P = U.cwiseAbs2();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (i != j) row += P(i, j);
    mass = std::max(mass, row);
  }
  return mass;
}

}  // namespace

DeformationRecord deformation_experiment(const ModelParams& params,
                                         double tau0, double T,
                                         const IntegratorConfig& config) {
  if (!(tau0 > 1.0))
    throw std::domain_error("deformation requires tau0 > 1 (path starts at tau = 1)");
  if (!(T > 0.0)) throw std::domain_error("deformation requires T > 0");

  const HamiltonianFamily& family = find_family("three-level-tau");

  const ParamPath straight({{-T, 1.0}, {T, 1.0}});
  const ParamPath deformed({{-T, 1.0}, {-T, tau0}, {T, tau0}, {T, 1.0}});
  const ParamPath up({{-T, 1.0}, {-T, tau0}});
  const ParamPath down({{T, tau0}, {T, 1.0}});

  const UnitaryResult U1 = evolve_along_path(family, params, straight, config);
  const UnitaryResult U2 = evolve_along_path(family, params, deformed, config);
  const UnitaryResult Vup = evolve_along_path(family, params, up, config);
  const UnitaryResult Vdown = evolve_along_path(family, params, down, config);

  DeformationRecord rec;
  rec.gamma = params.gamma();
  rec.tau0 = tau0;
  rec.T = T;
  rec.p_horizontal = std::norm(U1.matrix(0, 0));
  rec.p_deformed = std::norm(U2.matrix(0, 0));
  rec.difference = rec.p_deformed - rec.p_horizontal;
  rec.vertical_offdiag_up = offdiag_mass(Vup.matrix);
  rec.vertical_offdiag_down = offdiag_mass(Vdown.matrix);
  rec.unitarity_defect =
      std::max(U1.unitarity_defect, U2.unitarity_defect);
  const TransitionMatrix P1 = transition_matrix(U1);
  const TransitionMatrix P2 = transition_matrix(U2);
  rec.row_defect = std::max(P1.row_defect, P2.row_defect);
  rec.col_defect = std::max(P1.col_defect, P2.col_defect);
  return rec;
}

ProbabilityResult tau_scaling_probability(const ModelParams& params,
                                          double tau,
                                          const LimitPolicy& policy,
                                          const IntegratorConfig& config) {
  if (!(tau > 0.0)) throw std::domain_error("tau must be positive");
  ModelParams p = params;
  p.tau = tau;
  return survival_probability(find_family("effective-two-level"), p, 0,
                              policy, config);
}

std::vector<PathPoint> make_grid(double t_lo, double t_hi, double t_step,
                                 double tau_lo, double tau_hi,
                                 double tau_step) {
  if (!(t_step > 0.0) || !(tau_step > 0.0))
    throw std::invalid_argument("grid steps must be positive");
  if (t_hi < t_lo || tau_hi < tau_lo)
    throw std::invalid_argument("grid ranges must be non-decreasing");
  std::vector<PathPoint> grid;
  const auto count = [](double lo, double hi, double step) {
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  };
  const int nt = count(t_lo, t_hi, t_step);
  const int ntau = count(tau_lo, tau_hi, tau_step);
  grid.reserve(static_cast<size_t>(nt) * ntau);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < ntau; ++j)
      grid.push_back({t_lo + i * t_step, tau_lo + j * tau_step});
  return grid;
}

std::vector<PathPoint> standard_grid() {
  return make_grid(-5.0, 5.0, 1.0, 0.5, 4.0, 0.5);
}

}  // namespace lzkit
