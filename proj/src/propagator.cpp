#include "lzkit/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lzkit {

namespace {

constexpr double kGaussOffset = 0.28867513459481288225;  // sqrt(3)/6

/// Hermitian generator M of one step: U_step = exp(-i M). Built from the two
/// Gauss-Legendre samples H1, H2 of [t, t+h] with the leading Magnus
/// commutator correction, so the step is 4th-order accurate while exp(-iM)
/// stays exactly unitary.
Eigen::MatrixXcd step_generator(const HermitianFn& H, double t, double h) {
  const Eigen::MatrixXcd H1 = H(t + (0.5 - kGaussOffset) * h);
  const Eigen::MatrixXcd H2 = H(t + (0.5 + kGaussOffset) * h);
  const Complex i(0.0, 1.0);
  const double c = std::sqrt(3.0) * h * h / 12.0;
  return 0.5 * h * (H1 + H2) + i * c * (H1 * H2 - H2 * H1);
}

/// exp(-i M) for Hermitian M via eigendecomposition; exactly unitary up to
/// the eigensolver's rounding.
Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  const auto& lambda = es.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    phases(k) = std::polar(1.0, -lambda(k));
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

double unitarity_defect_of(const Eigen::MatrixXcd& U) {
  const Eigen::MatrixXcd I =
      Eigen::MatrixXcd::Identity(U.rows(), U.cols());
  return (U.adjoint() * U - I).norm();
}

}  // namespace

UnitaryResult evolve_hermitian(const HermitianFn& H, double s0, double s1,
                               int dim, const IntegratorConfig& config) {
  if (!(config.step_tolerance > 0.0) || !(config.max_step > 0.0))
    throw std::invalid_argument("step_tolerance and max_step must be positive");

  UnitaryResult result;
  result.window = EvolutionWindow{s0, s1, 1.0};
  result.matrix = Eigen::MatrixXcd::Identity(dim, dim);

  const double length = s1 - s0;
  if (length == 0.0) return result;
  const double dir = length > 0.0 ? 1.0 : -1.0;
  const double span = std::abs(length);

  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(dim, dim);
  long steps = 0;

  if (config.method == StepMethod::FixedStep) {
    const long n = std::max<long>(1, static_cast<long>(
                                         std::ceil(span / config.max_step)));
    const double h = length / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      const double t = s0 + static_cast<double>(k) * h;
      U = unitary_exp(step_generator(H, t, h)) * U;
      ++steps;
    }
  } else {
    double t = s0;
    double h = dir * std::min(config.max_step, span);
    const double t_eps = 1e-14 * (span + std::abs(s0) + std::abs(s1));
    while (dir * (s1 - t) > t_eps) {
      if (dir * (t + h) > dir * s1) h = s1 - t;

      const Eigen::MatrixXcd U_full =
          unitary_exp(step_generator(H, t, h));
      const Eigen::MatrixXcd U_half_a =
          unitary_exp(step_generator(H, t, 0.5 * h));
      const Eigen::MatrixXcd U_half_b =
          unitary_exp(step_generator(H, t + 0.5 * h, 0.5 * h));
      const Eigen::MatrixXcd U_two = U_half_b * U_half_a;

      const double err = (U_two - U_full).norm();
      // Per-unit-time error budget, floored where the Richardson estimate
      // drops into eigensolver rounding noise.
      const double tol =
          std::max(7.5 * config.step_tolerance * std::abs(h), 5e-14);

      if (err <= tol) {
        U = U_two * U;
        t += h;
        steps += 2;
      }
      double factor = err > 0.0 ? 0.85 * std::pow(tol / err, 0.25) : 4.0;
      factor = std::clamp(factor, 0.2, 4.0);
      h = dir * std::min(config.max_step, std::abs(h) * factor);
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream msg;
        msg << "step size underflow at s = " << t;
        throw StepUnderflowError(msg.str());
      }
    }
  }

  result.matrix = U;
  result.steps_taken = steps;
  result.unitarity_defect = unitarity_defect_of(U);
  return result;
}

namespace {

struct DiagonalGauge {
  Eigen::VectorXd offset;  // H_kk(0)
  Eigen::VectorXd slope;   // d H_kk / dt

  Eigen::VectorXd phase(double t) const {
    return offset * t + 0.5 * t * t * slope;
  }
  Eigen::MatrixXcd S(double t) const {
    const Eigen::VectorXd phi = phase(t);
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(phi.size(), phi.size());
    for (Eigen::Index k = 0; k < phi.size(); ++k)
      s(k, k) = std::polar(1.0, phi(k));
    return s;
  }
};

DiagonalGauge make_gauge(const HermitianFn& H, int dim) {
  DiagonalGauge g;
  g.offset.resize(dim);
  g.slope.resize(dim);
  const Eigen::MatrixXcd H0 = H(0.0);
  const Eigen::MatrixXcd H1 = H(1.0);
  const Eigen::MatrixXcd Hm = H(0.5);
  for (int k = 0; k < dim; ++k) {
    g.offset(k) = H0(k, k).real();
    g.slope(k) = (H1(k, k) - H0(k, k)).real();
    const double predicted = g.offset(k) + 0.5 * g.slope(k);
    const double scale =
        std::abs(g.offset(k)) + std::abs(g.slope(k)) + 1.0;
    if (std::abs(Hm(k, k).real() - predicted) > 1e-9 * scale)
      throw std::invalid_argument(
          "interaction picture requires diagonals linear in t");
  }
  return g;
}

}  // namespace

UnitaryResult evolve_window(const HamiltonianFamily& family,
                            const ModelParams& params,
                            const EvolutionWindow& window,
                            const IntegratorConfig& config) {
  if (!(window.t_start < window.t_end))
    throw std::invalid_argument("evolution window requires t_start < t_end");

  ModelParams p = params;
  p.tau = window.tau;
  HermitianFn H = [&family, p](double t) { return family.eval_H(t, p); };

  UnitaryResult result;
  if (config.interaction_picture) {
    const DiagonalGauge gauge = make_gauge(H, family.dim);
    HermitianFn Hbar = [H, gauge](double t) {
      Eigen::MatrixXcd A = H(t);
      const Eigen::VectorXd phi = gauge.phase(t);
      for (Eigen::Index j = 0; j < A.rows(); ++j) {
        A(j, j) = 0.0;
        for (Eigen::Index k = 0; k < A.cols(); ++k)
          if (j != k) A(j, k) *= std::polar(1.0, phi(j) - phi(k));
      }
      return A;
    };
    result = evolve_hermitian(Hbar, window.t_start, window.t_end, family.dim,
                              config);
    // back to the original frame: U = S(t_end)^dag  U_bar  S(t_start)
    result.matrix = gauge.S(window.t_end).adjoint() * result.matrix *
                    gauge.S(window.t_start);
  } else {
    result =
        evolve_hermitian(H, window.t_start, window.t_end, family.dim, config);
  }
  result.window = window;
  if (result.unitarity_defect > 1e-8) {
    std::ostringstream msg;
    msg << "unitarity defect " << result.unitarity_defect
        << " exceeds 1e-8 over [" << window.t_start << ", " << window.t_end
        << "]";
    throw UnitarityError(msg.str());
  }
  return result;
}

TransitionMatrix transition_matrix(const UnitaryResult& U) {
  if (U.unitarity_defect > 1e-8)
    throw UnitarityError("transition_matrix: unitarity defect exceeds 1e-8");
  const Eigen::Index n = U.matrix.rows();
  TransitionMatrix P;
  P.entries = U.matrix.cwiseAbs2();
  P.row_defect = 0.0;
  P.col_defect = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    P.row_defect =
        std::max(P.row_defect, std::abs(P.entries.row(k).sum() - 1.0));
    P.col_defect =
        std::max(P.col_defect, std::abs(P.entries.col(k).sum() - 1.0));
  }
  return P;
}

namespace {

/// Distinct nonzero |slope_i - slope_j| over level pairs. Each one is an
/// oscillation frequency (gap * T) of the finite-window correction.
std::vector<double> distinct_slope_gaps(const std::vector<double>& slopes) {
  std::vector<double> gaps;
  for (size_t i = 0; i < slopes.size(); ++i)
    for (size_t j = i + 1; j < slopes.size(); ++j) {
      const double d = std::abs(slopes[i] - slopes[j]);
      if (d <= 1e-12) continue;
      bool known = false;
      for (double g : gaps)
        if (std::abs(g - d) <= 1e-9 * (g + d)) known = true;
      if (!known) gaps.push_back(d);
    }
  return gaps;
}

/// Endpoint offsets whose uniform mean cancels every listed oscillation
/// frequency exactly: q equally spaced samples of each gap's period
/// 2 pi / (gap * T), combined as subset sums. With q = 2, a sample pair half
/// a period apart annihilates its frequency independently of the others.
std::vector<double> cancellation_offsets(const std::vector<double>& gaps,
                                         double T, int q) {
  std::vector<double> offsets{0.0};
  for (double gap : gaps) {
    const double period = 2.0 * std::numbers::pi / (gap * T);
    std::vector<double> next;
    next.reserve(offsets.size() * static_cast<size_t>(q));
    for (double base : offsets)
      for (int j = 0; j < q; ++j)
        next.push_back(base + j * period / q);
    offsets = std::move(next);
  }
  std::sort(offsets.begin(), offsets.end());
  return offsets;
}

/// Mean of |(B_j * core * A_i)_{level,level}|^2 over the cancellation
/// offsets applied independently to the two window ends; removes the leading
/// O(1/T) oscillatory finite-window correction.
double endpoint_averaged_probability(const HermitianFn& H, int dim, int level,
                                     const Eigen::MatrixXcd& core, double T,
                                     const std::vector<double>& gaps,
                                     int samples_per_frequency,
                                     const IntegratorConfig& config,
                                     long* steps_out) {
  if (gaps.empty())  // no oscillating level pair, p(T) is already flat
    return std::norm(core(level, level));

  const std::vector<double> offsets =
      cancellation_offsets(gaps, T, samples_per_frequency);
  const size_t m = offsets.size();

  std::vector<Eigen::MatrixXcd> right(m), left(m);
  right[0] = Eigen::MatrixXcd::Identity(dim, dim);
  left[0] = Eigen::MatrixXcd::Identity(dim, dim);
  for (size_t j = 1; j < m; ++j) {
    UnitaryResult r =
        evolve_hermitian(H, T + offsets[j - 1], T + offsets[j], dim, config);
    UnitaryResult l = evolve_hermitian(H, -T - offsets[j], -T - offsets[j - 1],
                                       dim, config);
    if (steps_out) *steps_out += r.steps_taken + l.steps_taken;
    right[j] = r.matrix * right[j - 1];
    left[j] = left[j - 1] * l.matrix;
  }

  double acc = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const Eigen::MatrixXcd mid = core * left[i];
    for (size_t j = 0; j < m; ++j) {
      const Complex amp = (right[j].row(level) * mid.col(level)).value();
      acc += std::norm(amp);
    }
  }
  return acc / (static_cast<double>(m) * m);
}

}  // namespace

ProbabilityResult survival_probability(const HamiltonianFamily& family,
                                       const ModelParams& params, int level,
                                       const LimitPolicy& policy,
                                       const IntegratorConfig& config) {
  if (level < 0 || level >= family.dim)
    throw std::invalid_argument("survival level out of range");
  if (policy.max_rungs < 2 || !(policy.tolerance > 0.0) ||
      !(policy.t_base > 0.0) || !(policy.ladder_factor > 1.0) ||
      policy.endpoint_samples < 1)
    throw std::invalid_argument("invalid limit policy");

  HermitianFn H = [&family, params](double t) {
    return family.eval_H(t, params);
  };
  const int dim = family.dim;
  const std::vector<double> gaps =
      distinct_slope_gaps(family.diagonal_slopes(params));
  const double min_gap =
      gaps.empty() ? 0.0 : *std::min_element(gaps.begin(), gaps.end());
  const double b_eff = min_gap > 0.0 ? 0.5 * min_gap : params.b;
  const double T0 = policy.t_base / std::sqrt(b_eff);

  ProbabilityResult out;
  Eigen::MatrixXcd core;  // U(-T_k -> +T_k), extended rung by rung
  double T_prev = 0.0;

  auto evolve = [&](double a, double b) {
    UnitaryResult r = evolve_hermitian(H, a, b, dim, config);
    out.total_steps += r.steps_taken;
    return r.matrix;
  };

  for (int k = 0; k < policy.max_rungs; ++k) {
    const double T = T0 * std::pow(policy.ladder_factor, k);
    if (k == 0) {
      core = evolve(-T, T);
    } else {
      core = evolve(T_prev, T) * core * evolve(-T, -T_prev);
    }
    T_prev = T;
    out.unitarity_defect =
        std::max(out.unitarity_defect, unitarity_defect_of(core));

    const double p = endpoint_averaged_probability(
        H, dim, level, core, T, gaps, policy.endpoint_samples, config,
        &out.total_steps);
    out.ladder.push_back({T, p});

    if (k >= 1) {
      const double diff = std::abs(p - out.ladder[k - 1].p);
      if (diff < policy.tolerance) {
        out.p = p;
        out.error = std::max(diff, 1e-7);
        out.final_T = T;
        UnitaryResult accepted;
        accepted.matrix = core;
        accepted.unitarity_defect = out.unitarity_defect;
        const TransitionMatrix P = transition_matrix(accepted);
        out.row_defect = P.row_defect;
        out.col_defect = P.col_defect;
        return out;
      }
    }
  }

  std::ostringstream msg;
  msg << "survival probability did not converge within the T-ladder:";
  for (const auto& r : out.ladder) msg << " p(" << r.T << ")=" << r.p;
  throw ConvergenceError(msg.str(), out.ladder);
}

double windowed_survival_probability(const HamiltonianFamily& family,
                                     const ModelParams& params, int level,
                                     double T, int samples,
                                     const IntegratorConfig& config) {
  if (level < 0 || level >= family.dim)
    throw std::invalid_argument("survival level out of range");
  if (!(T > 0.0) || samples < 1)
    throw std::invalid_argument("window half-width and samples must be positive");

  HermitianFn H = [&family, params](double t) {
    return family.eval_H(t, params);
  };
  const auto gaps = distinct_slope_gaps(family.diagonal_slopes(params));
  const UnitaryResult core = evolve_hermitian(H, -T, T, family.dim, config);
  return endpoint_averaged_probability(H, family.dim, level, core.matrix, T,
                                       gaps, samples, config, nullptr);
}

}  // namespace lzkit
