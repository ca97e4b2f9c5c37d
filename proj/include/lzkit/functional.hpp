#pragma once

#include "lzkit/flatland.hpp"
#include "lzkit/propagator.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace lzkit {

using Rational = boost::multiprecision::cpp_rational;

/// Parse "7", "-1", "355/113", "-3/4" into an exact rational.
Rational parse_rational(const std::string& text);

/// One row of a functional-equation sweep: both sides of p(2g) = p(g)^2
/// measured by independent propagator runs.
struct SweepRecord {
  double gamma = 0.0;
  double p = 0.0;
  double p_error = 0.0;
  double p_double_gamma = 0.0;
  double p_double_gamma_error = 0.0;
  double residual = 0.0;  // p(2 gamma) - p(gamma)^2
  bool ok = true;
  std::string note;
  // worst diagnostics over the two underlying runs
  double unitarity_defect = 0.0;
  double row_defect = 0.0;
  double col_defect = 0.0;
};

/// Exact Taylor coefficients of the functional equation p(2g) = p(g)^2 and
/// their comparison with the closed form a_n = a1^n / n!.
struct RecurrenceTable {
  int a0_branch = 1;  // 1 or 0, the two solutions of a0 = a0^2
  Rational a1;
  std::vector<Rational> coefficients;   // a_0 .. a_N
  std::vector<bool> closed_form_match;  // a_n * n! == a1^n (zero branch: a_n == 0)
};

struct FitResult {
  double c_estimate = 0.0;
  double covariance = 0.0;
  double residual_norm = 0.0;
  std::vector<std::pair<double, double>> data;  // (gamma, p)
  std::string model = "p = exp(c*gamma)";
};

struct FresnelResult {
  std::complex<double> value;
  double error_estimate = 0.0;
};

/// Coefficients of the small-gamma expansion 1 - p = slope*gamma +
/// quadratic*gamma^2 fitted by linear least squares; `slope` estimates the
/// derivative of 1 - p at gamma = 0.
struct SlopeFit {
  double slope = 0.0;
  double quadratic = 0.0;
  double residual_norm = 0.0;
};

/// Measure p(gamma) and p(2 gamma) by direct LZ runs (b = 1, g = sqrt(gamma))
/// and record the functional-equation residual.
SweepRecord functional_residual(double gamma, const LimitPolicy& policy = {});

/// Same residual, but p(2 gamma) measured through the tau-deformation
/// reduction chain (effective two-level model at the given tau).
SweepRecord functional_residual_via_reduction(double gamma, double tau,
                                              const LimitPolicy& policy = {});

/// Solve 2^n a_n = sum_l a_l a_{n-l} exactly: a0_branch selects a_0 = 1
/// (free a_1, closed form a1^n/n!) or a_0 = 0 (the zero solution).
RecurrenceTable solve_recurrence(const Rational& a1, int N, int a0_branch = 1);

/// Integral of e^{i b t^2} over the whole line, computed as panel quadrature
/// on [-T, T] plus an integration-by-parts tail of the given order. The error
/// estimate is the magnitude of the first omitted tail term.
FresnelResult fresnel_integral(double b, double T, int correction_order);

/// First-order Dyson amplitude -i g * fresnel(b, T, 3); its absolute square
/// approximates 1 - p at leading order in g.
std::complex<double> first_order_amplitude(const ModelParams& params,
                                           double T);

/// Least-squares fit of ln p = c * gamma through the origin over measured
/// probabilities.
FitResult fit_exponent(const std::vector<double>& gammas,
                       const LimitPolicy& policy = {});

/// Same fit on synthetic data p = exp(c_true * gamma); exercises the fit
/// machinery without the propagator.
FitResult fit_exponent_synthetic(const std::vector<double>& gammas,
                                 double c_true);

/// One SweepRecord per gamma; per-row propagator failures are recorded in
/// the row, not thrown.
std::vector<SweepRecord> gamma_sweep(const std::vector<double>& gammas,
                                     const LimitPolicy& policy = {});

/// Slope of (1 - p) at gamma -> 0 from measured probabilities via a
/// {gamma, gamma^2} least-squares fit (the gamma^2 term absorbs the
/// second-order Dyson contribution that would otherwise bias the slope).
SlopeFit perturbative_slope(const std::vector<double>& gammas,
                            const LimitPolicy& policy = {});

}  // namespace lzkit
