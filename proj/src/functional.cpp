#include "lzkit/functional.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lzkit {

using boost::multiprecision::cpp_int;

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(cpp_int(text));
    const cpp_int num(text.substr(0, slash));
    const cpp_int den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse rational '" + text + "'");
  }
}

namespace {

ProbabilityResult measure_p(double gamma, const LimitPolicy& policy) {
  const ModelParams params{1.0, std::sqrt(gamma), 1.0};
  return survival_probability(find_family("lz"), params, 0, policy);
}

}  // namespace

namespace {

void fill_diagnostics(SweepRecord& rec, const ProbabilityResult& r1,
                      const ProbabilityResult& r2) {
  rec.unitarity_defect = std::max(r1.unitarity_defect, r2.unitarity_defect);
  rec.row_defect = std::max(r1.row_defect, r2.row_defect);
  rec.col_defect = std::max(r1.col_defect, r2.col_defect);
}

}  // namespace

SweepRecord functional_residual(double gamma, const LimitPolicy& policy) {
  if (!(gamma >= 0.0)) throw std::domain_error("gamma must be non-negative");
  SweepRecord rec;
  rec.gamma = gamma;
  const ProbabilityResult r1 = measure_p(gamma, policy);
  const ProbabilityResult r2 = measure_p(2.0 * gamma, policy);
  rec.p = r1.p;
  rec.p_error = r1.error;
  rec.p_double_gamma = r2.p;
  rec.p_double_gamma_error = r2.error;
  rec.residual = r2.p - r1.p * r1.p;
  fill_diagnostics(rec, r1, r2);
  return rec;
}

SweepRecord functional_residual_via_reduction(double gamma, double tau,
                                              const LimitPolicy& policy) {
  if (!(gamma >= 0.0)) throw std::domain_error("gamma must be non-negative");
  if (!(tau > 0.0)) throw std::domain_error("tau must be positive");
  SweepRecord rec;
  rec.gamma = gamma;
  const ProbabilityResult r1 = measure_p(gamma, policy);
  const ModelParams params{1.0, std::sqrt(gamma), tau};
  const ProbabilityResult r2 = tau_scaling_probability(params, tau, policy);
  rec.p = r1.p;
  rec.p_error = r1.error;
  rec.p_double_gamma = r2.p;
  rec.p_double_gamma_error = r2.error;
  rec.residual = r2.p - r1.p * r1.p;
  fill_diagnostics(rec, r1, r2);
  return rec;
}

RecurrenceTable solve_recurrence(const Rational& a1, int N, int a0_branch) {
  if (N < 1) throw std::invalid_argument("recurrence order N must be >= 1");
  if (a0_branch != 0 && a0_branch != 1)
    throw std::invalid_argument("a0 branch must be 0 or 1");

  RecurrenceTable table;
  table.a0_branch = a0_branch;
  table.a1 = a0_branch == 1 ? a1 : Rational(0);
  auto& a = table.coefficients;
  a.resize(static_cast<size_t>(N) + 1);

  a[0] = a0_branch;
  if (N >= 1) a[1] = table.a1;  // n = 1 leaves a1 free on the a0 = 1 branch;
                                // a0 = 0 forces a1 = 0
  for (int n = 2; n <= N; ++n) {
    // (2^n - 2) a_n = sum_{l=1}^{n-1} a_l a_{n-l}
    Rational sum = 0;
    for (int l = 1; l <= n - 1; ++l)
      sum += a[static_cast<size_t>(l)] * a[static_cast<size_t>(n - l)];
    const Rational denom = Rational((cpp_int(1) << n) - 2);
    a[static_cast<size_t>(n)] = sum / denom;
  }

  // Closed form: a_n * n! == a1^n on the a0 = 1 branch (multiplicative form,
  // valid for a1 = 0 as well); the zero branch must vanish identically.
  table.closed_form_match.resize(a.size());
  Rational a1_pow = 1;
  cpp_int factorial = 1;
  for (int n = 0; n <= N; ++n) {
    if (n > 0) {
      a1_pow *= table.a1;
      factorial *= n;
    }
    const auto idx = static_cast<size_t>(n);
    table.closed_form_match[idx] =
        a0_branch == 1 ? (a[idx] * factorial == a1_pow) : (a[idx] == 0);
  }
  return table;
}

namespace {

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNode[5] = {0.14887433898163121, 0.43339539412924719,
                               0.67940956829902441, 0.86506336668898451,
                               0.97390652851717172};
constexpr double kGlWeight[5] = {0.29552422471475287, 0.26926671930999635,
                                 0.21908636251598204, 0.14945134915058059,
                                 0.066671344308688138};

std::complex<double> gl10(double a, double b,
                          const std::function<std::complex<double>(double)>& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::complex<double> acc = 0.0;
  for (int k = 0; k < 5; ++k) {
    acc += kGlWeight[k] *
           (f(mid - half * kGlNode[k]) + f(mid + half * kGlNode[k]));
  }
  return half * acc;
}

}  // namespace

FresnelResult fresnel_integral(double b, double T, int correction_order) {
  if (!(b > 0.0)) throw std::domain_error("fresnel_integral requires b > 0");
  if (!(T > 0.0)) throw std::domain_error("fresnel_integral requires T > 0");
  if (correction_order < 0)
    throw std::invalid_argument("correction order must be >= 0");

  const auto f = [b](double t) {
    return std::polar(1.0, b * t * t);
  };

  // Even integrand: integrate [0, T] on panels short enough that the phase
  // b t^2 advances by at most pi/2 per panel, then double.
  std::complex<double> body = 0.0;
  double t = 0.0;
  const double dphi = 0.5 * std::numbers::pi;
  while (t < T) {
    const double next = std::min(T, std::sqrt(t * t + dphi / b));
    body += gl10(t, next, f);
    t = next;
  }

  // Tail by repeated integration by parts:
  //   I_k = int_T^inf e^{i b t^2} t^{-2k} dt
  //       = -e^{i b T^2} T^{-2k-1} / (2 i b) + (2k+1)/(2 i b) I_{k+1}.
  const std::complex<double> two_ib(0.0, 2.0 * b);
  const std::complex<double> phase = std::polar(1.0, b * T * T);
  std::complex<double> tail = 0.0;
  std::complex<double> coeff = 1.0;
  for (int k = 0; k < correction_order; ++k) {
    tail += -coeff * phase * std::pow(T, -(2 * k + 1)) / two_ib;
    coeff *= static_cast<double>(2 * k + 1) / two_ib;
  }
  const double omitted =
      std::abs(coeff) * std::pow(T, -(2 * correction_order + 1)) / (2.0 * b);

  FresnelResult result;
  result.value = 2.0 * (body + tail);
  result.error_estimate = 2.0 * omitted + 1e-14 * T;
  return result;
}

std::complex<double> first_order_amplitude(const ModelParams& params,
                                           double T) {
  if (!(params.b > 0.0)) throw std::domain_error("b must be positive");
  const FresnelResult fresnel = fresnel_integral(params.b, T, 3);
  return std::complex<double>(0.0, -params.g) * fresnel.value;
}

namespace {

FitResult fit_log_through_origin(
    const std::vector<std::pair<double, double>>& data) {
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [gamma, p] : data) {
    if (!(p > 0.0))
      throw std::runtime_error(
          "fit_exponent: non-positive probability measurement at gamma = " +
          std::to_string(gamma));
    sxx += gamma * gamma;
    sxy += gamma * std::log(p);
  }
  FitResult fit;
  fit.data = data;
  fit.c_estimate = sxy / sxx;
  double ss = 0.0;
  for (const auto& [gamma, p] : data) {
    const double r = std::log(p) - fit.c_estimate * gamma;
    ss += r * r;
  }
  fit.residual_norm = std::sqrt(ss);
  fit.covariance =
      data.size() > 1 ? ss / (static_cast<double>(data.size()) - 1.0) / sxx
                      : 0.0;
  return fit;
}

void require_fit_grid(const std::vector<double>& gammas) {
  if (gammas.size() < 3)
    throw std::invalid_argument("fit_exponent needs at least 3 gamma values");
  for (double gamma : gammas)
    if (!(gamma > 0.0))
      throw std::invalid_argument("fit_exponent needs gamma > 0");
  for (size_t i = 0; i < gammas.size(); ++i)
    for (size_t j = i + 1; j < gammas.size(); ++j)
      if (gammas[i] == gammas[j])
        throw std::invalid_argument("fit_exponent needs distinct gamma values");
}

}  // namespace

FitResult fit_exponent(const std::vector<double>& gammas,
                       const LimitPolicy& policy) {
  require_fit_grid(gammas);
  std::vector<std::pair<double, double>> data;
  data.reserve(gammas.size());
  for (double gamma : gammas) data.emplace_back(gamma, measure_p(gamma, policy).p);
  return fit_log_through_origin(data);
}

FitResult fit_exponent_synthetic(const std::vector<double>& gammas,
                                 double c_true) {
  require_fit_grid(gammas);
  std::vector<std::pair<double, double>> data;
  data.reserve(gammas.size());
  for (double gamma : gammas)
    data.emplace_back(gamma, std::exp(c_true * gamma));
  return fit_log_through_origin(data);
}

std::vector<SweepRecord> gamma_sweep(const std::vector<double>& gammas,
                                     const LimitPolicy& policy) {
  if (gammas.empty()) throw std::invalid_argument("gamma grid is empty");
  for (double gamma : gammas)
    if (!(gamma >= 0.0))
      throw std::invalid_argument("gamma grid must be non-negative");

  std::vector<SweepRecord> records;
  records.reserve(gammas.size());
  for (double gamma : gammas) {
    try {
      records.push_back(functional_residual(gamma, policy));
    } catch (const std::exception& e) {
      SweepRecord rec;
      rec.gamma = gamma;
      rec.ok = false;
      rec.note = e.what();
      rec.p = rec.p_double_gamma = rec.residual =
          std::numeric_limits<double>::quiet_NaN();
      records.push_back(rec);
    }
  }
  return records;
}

SlopeFit perturbative_slope(const std::vector<double>& gammas,
                            const LimitPolicy& policy) {
  if (gammas.size() < 2)
    throw std::invalid_argument("perturbative_slope needs at least 2 points");
  for (double gamma : gammas)
    if (!(gamma > 0.0))
      throw std::invalid_argument("perturbative_slope needs gamma > 0");

  // Normal equations for (1 - p) = s*gamma + q*gamma^2.
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
  std::vector<std::pair<double, double>> data;
  for (double gamma : gammas) {
    const double y = 1.0 - measure_p(gamma, policy).p;
    data.emplace_back(gamma, y);
    const double g2 = gamma * gamma;
    s11 += g2;
    s12 += g2 * gamma;
    s22 += g2 * g2;
    b1 += gamma * y;
    b2 += g2 * y;
  }
  const double det = s11 * s22 - s12 * s12;
  if (std::abs(det) < 1e-300)
    throw std::invalid_argument("perturbative_slope: degenerate gamma grid");

  SlopeFit fit;
  fit.slope = (b1 * s22 - b2 * s12) / det;
  fit.quadratic = (s11 * b2 - s12 * b1) / det;
  double ss = 0.0;
  for (const auto& [gamma, y] : data) {
    const double r = y - fit.slope * gamma - fit.quadratic * gamma * gamma;
    ss += r * r;
  }
  fit.residual_norm = std::sqrt(ss);
  return fit;
}

}  // namespace lzkit
