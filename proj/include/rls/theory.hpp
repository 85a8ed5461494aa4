#ifndef RLS_THEORY_HPP
#define RLS_THEORY_HPP

// Marchenko-Pastur law and Monte-Carlo checks of the least-squares noise
// amplification E||X^+ w|| ~ sqrt(N / (D - N)) for Gaussian X in R^{N x D}.
//
// Scaling: for X with unit-variance entries the squared singular values over D
// follow Marchenko-Pastur with ratio N/D, so
//   (1/N) sum_i 1/s_i^2  ~  (1/D) * integral f(x)/x dx  =  1/(D - N).

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include "rls/instance.hpp"
#include "rls/linalg.hpp"
#include "rls/rng.hpp"

namespace rls {

struct MpParams {
  double lambda = 0.5;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;

  explicit MpParams(double ratio) : lambda(ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("Marchenko-Pastur ratio must lie in (0,1)");
    const double r = std::sqrt(ratio);
    lambda_minus = (1.0 - r) * (1.0 - r);
    lambda_plus = (1.0 + r) * (1.0 + r);
  }
};

inline double mp_density(const MpParams& p, double x) {
  if (!(x > p.lambda_minus && x < p.lambda_plus)) return 0.0;
  const double under = (p.lambda_plus - x) * (x - p.lambda_minus);
  return std::sqrt(std::max(under, 0.0)) / (2.0 * std::numbers::pi * p.lambda * x);
}

/// Closed form of the integral of f(x)/x over the support: 1/(1 - lambda).
inline double mp_inverse_moment(const MpParams& p) {
  if (!(p.lambda < 1.0)) throw std::invalid_argument("inverse moment diverges for lambda >= 1");
  return 1.0 / (1.0 - p.lambda);
}

/// Adaptive Gauss-Kronrod (61-point) integral of f(x) * x^power over [lambda-, lambda+].
inline double mp_quadrature(const MpParams& p, int power) {
  auto integrand = [&](double x) { return mp_density(p, x) * std::pow(x, power); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, p.lambda_minus, p.lambda_plus,
                                                                        20, 1e-13, &err);
}

inline double mp_normalization_quadrature(const MpParams& p) { return mp_quadrature(p, 0); }
inline double mp_inverse_moment_quadrature(const MpParams& p) { return mp_quadrature(p, -1); }

/// Asymptotic E||X^+ w|| for N x D Gaussian X and standard normal w.
inline double predicted_error_norm(Index n, Index d) {
  if (n < 0 || n >= d) throw std::invalid_argument("predicted error norm needs 0 <= N < D");
  return std::sqrt(static_cast<double>(n) / static_cast<double>(d - n));
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

namespace detail {

inline Vector standard_normal_vector(Index n, Stream& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline MonteCarloEstimate summarize(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

inline void require_wide(Index n, Index d) {
  if (n < 1 || n >= d) throw std::invalid_argument("need 0 < N < D");
}

}  // namespace detail

/// ||X^+ (X theta + w) - X^+ X theta||. Equals ||X^+ w|| by linearity; kept as
/// the explicit construction so that identity can be tested.
inline double error_norm_explicit(const Matrix& x, const Vector& theta, const Vector& omega) {
  const Matrix pinv = pseudo_inverse(x);
  const Vector y = x * theta + omega;
  return (pinv * y - pinv * (x * theta)).norm();
}

/// Monte-Carlo mean and standard error of ||X^+ w|| over `trials` draws of
/// Gaussian X (n x d) and w ~ N(0, I_n).
inline MonteCarloEstimate empirical_error_norm(Index n, Index d, Index trials, Stream& rng) {
  detail::require_wide(n, d);
  if (trials < 2) throw std::invalid_argument("need at least two trials");
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(trials));
  for (Index t = 0; t < trials; ++t) {
    const Matrix x = gen_gaussian_design(n, d, rng).entries;
    const Vector omega = detail::standard_normal_vector(n, rng);
    norms.push_back(min_norm_least_squares(x, omega).theta_hat.norm());
  }
  return detail::summarize(norms);
}

/// (1/n) sum 1/s_i^2 for one matrix; singular values at or below the rank
/// cutoff are skipped and counted in `skipped`.
inline double inverse_singular_mean(const Matrix& x, long* skipped = nullptr) {
  Eigen::BDCSVD<Matrix> svd(x);
  const Vector& s = svd.singularValues();
  const double cut = detail::sv_cutoff(x.rows(), x.cols(), s.size() ? s(0) : 0.0, 1.0);
  double acc = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) acc += 1.0 / (s(i) * s(i));
    else if (skipped) ++*skipped;
  }
  return acc / static_cast<double>(x.rows());
}

struct InverseSingularEstimate {
  double mean = 0.0;
  long skipped = 0;
};

inline InverseSingularEstimate empirical_inverse_singular_mean(Index n, Index d, Index trials, Stream& rng) {
  detail::require_wide(n, d);
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  InverseSingularEstimate out;
  for (Index t = 0; t < trials; ++t) out.mean += inverse_singular_mean(gen_gaussian_design(n, d, rng).entries, &out.skipped);
  out.mean /= static_cast<double>(trials);
  return out;
}

/// Both sides of Jensen's inequality for ||S^+ w|| at a fixed matrix:
/// (sample mean of the norm)^2 against the sample mean of the squared norm.
struct JensenCheck {
  double mean_norm_squared = 0.0;
  double mean_squared_norm = 0.0;
  double squared_norm_std_error = 0.0;
};

inline JensenCheck jensen_check(const Matrix& x, Index samples, Stream& rng) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  const Matrix pinv = pseudo_inverse(x);
  std::vector<double> norms, sq;
  for (Index s = 0; s < samples; ++s) {
    const double v = (pinv * detail::standard_normal_vector(x.rows(), rng)).norm();
    norms.push_back(v);
    sq.push_back(v * v);
  }
  const auto a = detail::summarize(norms);
  const auto b = detail::summarize(sq);
  return {a.mean * a.mean, b.mean, b.std_error};
}

}  // namespace rls

#endif
