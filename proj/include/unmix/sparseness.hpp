#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"

namespace unmix {

// S-measure shape parameters. sigma2 is always derived from sigma1.
struct SMeasureParams {
  double sigma1 = 2.0;
  double sigma2() const { return (2.0 * sigma1 - 4.0) / 3.0; }
};

namespace detail {

struct SMeasureTerms {
  double k1, k2, k3, k4;  // power sums ||x||_1, ||x||_2^2, ||x||_3^3, ||x||_4^4
  double f_max, f_min, g;
  double numerator, denominator;
};

inline SMeasureTerms s_measure_terms(const Vector& x, const SMeasureParams& p) {
  const Eigen::Index n = x.size();
  if (n < 2) throw ConfigError("s_measure needs a vector of length >= 2");
  if (!(p.sigma1 > 0.0)) throw ConfigError("sigma1 must be > 0");

  SMeasureTerms t{};
  t.k1 = t.k2 = t.k3 = t.k4 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x[i];
    if (v < 0.0 || !std::isfinite(v))
      throw ConfigError("s_measure input must be nonnegative and finite");
    const double v2 = v * v;
    t.k1 += v;
    t.k2 += v2;
    t.k3 += v2 * v;
    t.k4 += v2 * v2;
  }
  if (t.k1 == 0.0)
    throw NumericalError("s_measure is undefined for the all-zero vector (f_max - f_min = 0)");

  const double s1 = p.sigma1;
  const double s2 = p.sigma2();
  const double nd = static_cast<double>(n);
  const double k1_4 = (t.k1 * t.k1) * (t.k1 * t.k1);
  t.g = t.k4 - s1 * t.k1 * t.k1 * t.k2 + s2 * t.k1 * t.k3;
  t.f_max = ((1.0 / (nd * nd * nd)) - (s1 / nd) + (s2 / (nd * nd))) * k1_4;
  t.f_min = (1.0 - s1 + s2) * k1_4;
  t.numerator = t.f_max - t.g;
  t.denominator = t.f_max - t.f_min;
  return t;
}

}  // namespace detail

// Scale-invariant sparseness score: 0 for uniform vectors, 1 for one-hot
// vectors. Values a hair outside [0,1] from cancellation are clamped; larger
// excursions indicate a transcription bug and throw.
inline double s_measure(const Vector& x, const SMeasureParams& p) {
  const auto t = detail::s_measure_terms(x, p);
  const double s = t.numerator / t.denominator;
  if (s < -1e-9 || s > 1.0 + 1e-9)
    throw NumericalError("s_measure internal consistency: value " + std::to_string(s) +
                         " outside [0,1] beyond tolerance");
  return std::min(1.0, std::max(0.0, s));
}

// Analytic gradient of the S-measure on the nonnegative orthant (|x| = x).
inline Vector s_measure_gradient(const Vector& x, const SMeasureParams& p) {
  const auto t = detail::s_measure_terms(x, p);
  const Eigen::Index n = x.size();
  const double s1 = p.sigma1;
  const double s2 = p.sigma2();
  const double nd = static_cast<double>(n);
  const double c_max = (1.0 / (nd * nd * nd)) - (s1 / nd) + (s2 / (nd * nd));
  const double c_min = 1.0 - s1 + s2;
  const double k1_3 = t.k1 * t.k1 * t.k1;
  const double D = t.denominator;
  const double N = t.numerator;

  Vector grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x[i];
    const double dg = 4.0 * v * v * v - s1 * (2.0 * t.k1 * t.k2 + 2.0 * t.k1 * t.k1 * v) +
                      s2 * (t.k3 + 3.0 * t.k1 * v * v);
    const double dmax = 4.0 * c_max * k1_3;
    const double dmin = 4.0 * c_min * k1_3;
    grad[i] = ((dmax - dg) * D - N * (dmax - dmin)) / (D * D);
  }
  return grad;
}

// J(H): mean S-measure over the pixel columns of H. All-zero columns score 0
// so that transiently empty columns inside a solver do not halt the run.
inline double sparseness_cost(const Matrix& H, const SMeasureParams& p) {
  if (H.cols() < 1) throw ConfigError("sparseness_cost needs at least one column");
  double acc = 0.0;
  for (Eigen::Index c = 0; c < H.cols(); ++c) {
    if (H.col(c).sum() == 0.0) continue;
    acc += s_measure(H.col(c), p);
  }
  return acc / static_cast<double>(H.cols());
}

inline double sparseness_cost(const AbundanceMatrix& H, const SMeasureParams& p) {
  return sparseness_cost(H.fractions, p);
}

// Column t of the result is (1/M) * s_measure_gradient(h_t); zero columns get
// a zero gradient.
inline Matrix sparseness_cost_gradient(const Matrix& H, const SMeasureParams& p) {
  if (H.cols() < 1) throw ConfigError("sparseness_cost_gradient needs at least one column");
  Matrix grad = Matrix::Zero(H.rows(), H.cols());
  const double inv_m = 1.0 / static_cast<double>(H.cols());
  for (Eigen::Index c = 0; c < H.cols(); ++c) {
    if (H.col(c).sum() == 0.0) continue;
    grad.col(c) = inv_m * s_measure_gradient(H.col(c), p);
  }
  return grad;
}

inline Matrix sparseness_cost_gradient(const AbundanceMatrix& H, const SMeasureParams& p) {
  return sparseness_cost_gradient(H.fractions, p);
}

}  // namespace unmix
