#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/unmixing.hpp"

namespace unmix {

namespace detail {

inline double vector_angle(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size())
    throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  const double na2 = a.squaredNorm();
  const double nb2 = b.squaredNorm();
  if (na2 == 0.0 || nb2 == 0.0)
    throw NumericalError(std::string(what) + " is undefined for a zero vector");
  // Single square root keeps the cosine of identical vectors at exactly 1.
  const double c = a.dot(b) / std::sqrt(na2 * nb2);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace detail

// Spectral angle distance between two signatures, radians in [0, pi].
inline double sad(const Vector& m, const Vector& m_hat) {
  return detail::vector_angle(m, m_hat, "sad");
}

// Abundance angle distance between two per-pixel abundance vectors.
inline double aad(const Vector& a, const Vector& a_hat) {
  return detail::vector_angle(a, a_hat, "aad");
}

// Minimum-total-SAD bijection between estimated and true endmembers, solved
// exactly by assignment DP over subsets (factorizations are permutation
// ambiguous, so every report aligns indices first). matching[i] is the true
// index assigned to estimated endmember i.
inline std::vector<int> match_endmembers(const EndmemberMatrix& s_true,
                                         const EndmemberMatrix& s_est) {
  const Eigen::Index P = s_true.endmember_count();
  if (s_est.endmember_count() != P)
    throw DimensionError("match_endmembers: endmember counts differ, " + std::to_string(P) +
                         " vs " + std::to_string(s_est.endmember_count()));
  if (s_est.band_count() != s_true.band_count())
    throw DimensionError("match_endmembers: band counts differ");
  if (P > 20) throw ConfigError("match_endmembers supports at most 20 endmembers");

  Matrix cost(P, P);
  for (Eigen::Index i = 0; i < P; ++i)
    for (Eigen::Index j = 0; j < P; ++j)
      cost(i, j) = sad(s_est.signatures.col(i), s_true.signatures.col(j));

  // dp[mask]: minimal cost of assigning estimated 0..popcount(mask)-1 to the
  // true-index subset `mask`.
  const std::size_t full = (std::size_t{1} << P) - 1;
  std::vector<double> dp(full + 1, std::numeric_limits<double>::infinity());
  std::vector<int> choice(full + 1, -1);
  dp[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(dp[mask])) continue;
    const int i = __builtin_popcountll(mask);
    for (int j = 0; j < P; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = mask | (std::size_t{1} << j);
      const double c = dp[mask] + cost(i, j);
      if (c < dp[next]) {
        dp[next] = c;
        choice[next] = j;
      }
    }
  }
  std::vector<int> matching(static_cast<std::size_t>(P), -1);
  std::size_t mask = full;
  for (int i = static_cast<int>(P) - 1; i >= 0; --i) {
    const int j = choice[mask];
    matching[static_cast<std::size_t>(i)] = j;
    mask &= ~(std::size_t{1} << j);
  }
  return matching;
}

// Angles are held in radians; rendering converts when degrees is set.
struct EvaluationReport {
  Vector per_endmember_sad;  // length P, indexed by true endmember
  Vector per_pixel_aad;      // length M; NaN where the true column is all-zero
  double rms_sad = 0.0;
  double rms_aad = 0.0;
  std::vector<int> matching;  // estimated index -> true index
  bool degrees = true;
  int excluded_pixels = 0;  // pixels skipped because the true abundance is all-zero
};

inline double to_degrees(double radians) { return radians * 180.0 / M_PI; }

// Aligns the estimate to ground truth, then computes per-endmember SAD,
// per-pixel AAD, and their RMS aggregates.
inline EvaluationReport evaluate(const EndmemberMatrix& s_true, const AbundanceMatrix& a_true,
                                 const EndmemberMatrix& s_est, const AbundanceMatrix& a_est) {
  const Eigen::Index P = s_true.endmember_count();
  const Eigen::Index M = a_true.pixel_count();
  if (a_true.endmember_count() != P)
    throw DimensionError("evaluate: true abundances have " +
                         std::to_string(a_true.endmember_count()) + " rows, expected " +
                         std::to_string(P));
  if (a_est.endmember_count() != s_est.endmember_count())
    throw DimensionError("evaluate: estimated factors disagree on endmember count");
  if (a_est.pixel_count() != M)
    throw DimensionError("evaluate: pixel counts differ, " + std::to_string(M) + " vs " +
                         std::to_string(a_est.pixel_count()));
  for (Eigen::Index t = 0; t < M; ++t) {
    const double s = a_true.fractions.col(t).sum();
    if (s != 0.0 && std::abs(s - 1.0) > kSumToOneEps)
      throw ConfigError("evaluate: true abundance column " + std::to_string(t) +
                        " sums to " + std::to_string(s) + "; normalize the ground truth first");
  }

  EvaluationReport rep;
  rep.matching = match_endmembers(s_true, s_est);

  // Reorder the estimate into true-index order.
  Matrix W(s_est.band_count(), P);
  Matrix H(P, M);
  for (Eigen::Index i = 0; i < P; ++i) {
    const int j = rep.matching[static_cast<std::size_t>(i)];
    W.col(j) = s_est.signatures.col(i);
    H.row(j) = a_est.fractions.row(i);
  }

  rep.per_endmember_sad.resize(P);
  for (Eigen::Index j = 0; j < P; ++j) {
    try {
      rep.per_endmember_sad[j] = sad(s_true.signatures.col(j), W.col(j));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (endmember " + std::to_string(j) + ")");
    }
  }

  rep.per_pixel_aad.resize(M);
  double aad_sq = 0.0;
  Eigen::Index included = 0;
  for (Eigen::Index t = 0; t < M; ++t) {
    if (a_true.fractions.col(t).sum() == 0.0) {
      rep.per_pixel_aad[t] = std::numeric_limits<double>::quiet_NaN();
      ++rep.excluded_pixels;
      continue;
    }
    double v;
    try {
      v = aad(a_true.fractions.col(t), H.col(t));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (pixel " + std::to_string(t) + ")");
    }
    rep.per_pixel_aad[t] = v;
    aad_sq += v * v;
    ++included;
  }

  rep.rms_sad = std::sqrt(rep.per_endmember_sad.squaredNorm() / static_cast<double>(P));
  rep.rms_aad = included > 0 ? std::sqrt(aad_sq / static_cast<double>(included)) : 0.0;
  return rep;
}

inline EvaluationReport evaluate(const EndmemberMatrix& s_true, const AbundanceMatrix& a_true,
                                 const UnmixResult& result) {
  return evaluate(s_true, a_true, result.endmembers, result.abundances);
}

}  // namespace unmix
