#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"

namespace unmix {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class WeightScheme { zero_one };

// p-nearest-neighbor pixel graph: symmetric 0-1 weight matrix with zero
// diagonal plus the derived degree vector.
struct PixelGraph {
  SparseMatrix weights;  // M x M, symmetric, zero diagonal
  Vector degrees;        // degrees[j] == weights.row(j).sum(), exact
  int neighbors_per_node = 0;

  Eigen::Index size() const { return weights.rows(); }
};

// Builds the p-NN graph on the observed spectra: pixel j connects to the p
// pixels with smallest Euclidean distance between spectral columns, ties
// broken by lowest pixel index, symmetrized by union of directed choices.
inline PixelGraph knn_graph(const Matrix& spectra, int p,
                            WeightScheme scheme = WeightScheme::zero_one) {
  (void)scheme;  // only zero_one weighting exists
  const Eigen::Index M = spectra.cols();
  if (p < 1) throw ConfigError("neighbors must be >= 1, got " + std::to_string(p));
  if (p >= M)
    throw ConfigError("neighbors (" + std::to_string(p) + ") must be < pixel count (" +
                      std::to_string(M) + ")");

  // Squared distances via the Gram matrix; ordering is distance-equivalent.
  const Vector sq = spectra.colwise().squaredNorm();
  std::set<std::pair<Eigen::Index, Eigen::Index>> edges;
  std::vector<std::pair<double, Eigen::Index>> cand;
  cand.reserve(static_cast<std::size_t>(M - 1));
  for (Eigen::Index j = 0; j < M; ++j) {
    cand.clear();
    const Vector dots = spectra.transpose() * spectra.col(j);
    for (Eigen::Index l = 0; l < M; ++l) {
      if (l == j) continue;
      const double d2 = std::max(0.0, sq[j] + sq[l] - 2.0 * dots[l]);
      cand.emplace_back(d2, l);
    }
    std::partial_sort(cand.begin(), cand.begin() + p, cand.end());
    for (int k = 0; k < p; ++k) {
      const Eigen::Index l = cand[static_cast<std::size_t>(k)].second;
      edges.insert({std::min(j, l), std::max(j, l)});
    }
  }

  PixelGraph g;
  g.neighbors_per_node = p;
  g.weights.resize(M, M);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * edges.size());
  for (const auto& [a, b] : edges) {
    trip.emplace_back(static_cast<int>(a), static_cast<int>(b), 1.0);
    trip.emplace_back(static_cast<int>(b), static_cast<int>(a), 1.0);
  }
  g.weights.setFromTriplets(trip.begin(), trip.end());
  g.weights.makeCompressed();
  g.degrees = Vector::Zero(M);
  for (int k = 0; k < g.weights.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(g.weights, k); it; ++it)
      g.degrees[it.col()] += it.value();
  return g;
}

inline PixelGraph knn_graph(const HyperspectralScene& scene, int p,
                            WeightScheme scheme = WeightScheme::zero_one) {
  return knn_graph(scene.data, p, scheme);
}

// L = D - W. Row sums are exactly zero under 0-1 weights.
inline SparseMatrix laplacian(const PixelGraph& g) {
  const Eigen::Index M = g.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.weights.nonZeros()) + static_cast<std::size_t>(M));
  for (Eigen::Index j = 0; j < M; ++j)
    if (g.degrees[j] != 0.0) trip.emplace_back(static_cast<int>(j), static_cast<int>(j), g.degrees[j]);
  for (int k = 0; k < g.weights.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(g.weights, k); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value());
  SparseMatrix L(M, M);
  L.setFromTriplets(trip.begin(), trip.end());
  L.makeCompressed();
  return L;
}

// R = 1/2 * sum_{j,l} ||h_j - h_l||^2 W_jl, summed over ordered pairs; equals
// trace(H L H^T). Evaluated directly over the stored nonzeros.
inline double graph_regularizer(const Matrix& H, const PixelGraph& g) {
  if (H.cols() != g.size())
    throw DimensionError("abundance column count " + std::to_string(H.cols()) +
                         " != graph size " + std::to_string(g.size()));
  double r = 0.0;
  for (int k = 0; k < g.weights.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(g.weights, k); it; ++it)
      r += 0.5 * it.value() * (H.col(it.row()) - H.col(it.col())).squaredNorm();
  return r;
}

inline double graph_regularizer(const AbundanceMatrix& H, const PixelGraph& g) {
  return graph_regularizer(H.fractions, g);
}

}  // namespace unmix
