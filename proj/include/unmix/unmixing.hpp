#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/graph.hpp"
#include "unmix/rng.hpp"
#include "unmix/sparseness.hpp"

namespace unmix {

// One logged iteration of the composite cost
//   total = fit + graph_term - sparse_term
// with fit = 1/2 ||Y - WH||_F^2, graph_term = alpha * R, sparse_term = beta * J(H).
struct Objective {
  double total = 0.0;
  double fit = 0.0;
  double graph_term = 0.0;
  double sparse_term = 0.0;
};

enum class Termination { converged, max_iterations, stalled };

inline std::string termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::stalled: return "stalled";
  }
  return "max_iterations";
}

struct UnmixResult {
  EndmemberMatrix endmembers;
  AbundanceMatrix abundances;
  std::vector<Objective> trace;
  int iterations_run = 0;
  Termination termination = Termination::max_iterations;
  std::uint64_t seed = 0;
  UnmixConfig config;
};

// Composite objective. Graph variants require a graph; other variants report
// zero graph and sparse terms.
inline Objective objective(const Matrix& Y, const Matrix& W, const Matrix& H,
                           const PixelGraph* graph, const UnmixConfig& cfg) {
  if (Y.rows() != W.rows() || W.cols() != H.rows() || H.cols() != Y.cols())
    throw DimensionError("objective: non-conformable Y/W/H");
  if (uses_graph(cfg.variant) && graph == nullptr)
    throw ConfigError("variant " + variant_name(cfg.variant) + " requires a pixel graph");

  Objective o;
  o.fit = 0.5 * (Y - W * H).squaredNorm();
  o.graph_term = uses_graph(cfg.variant) ? cfg.alpha * graph_regularizer(H, *graph) : 0.0;
  o.sparse_term =
      uses_sparseness(cfg.variant) ? cfg.beta * sparseness_cost(H, SMeasureParams{cfg.sigma1}) : 0.0;
  o.total = o.fit + o.graph_term - o.sparse_term;
  return o;
}

// Gradient of the composite objective with respect to H:
//   W^T (WH - Y) + 2 alpha H L - beta dJ/dH.
inline Matrix objective_gradient_h(const Matrix& Y, const Matrix& W, const Matrix& H,
                                   const PixelGraph* graph, const UnmixConfig& cfg) {
  Matrix g = W.transpose() * (W * H - Y);
  if (uses_graph(cfg.variant)) {
    if (graph == nullptr)
      throw ConfigError("variant " + variant_name(cfg.variant) + " requires a pixel graph");
    g += 2.0 * cfg.alpha * (H * laplacian(*graph));
  }
  if (uses_sparseness(cfg.variant))
    g -= cfg.beta * sparseness_cost_gradient(H, SMeasureParams{cfg.sigma1});
  return g;
}

// Strictly positive starting factors, deterministic per seed. uniform_random
// draws both factors i.i.d. on (1e-3, 1]; data_columns picks P distinct
// pixels by seeded farthest-point sampling (random start, then maximin on
// Euclidean distance, ties to the lowest index) and offsets them by +1e-3.
inline std::pair<Matrix, Matrix> init_factors(const Matrix& Y, int P, std::uint64_t seed,
                                              InitStrategy strategy) {
  const Eigen::Index L = Y.rows();
  const Eigen::Index M = Y.cols();
  if (P < 1) throw ConfigError("endmember count must be >= 1");
  if (P > std::min(L, M))
    throw ConfigError("endmember count " + std::to_string(P) + " exceeds min(bands, pixels) = " +
                      std::to_string(std::min(L, M)));

  Rng rng(seed);
  auto draw_open_unit = [&rng]() { return 1.0 - (1.0 - kInitFloor) * rng.uniform(); };

  Matrix W(L, P);
  if (strategy == InitStrategy::uniform_random) {
    for (Eigen::Index c = 0; c < P; ++c)
      for (Eigen::Index r = 0; r < L; ++r) W(r, c) = draw_open_unit();
  } else {
    std::vector<Eigen::Index> chosen;
    chosen.reserve(static_cast<std::size_t>(P));
    chosen.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(M))));
    Vector min_d2 = (Y.colwise() - Y.col(chosen[0])).colwise().squaredNorm().transpose();
    for (int k = 1; k < P; ++k) {
      Eigen::Index best = -1;
      double best_d2 = -1.0;
      for (Eigen::Index j = 0; j < M; ++j) {
        bool taken = false;
        for (Eigen::Index c : chosen) taken = taken || (c == j);
        if (taken) continue;
        if (min_d2[j] > best_d2) {
          best_d2 = min_d2[j];
          best = j;
        }
      }
      chosen.push_back(best);
      min_d2 = min_d2.cwiseMin((Y.colwise() - Y.col(best)).colwise().squaredNorm().transpose());
    }
    for (int k = 0; k < P; ++k) W.col(k) = Y.col(chosen[static_cast<std::size_t>(k)]).array() + kInitFloor;
  }

  Matrix H(P, M);
  for (Eigen::Index c = 0; c < M; ++c)
    for (Eigen::Index r = 0; r < P; ++r) H(r, c) = draw_open_unit();
  return {W, H};
}

namespace detail {

inline void floor_in_place(Matrix& m, double floor = kEntryFloor) {
  m = m.cwiseMax(floor);
}

}  // namespace detail

// One solver iteration. W first by the plain multiplicative fit rule, then H
// by the multiplicative rule with the Laplacian split (2*alpha coefficients so
// the step descends fit + alpha*R exactly as logged), then an optional
// backtracked gradient step on the sparseness term. Every sub-step leaves the
// total objective non-increasing up to 1e-12 per comparison; nonnegativity is
// maintained by the 1e-12 entry floor.
inline std::pair<Matrix, Matrix> update_step(const Matrix& Y, const Matrix& W, const Matrix& H,
                                             const PixelGraph* graph, const UnmixConfig& cfg) {
  if (uses_graph(cfg.variant) && graph == nullptr)
    throw ConfigError("variant " + variant_name(cfg.variant) + " requires a pixel graph");

  // W' = W .* (Y H^T) ./ (W H H^T)
  Matrix Wn = W.array() * (Y * H.transpose()).array() /
              ((W * (H * H.transpose())).array().max(kEntryFloor));
  detail::floor_in_place(Wn);
  if (!Wn.allFinite()) throw NumericalError("non-finite entries in W update");

  // H' = H .* (W'^T Y + 2a H A) ./ (W'^T W' H + 2a H D)
  Matrix num = Wn.transpose() * Y;
  Matrix den = (Wn.transpose() * Wn) * H;
  if (uses_graph(cfg.variant)) {
    const double a2 = 2.0 * cfg.alpha;
    num += a2 * (H * graph->weights);
    den += a2 * (H * graph->degrees.asDiagonal());
  }
  Matrix Hn = H.array() * num.array() / den.array().max(kEntryFloor);
  detail::floor_in_place(Hn);
  if (!Hn.allFinite()) throw NumericalError("non-finite entries in H update");

  if (uses_sparseness(cfg.variant) && cfg.beta > 0.0) {
    // The multiplicative move descends fit + graph but may lower J(H) enough
    // to raise the total; keep the previous H in that case.
    const double before = objective(Y, Wn, H, graph, cfg).total;
    if (objective(Y, Wn, Hn, graph, cfg).total > before + 1e-12) Hn = H;

    // Signed gradient step on the sparseness term, backtracked on the total.
    const double base = objective(Y, Wn, Hn, graph, cfg).total;
    const Matrix grad = sparseness_cost_gradient(Hn, SMeasureParams{cfg.sigma1});
    double eta = 1.0;
    while (eta >= 1e-10) {
      Matrix cand = (Hn + cfg.beta * eta * grad).cwiseMax(kEntryFloor);
      if (cand.allFinite() && objective(Y, Wn, cand, graph, cfg).total <= base + 1e-12) {
        Hn = std::move(cand);
        break;
      }
      eta *= 0.5;
    }
  }
  return {Wn, Hn};
}

namespace detail {

inline Matrix augment_rows(const Matrix& Y, double delta) {
  Matrix out(Y.rows() + 1, Y.cols());
  out.topRows(Y.rows()) = Y;
  out.row(Y.rows()).setConstant(delta);
  return out;
}

}  // namespace detail

// Full solver loop with explicit starting factors (dimensions must match the
// working system, i.e. include the augmented row under delta_augmentation).
inline UnmixResult solve_from(const HyperspectralScene& scene, const UnmixConfig& cfg, Matrix W,
                              Matrix H) {
  validate_config(cfg);
  if (scene.data.rows() < 1 || scene.data.cols() < 1)
    throw DimensionError("empty scene: " + std::to_string(scene.data.rows()) + "x" +
                         std::to_string(scene.data.cols()));
  for (const auto& v : validate_scene(scene))
    throw DimensionError("invalid scene: " + v.message);

  const bool augmented = cfg.sum_to_one == SumToOne::delta_augmentation;
  const Matrix Yw = augmented ? detail::augment_rows(scene.data, cfg.delta) : scene.data;
  if (W.rows() != Yw.rows() || W.cols() != cfg.endmember_count || H.rows() != cfg.endmember_count ||
      H.cols() != Yw.cols())
    throw DimensionError("solve_from: starting factors do not conform");

  PixelGraph graph;
  const PixelGraph* gp = nullptr;
  if (uses_graph(cfg.variant)) {
    graph = knn_graph(scene.data, cfg.neighbors);
    gp = &graph;
  }

  const bool renormalize = cfg.sum_to_one == SumToOne::column_normalize;
  if (renormalize) {
    H = column_normalize(AbundanceMatrix{H}).fractions;
    detail::floor_in_place(H);
  }

  UnmixResult result;
  result.seed = cfg.seed;
  result.config = cfg;
  result.trace.reserve(static_cast<std::size_t>(cfg.max_iterations));

  int tol_streak = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Matrix W_prev = W;
    Matrix H_prev = H;
    try {
      std::tie(W, H) = update_step(Yw, W, H, gp, cfg);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(it), it);
    }
    if (renormalize) {
      H = column_normalize(AbundanceMatrix{H}).fractions;
      detail::floor_in_place(H);
    }

    const Objective obj = objective(Yw, W, H, gp, cfg);
    if (!std::isfinite(obj.total))
      throw NumericalError("non-finite objective at iteration " + std::to_string(it), it);
    // The update contract guarantees non-increase; per-iteration column
    // renormalization is a projection outside that contract.
    if (!result.trace.empty() && !renormalize && obj.total > result.trace.back().total + 1e-9)
      throw NumericalError("monotone descent violated at iteration " + std::to_string(it), it);
    result.trace.push_back(obj);

    if ((W.array() == W_prev.array()).all() && (H.array() == H_prev.array()).all()) {
      result.termination = Termination::stalled;
      break;
    }
    if (result.trace.size() >= 2) {
      const double prev = result.trace[result.trace.size() - 2].total;
      const double rel = std::abs(obj.total - prev) / std::max(prev, 1e-30);
      tol_streak = rel < cfg.objective_tolerance ? tol_streak + 1 : 0;
      if (tol_streak >= 3) {
        result.termination = Termination::converged;
        break;
      }
    }
  }
  result.iterations_run = static_cast<int>(result.trace.size());

  Matrix W_out = augmented ? Matrix(W.topRows(W.rows() - 1)) : W;
  result.endmembers.signatures = std::move(W_out);
  if (cfg.sum_to_one != SumToOne::off) {
    result.abundances = column_normalize(AbundanceMatrix{H});
  } else {
    result.abundances.fractions = std::move(H);
    result.abundances.normalized = false;
  }
  return result;
}

// End-to-end solve: seeded initialization, optional graph construction,
// iteration until the relative objective change stays below tolerance for 3
// consecutive iterations or max_iterations is reached.
//
// Before the loop the abundance start is conditioned on W0 by a clamped
// least-squares projection. Multiplicative steps adapt H too slowly from a
// random draw, so without this the first W update drags good starting
// signatures toward the data mean and recovery degrades badly.
inline UnmixResult solve(const HyperspectralScene& scene, const UnmixConfig& cfg) {
  validate_config(cfg);
  if (scene.data.rows() < 1 || scene.data.cols() < 1)
    throw DimensionError("empty scene: " + std::to_string(scene.data.rows()) + "x" +
                         std::to_string(scene.data.cols()));
  const bool augmented = cfg.sum_to_one == SumToOne::delta_augmentation;
  const Matrix Yw = augmented ? detail::augment_rows(scene.data, cfg.delta) : scene.data;
  Matrix W0 = init_factors(Yw, cfg.endmember_count, cfg.seed, cfg.init).first;
  Matrix G = W0.transpose() * W0;
  G.diagonal().array() += 1e-12 * G.trace();
  Matrix H0 = G.ldlt().solve(W0.transpose() * Yw).cwiseMax(kEntryFloor);
  return solve_from(scene, cfg, std::move(W0), std::move(H0));
}

}  // namespace unmix
