#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "unmix/errors.hpp"

namespace unmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Column-sum tolerance for normalized abundance matrices.
inline constexpr double kSumToOneEps = 1e-6;
// Entry floor maintained by the solvers; keeps multiplicative ratios defined.
inline constexpr double kEntryFloor = 1e-12;
// Strict-positivity floor used by factor initialization.
inline constexpr double kInitFloor = 1e-3;

// Observed data Y, bands x pixels. One orientation everywhere: Y = W * H with
// Y (L x M), W (L x P), H (P x M).
struct HyperspectralScene {
  Matrix data;  // L x M, nonnegative
  std::optional<std::pair<int, int>> spatial_shape;  // (rows, cols), rows*cols == M
  std::optional<std::vector<double>> wavelengths;    // length L, micrometers

  Eigen::Index band_count() const { return data.rows(); }
  Eigen::Index pixel_count() const { return data.cols(); }
};

// Per-endmember spectral signatures, bands x endmembers.
struct EndmemberMatrix {
  Matrix signatures;  // L x P, nonnegative, no all-zero column
  std::optional<std::vector<std::string>> names;

  Eigen::Index band_count() const { return signatures.rows(); }
  Eigen::Index endmember_count() const { return signatures.cols(); }
};

// Per-pixel abundance fractions, endmembers x pixels.
struct AbundanceMatrix {
  Matrix fractions;  // P x M, nonnegative
  bool normalized = false;  // set when every column sums to 1 within kSumToOneEps

  Eigen::Index endmember_count() const { return fractions.rows(); }
  Eigen::Index pixel_count() const { return fractions.cols(); }
};

enum class Variant { nmf, gnmf, nmf_smc, gnmf_smc };
enum class SumToOne { off, column_normalize, delta_augmentation };
enum class InitStrategy { uniform_random, data_columns };

inline bool uses_graph(Variant v) { return v == Variant::gnmf || v == Variant::gnmf_smc; }
inline bool uses_sparseness(Variant v) { return v == Variant::nmf_smc || v == Variant::gnmf_smc; }

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::nmf: return "nmf";
    case Variant::gnmf: return "gnmf";
    case Variant::nmf_smc: return "nmf-smc";
    case Variant::gnmf_smc: return "gnmf-smc";
  }
  return "nmf";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "nmf") return Variant::nmf;
  if (s == "gnmf") return Variant::gnmf;
  if (s == "nmf-smc" || s == "nmf_smc") return Variant::nmf_smc;
  if (s == "gnmf-smc" || s == "gnmf_smc") return Variant::gnmf_smc;
  throw ConfigError("unknown variant '" + s + "' (expected nmf|gnmf|nmf-smc|gnmf-smc)");
}

inline std::string sum_to_one_name(SumToOne s) {
  switch (s) {
    case SumToOne::off: return "off";
    case SumToOne::column_normalize: return "column_normalize";
    case SumToOne::delta_augmentation: return "delta_augmentation";
  }
  return "off";
}

inline SumToOne parse_sum_to_one(const std::string& s) {
  if (s == "off") return SumToOne::off;
  if (s == "column_normalize") return SumToOne::column_normalize;
  if (s == "delta_augmentation") return SumToOne::delta_augmentation;
  throw ConfigError("unknown sum_to_one policy '" + s +
                    "' (expected off|column_normalize|delta_augmentation)");
}

inline std::string init_strategy_name(InitStrategy s) {
  return s == InitStrategy::uniform_random ? "uniform_random" : "data_columns";
}

inline InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "uniform_random") return InitStrategy::uniform_random;
  if (s == "data_columns") return InitStrategy::data_columns;
  throw ConfigError("unknown init strategy '" + s + "' (expected uniform_random|data_columns)");
}

// Solver configuration. alpha/beta are ignored by variants that do not use
// the corresponding term; delta applies only to delta_augmentation.
struct UnmixConfig {
  int endmember_count = 4;
  Variant variant = Variant::gnmf_smc;
  double alpha = 0.1;   // graph regularization weight
  double beta = 0.1;    // sparseness weight
  double sigma1 = 2.0;  // S-measure shape parameter (> 0)
  int neighbors = 5;    // p, nearest-neighbor count for the pixel graph
  int max_iterations = 500;
  double objective_tolerance = 1e-6;
  std::uint64_t seed = 1;
  SumToOne sum_to_one = SumToOne::column_normalize;
  double delta = 10.0;  // augmentation weight for delta_augmentation
  InitStrategy init = InitStrategy::data_columns;
};

inline void validate_config(const UnmixConfig& c) {
  if (c.endmember_count < 1) throw ConfigError("endmember_count must be >= 1");
  if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) throw ConfigError("alpha must be finite and >= 0");
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) throw ConfigError("beta must be finite and >= 0");
  if (!(c.sigma1 > 0.0) || !std::isfinite(c.sigma1)) throw ConfigError("sigma1 must be finite and > 0");
  if (c.neighbors < 1) throw ConfigError("neighbors must be >= 1");
  if (c.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(c.objective_tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (!(c.delta > 0.0)) throw ConfigError("delta must be > 0");
  if (uses_sparseness(c.variant) && c.endmember_count < 2)
    throw ConfigError("sparseness variants need endmember_count >= 2");
}

// One invariant violation. Violations are data, not errors: validators return
// every one they find and never throw.
struct Violation {
  std::string message;
};

inline std::vector<Violation> validate_scene(const HyperspectralScene& scene) {
  std::vector<Violation> out;
  const auto L = scene.data.rows();
  const auto M = scene.data.cols();
  if (L < 1) out.push_back({"band count must be >= 1, got " + std::to_string(L)});
  if (M < 1) out.push_back({"pixel count must be >= 1, got " + std::to_string(M)});
  // Report the first offending entry of each kind, row-major scan order.
  bool neg_found = false, nonfinite_found = false;
  for (Eigen::Index r = 0; r < L && !(neg_found && nonfinite_found); ++r) {
    for (Eigen::Index c = 0; c < M; ++c) {
      const double v = scene.data(r, c);
      if (!nonfinite_found && !std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite entry " << v << " at row " << r << ", col " << c;
        out.push_back({os.str()});
        nonfinite_found = true;
      } else if (!neg_found && v < 0.0) {
        std::ostringstream os;
        os << "negative entry " << v << " at row " << r << ", col " << c;
        out.push_back({os.str()});
        neg_found = true;
      }
      if (neg_found && nonfinite_found) break;
    }
  }
  if (scene.spatial_shape) {
    const auto [rows, cols] = *scene.spatial_shape;
    if (static_cast<long long>(rows) * cols != static_cast<long long>(M)) {
      std::ostringstream os;
      os << "spatial_shape " << rows << "x" << cols << ": rows*cols != pixel count " << M;
      out.push_back({os.str()});
    }
  }
  if (scene.wavelengths && static_cast<Eigen::Index>(scene.wavelengths->size()) != L) {
    out.push_back({"wavelength list length " + std::to_string(scene.wavelengths->size()) +
                   " != band count " + std::to_string(L)});
  }
  return out;
}

inline std::vector<Violation> validate_endmembers(const EndmemberMatrix& em) {
  std::vector<Violation> out;
  const auto& S = em.signatures;
  if (S.rows() < 1 || S.cols() < 1) out.push_back({"signature matrix must be non-empty"});
  for (Eigen::Index c = 0; c < S.cols(); ++c) {
    bool all_zero = true;
    for (Eigen::Index r = 0; r < S.rows(); ++r) {
      const double v = S(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << "invalid entry " << v << " at row " << r << ", col " << c;
        out.push_back({os.str()});
        return out;
      }
      if (v != 0.0) all_zero = false;
    }
    if (all_zero) out.push_back({"all-zero signature column " + std::to_string(c)});
  }
  if (em.names && static_cast<Eigen::Index>(em.names->size()) != S.cols())
    out.push_back({"name list length != endmember count"});
  return out;
}

// Rescales every column to unit sum. All-zero columns map to the uniform
// vector 1/P so a solver loop never halts on a transiently empty pixel.
inline AbundanceMatrix column_normalize(const AbundanceMatrix& in) {
  AbundanceMatrix out;
  const auto P = in.fractions.rows();
  out.fractions.resize(P, in.fractions.cols());
  for (Eigen::Index c = 0; c < in.fractions.cols(); ++c) {
    const double s = in.fractions.col(c).sum();
    if (s > 0.0) {
      out.fractions.col(c) = in.fractions.col(c) / s;
    } else {
      out.fractions.col(c).setConstant(1.0 / static_cast<double>(P));
    }
  }
  out.normalized = true;
  return out;
}

}  // namespace unmix
