#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/metrics.hpp"
#include "unmix/rng.hpp"

namespace unmix {

inline constexpr int kBackgroundLabel = -1;

// Class-label grid; kBackgroundLabel marks unlabeled pixels.
struct GroundTruthMap {
  Eigen::MatrixXi labels;  // rows x cols
  int class_count = 0;
  std::optional<std::vector<std::string>> class_names;

  int rows() const { return static_cast<int>(labels.rows()); }
  int cols() const { return static_cast<int>(labels.cols()); }
};

enum class MapStyle { blocks, voronoi };

inline std::string map_style_name(MapStyle s) {
  return s == MapStyle::blocks ? "blocks" : "voronoi";
}

inline MapStyle parse_map_style(const std::string& s) {
  if (s == "blocks") return MapStyle::blocks;
  if (s == "voronoi") return MapStyle::voronoi;
  throw ConfigError("unknown map style '" + s + "' (expected blocks|voronoi)");
}

// Synthetic label map. blocks tiles near-square rectangular regions in
// row-major class order; voronoi labels each cell by its nearest of K seeded
// sites (ties to the lowest site index). Every class in 0..K-1 appears.
inline GroundTruthMap generate_label_map(int rows, int cols, int K, std::uint64_t seed,
                                         MapStyle style) {
  if (rows < 1 || cols < 1) throw ConfigError("label map needs rows, cols >= 1");
  if (K < 1) throw ConfigError("label map needs K >= 1");
  if (static_cast<long long>(rows) * cols < K)
    throw ConfigError("K = " + std::to_string(K) + " exceeds cell count " +
                      std::to_string(static_cast<long long>(rows) * cols));

  GroundTruthMap map;
  map.class_count = K;
  map.labels.resize(rows, cols);

  if (style == MapStyle::blocks) {
    int gr = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(K)))));
    gr = std::min(gr, rows);
    int gc = (K + gr - 1) / gr;
    if (gc > cols) {
      gc = cols;
      gr = (K + gc - 1) / gc;
    }
    for (int r = 0; r < rows; ++r) {
      const int tr = static_cast<int>((static_cast<long long>(r) * gr) / rows);
      for (int c = 0; c < cols; ++c) {
        const int tc = static_cast<int>((static_cast<long long>(c) * gc) / cols);
        map.labels(r, c) = (tr * gc + tc) % K;
      }
    }
  } else {
    Rng rng(seed);
    const std::vector<int> cells = rng.sample_without_replacement(rows * cols, K);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        int best = 0;
        long long best_d = std::numeric_limits<long long>::max();
        for (int k = 0; k < K; ++k) {
          const long long dr = r - cells[static_cast<std::size_t>(k)] / cols;
          const long long dc = c - cells[static_cast<std::size_t>(k)] % cols;
          const long long d = dr * dr + dc * dc;
          if (d < best_d) {
            best_d = d;
            best = k;
          }
        }
        map.labels(r, c) = best;
      }
    }
  }
  return map;
}

// Named spectra sharing one band grid.
struct SpectralLibrary {
  std::vector<std::string> names;  // length K
  Matrix spectra;                  // L x K, nonnegative
  std::vector<double> wavelengths;  // length L, micrometers

  Eigen::Index band_count() const { return spectra.rows(); }
  Eigen::Index entry_count() const { return spectra.cols(); }
};

// K smooth positive spectra, each a baseline plus 2-4 Gaussian bumps over the
// band index, redrawn (bounded retries) until all pairwise SADs reach 0.1 rad.
inline SpectralLibrary synthesize_library(int K, int L, std::uint64_t seed) {
  if (K < 1 || L < 1) throw ConfigError("synthesize_library needs K, L >= 1");

  Rng rng(seed);
  SpectralLibrary lib;
  lib.wavelengths.resize(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i)
    lib.wavelengths[static_cast<std::size_t>(i)] =
        L == 1 ? 0.4 : 0.4 + (2.5 - 0.4) * static_cast<double>(i) / (L - 1);

  const int max_retries = 100;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    lib.spectra.resize(L, K);
    for (int k = 0; k < K; ++k) {
      Vector s = Vector::Constant(L, rng.uniform(0.05, 0.15));
      const int bumps = 2 + static_cast<int>(rng.below(3));
      for (int b = 0; b < bumps; ++b) {
        const double amp = rng.uniform(0.3, 1.0);
        const double center = rng.uniform(0.0, static_cast<double>(L - 1));
        const double width = std::max(1.5, rng.uniform(L / 25.0, L / 8.0));
        for (int i = 0; i < L; ++i) {
          const double z = (i - center) / width;
          s[i] += amp * std::exp(-0.5 * z * z);
        }
      }
      lib.spectra.col(k) = s;
    }
    bool separated = true;
    for (int a = 0; a < K && separated; ++a)
      for (int b = a + 1; b < K && separated; ++b)
        separated = sad(lib.spectra.col(a), lib.spectra.col(b)) >= 0.1;
    if (separated) {
      lib.names.clear();
      for (int k = 0; k < K; ++k) lib.names.push_back("material_" + std::to_string(k));
      return lib;
    }
  }
  throw NumericalError("could not synthesize " + std::to_string(K) +
                       " spectra with pairwise SAD >= 0.1 rad in " +
                       std::to_string(max_retries) + " attempts");
}

// Replaces each labeled pixel by its class spectrum, verbatim. Background
// pixels become zero columns; downsample excludes them from block averages.
inline HyperspectralScene rasterize(const GroundTruthMap& map, const SpectralLibrary& lib) {
  const int rows = map.rows();
  const int cols = map.cols();
  HyperspectralScene scene;
  scene.data = Matrix::Zero(lib.band_count(), static_cast<Eigen::Index>(rows) * cols);
  scene.spatial_shape = {{rows, cols}};
  scene.wavelengths = lib.wavelengths;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int label = map.labels(r, c);
      if (label == kBackgroundLabel) continue;
      if (label < 0 || label >= lib.entry_count())
        throw ConfigError("label " + std::to_string(label) + " at (" + std::to_string(r) + "," +
                          std::to_string(c) + ") has no library spectrum");
      scene.data.col(static_cast<Eigen::Index>(r) * cols + c) = lib.spectra.col(label);
    }
  }
  return scene;
}

struct DownsampleResult {
  HyperspectralScene scene;        // block means, bands x kept blocks
  AbundanceMatrix abundances;      // used classes x kept blocks, columns sum to 1
  std::vector<int> class_ids;      // abundance row -> original class label
  int dropped_blocks = 0;          // fully-background blocks removed
};

// Block-mean downsampling by `factor` with per-class pixel fractions as the
// ground-truth abundances. Ragged edge blocks average over their actual
// membership; background pixels are excluded from both the mean and the
// fraction denominator, and fully-background blocks are dropped.
inline DownsampleResult downsample(const HyperspectralScene& high, const GroundTruthMap& map,
                                   int factor) {
  if (factor < 1) throw ConfigError("downsample factor must be >= 1");
  const int rows = map.rows();
  const int cols = map.cols();
  if (high.data.cols() != static_cast<Eigen::Index>(rows) * cols)
    throw DimensionError("downsample: scene has " + std::to_string(high.data.cols()) +
                         " pixels, map has " + std::to_string(rows * cols) + " cells");

  std::vector<int> class_ids;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int label = map.labels(r, c);
      if (label != kBackgroundLabel &&
          std::find(class_ids.begin(), class_ids.end(), label) == class_ids.end())
        class_ids.push_back(label);
    }
  std::sort(class_ids.begin(), class_ids.end());
  if (class_ids.empty()) throw ConfigError("downsample: map contains no labeled pixels");
  if (class_ids.front() < 0)
    throw ConfigError("downsample: negative class label " + std::to_string(class_ids.front()));
  std::vector<int> row_of_class(static_cast<std::size_t>(class_ids.back()) + 1, -1);
  for (std::size_t i = 0; i < class_ids.size(); ++i)
    row_of_class[static_cast<std::size_t>(class_ids[i])] = static_cast<int>(i);

  const int brows = (rows + factor - 1) / factor;
  const int bcols = (cols + factor - 1) / factor;
  const Eigen::Index P = static_cast<Eigen::Index>(class_ids.size());
  const Eigen::Index L = high.data.rows();

  DownsampleResult out;
  out.class_ids = class_ids;
  out.scene.data.resize(L, static_cast<Eigen::Index>(brows) * bcols);
  out.abundances.fractions.resize(P, static_cast<Eigen::Index>(brows) * bcols);

  Eigen::Index kept = 0;
  for (int br = 0; br < brows; ++br) {
    for (int bc = 0; bc < bcols; ++bc) {
      Vector mean = Vector::Zero(L);
      std::vector<int> counts(static_cast<std::size_t>(P), 0);
      int members = 0;
      for (int r = br * factor; r < std::min((br + 1) * factor, rows); ++r) {
        for (int c = bc * factor; c < std::min((bc + 1) * factor, cols); ++c) {
          const int label = map.labels(r, c);
          if (label == kBackgroundLabel) continue;
          mean += high.data.col(static_cast<Eigen::Index>(r) * cols + c);
          ++counts[static_cast<std::size_t>(row_of_class[static_cast<std::size_t>(label)])];
          ++members;
        }
      }
      if (members == 0) {
        ++out.dropped_blocks;
        continue;
      }
      out.scene.data.col(kept) = mean / static_cast<double>(members);

      // Fractions count_k / members; the largest one is re-derived from the
      // residual and nudged so the stored column sums to exactly 1.0.
      Eigen::Index res = 0;
      for (Eigen::Index k = 0; k < P; ++k) {
        out.abundances.fractions(k, kept) =
            static_cast<double>(counts[static_cast<std::size_t>(k)]) / members;
        if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(res)]) res = k;
      }
      for (int fix = 0; fix < 32; ++fix) {
        const double s = out.abundances.fractions.col(kept).sum();
        if (s == 1.0) break;
        out.abundances.fractions(res, kept) += 1.0 - s;
      }
      ++kept;
    }
  }
  out.scene.data.conservativeResize(L, kept);
  out.abundances.fractions.conservativeResize(P, kept);
  out.abundances.normalized = true;
  if (out.dropped_blocks == 0) out.scene.spatial_shape = {{brows, bcols}};
  if (high.wavelengths) out.scene.wavelengths = high.wavelengths;
  return out;
}

// Additive i.i.d. zero-mean Gaussian noise at the target SNR, clamped at 0 to
// keep the scene nonnegative. An infinite snr_db returns the scene unchanged.
inline HyperspectralScene add_noise(const HyperspectralScene& scene, double snr_db,
                                    std::uint64_t seed, double* clamp_rate = nullptr) {
  if (std::isinf(snr_db) && snr_db > 0) {
    if (clamp_rate) *clamp_rate = 0.0;
    return scene;
  }
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite or +inf");

  const Eigen::Index L = scene.data.rows();
  const Eigen::Index M = scene.data.cols();
  const double p_signal = scene.data.squaredNorm() / static_cast<double>(L * M);
  const double sigma = std::sqrt(p_signal * std::pow(10.0, -snr_db / 10.0));

  Rng rng(seed);
  HyperspectralScene out = scene;
  long clamped = 0;
  for (Eigen::Index c = 0; c < M; ++c) {
    for (Eigen::Index r = 0; r < L; ++r) {
      const double v = scene.data(r, c) + sigma * rng.normal();
      if (v < 0.0) {
        out.data(r, c) = 0.0;
        ++clamped;
      } else {
        out.data(r, c) = v;
      }
    }
  }
  if (clamp_rate) *clamp_rate = static_cast<double>(clamped) / static_cast<double>(L * M);
  return out;
}

// Full simulation recipe: where map/library are absent they are generated
// from sub-seeds derived from `seed`.
struct SimConfig {
  int rows = 145;
  int cols = 145;
  int classes = 4;
  int bands = 200;
  MapStyle style = MapStyle::voronoi;
  int factor = 5;
  double snr_db = 30.0;
  std::uint64_t seed = 1;
  std::optional<GroundTruthMap> map;       // overrides rows/cols/classes/style
  std::optional<SpectralLibrary> library;  // overrides bands
};

struct SimulatedScene {
  HyperspectralScene scene;        // noisy, downsampled observation
  EndmemberMatrix true_endmembers;  // library spectra of the used classes
  AbundanceMatrix true_abundances;  // per-block class fractions, normalized
  GroundTruthMap map;
  SpectralLibrary library;
  std::vector<int> class_ids;
  double snr_db = 0.0;
  int factor = 1;
  std::uint64_t seed = 0;
  double noise_clamp_rate = 0.0;
  int dropped_blocks = 0;
};

// label map -> signature substitution -> block downsampling -> noise.
inline SimulatedScene simulate(const SimConfig& cfg) {
  if (cfg.factor < 1) throw ConfigError("factor must be >= 1");

  SimulatedScene sim;
  sim.map = cfg.map ? *cfg.map
                    : generate_label_map(cfg.rows, cfg.cols, cfg.classes,
                                         derive_seed(cfg.seed, 1), cfg.style);
  const int needed = sim.map.class_count;
  sim.library = cfg.library ? *cfg.library
                            : synthesize_library(needed, cfg.bands, derive_seed(cfg.seed, 2));
  if (sim.library.entry_count() < needed)
    throw DimensionError("library has " + std::to_string(sim.library.entry_count()) +
                         " spectra but the map uses " + std::to_string(needed) + " classes");

  const HyperspectralScene high = rasterize(sim.map, sim.library);
  DownsampleResult down = downsample(high, sim.map, cfg.factor);
  sim.class_ids = down.class_ids;
  sim.true_abundances = std::move(down.abundances);
  sim.dropped_blocks = down.dropped_blocks;

  sim.true_endmembers.signatures.resize(sim.library.band_count(),
                                        static_cast<Eigen::Index>(sim.class_ids.size()));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < sim.class_ids.size(); ++i) {
    sim.true_endmembers.signatures.col(static_cast<Eigen::Index>(i)) =
        sim.library.spectra.col(sim.class_ids[i]);
    names.push_back(sim.library.names[static_cast<std::size_t>(sim.class_ids[i])]);
  }
  sim.true_endmembers.names = names;

  sim.scene = add_noise(down.scene, cfg.snr_db, derive_seed(cfg.seed, 3), &sim.noise_clamp_rate);
  sim.snr_db = cfg.snr_db;
  sim.factor = cfg.factor;
  sim.seed = cfg.seed;
  return sim;
}

}  // namespace unmix
