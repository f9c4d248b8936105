#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/graph.hpp"
#include "unmix/metrics.hpp"
#include "unmix/simdata.hpp"
#include "unmix/unmixing.hpp"

namespace unmix {

namespace detail {

// Shortest round-tripping decimal form; parsing it back recovers the exact
// bits, which is what keeps rerun outputs byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view tok, const std::string& file, int line_no) {
  double v{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw IoError(file + ":" + std::to_string(line_no) + ": cannot parse number '" +
                  std::string(tok) + "'");
  return v;
}

inline long parse_long(std::string_view tok, const std::string& file, int line_no) {
  long v{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw IoError(file + ":" + std::to_string(line_no) + ": cannot parse integer '" +
                  std::string(tok) + "'");
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  return f;
}

}  // namespace detail

// Matrix text format: first line `rows cols`, then `rows` lines of
// space-separated decimal values.
inline void write_matrix(const std::string& path, const Matrix& m) {
  auto f = detail::open_out(path);
  f << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) f << ' ';
      f << detail::format_double(m(r, c));
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

inline Matrix read_matrix(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  int line_no = 0;
  if (!std::getline(f, line)) throw IoError(path + ":1: missing header line");
  ++line_no;
  const auto head = detail::split_ws(line);
  if (head.size() != 2) throw IoError(path + ":1: header must be 'rows cols'");
  const long rows = detail::parse_long(head[0], path, 1);
  const long cols = detail::parse_long(head[1], path, 1);
  if (rows < 1 || cols < 1) throw IoError(path + ":1: dimensions must be >= 1");

  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(f, line))
      throw IoError(path + ":" + std::to_string(line_no + 1) + ": expected " +
                    std::to_string(rows) + " data rows, got " + std::to_string(r));
    ++line_no;
    const auto toks = detail::split_ws(line);
    if (static_cast<long>(toks.size()) != cols)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                    " values, got " + std::to_string(toks.size()));
    for (long c = 0; c < cols; ++c) {
      const double v = detail::parse_double(toks[static_cast<std::size_t>(c)], path, line_no);
      if (std::isnan(v))
        throw IoError(path + ":" + std::to_string(line_no) + ": NaN is not a valid entry");
      m(r, c) = v;
    }
  }
  return m;
}

// Matrix file that must hold nonnegative, finite values (scenes, spectra,
// abundances).
inline Matrix read_nonnegative_matrix(const std::string& path) {
  const Matrix m = read_matrix(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)) || m(r, c) < 0.0)
        throw IoError(path + ": invalid entry " + detail::format_double(m(r, c)) + " at row " +
                      std::to_string(r + 2) + " of the file (must be finite and >= 0)");
  return m;
}

// Label-map text format: first line `rows cols`, then `rows` lines of
// space-separated integers; -1 marks background.
inline void write_label_map(const std::string& path, const GroundTruthMap& map) {
  auto f = detail::open_out(path);
  f << map.rows() << ' ' << map.cols() << '\n';
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      if (c) f << ' ';
      f << map.labels(r, c);
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

inline GroundTruthMap read_label_map(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw IoError(path + ":1: missing header line");
  const auto head = detail::split_ws(line);
  if (head.size() != 2) throw IoError(path + ":1: header must be 'rows cols'");
  const long rows = detail::parse_long(head[0], path, 1);
  const long cols = detail::parse_long(head[1], path, 1);
  if (rows < 1 || cols < 1) throw IoError(path + ":1: dimensions must be >= 1");

  GroundTruthMap map;
  map.labels.resize(rows, cols);
  int max_label = -1;
  int line_no = 1;
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(f, line))
      throw IoError(path + ":" + std::to_string(line_no + 1) + ": expected " +
                    std::to_string(rows) + " label rows, got " + std::to_string(r));
    ++line_no;
    const auto toks = detail::split_ws(line);
    if (static_cast<long>(toks.size()) != cols)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                    " labels, got " + std::to_string(toks.size()));
    for (long c = 0; c < cols; ++c) {
      const long v = detail::parse_long(toks[static_cast<std::size_t>(c)], path, line_no);
      if (v < -1)
        throw IoError(path + ":" + std::to_string(line_no) + ": label " + std::to_string(v) +
                      " is invalid (-1 marks background)");
      map.labels(r, c) = static_cast<int>(v);
      max_label = std::max(max_label, static_cast<int>(v));
    }
  }
  if (max_label < 0) throw IoError(path + ": map contains only background");
  map.class_count = max_label + 1;
  return map;
}

// Spectral-library text format: header `L K`, an optional line of L
// wavelengths, then K lines of `name v1 ... vL`.
inline void write_library(const std::string& path, const SpectralLibrary& lib) {
  auto f = detail::open_out(path);
  f << lib.band_count() << ' ' << lib.entry_count() << '\n';
  if (!lib.wavelengths.empty()) {
    for (std::size_t i = 0; i < lib.wavelengths.size(); ++i) {
      if (i) f << ' ';
      f << detail::format_double(lib.wavelengths[i]);
    }
    f << '\n';
  }
  for (Eigen::Index k = 0; k < lib.entry_count(); ++k) {
    f << lib.names[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < lib.band_count(); ++i)
      f << ' ' << detail::format_double(lib.spectra(i, k));
    f << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

inline SpectralLibrary read_library(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw IoError(path + ":1: missing header line");
  const auto head = detail::split_ws(line);
  if (head.size() != 2) throw IoError(path + ":1: header must be 'L K'");
  const long L = detail::parse_long(head[0], path, 1);
  const long K = detail::parse_long(head[1], path, 1);
  if (L < 1 || K < 1) throw IoError(path + ":1: L and K must be >= 1");

  SpectralLibrary lib;
  lib.spectra.resize(L, K);
  int line_no = 1;
  long next_entry = 0;
  bool saw_wavelengths = false;
  while (std::getline(f, line)) {
    ++line_no;
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    // A wavelength line has exactly L numeric tokens; entry lines start with
    // a name and carry L + 1 tokens.
    double probe{};
    const auto pr = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), probe);
    const bool numeric_first = pr.ec == std::errc{} && pr.ptr == toks[0].data() + toks[0].size();
    if (!saw_wavelengths && next_entry == 0 && numeric_first) {
      if (static_cast<long>(toks.size()) != L)
        throw IoError(path + ":" + std::to_string(line_no) + ": wavelength line has " +
                      std::to_string(toks.size()) + " values, expected " + std::to_string(L));
      lib.wavelengths.resize(static_cast<std::size_t>(L));
      for (long i = 0; i < L; ++i) {
        const double w = detail::parse_double(toks[static_cast<std::size_t>(i)], path, line_no);
        if (!std::isfinite(w) || w < 0.0)
          throw IoError(path + ":" + std::to_string(line_no) + ": invalid wavelength");
        lib.wavelengths[static_cast<std::size_t>(i)] = w;
      }
      saw_wavelengths = true;
      continue;
    }
    if (next_entry >= K)
      throw IoError(path + ":" + std::to_string(line_no) + ": more than " + std::to_string(K) +
                    " library entries");
    if (static_cast<long>(toks.size()) != L + 1)
      throw IoError(path + ":" + std::to_string(line_no) + ": entry has " +
                    std::to_string(toks.size() - 1) + " values, expected " + std::to_string(L));
    lib.names.push_back(std::string(toks[0]));
    for (long i = 0; i < L; ++i) {
      const double v = detail::parse_double(toks[static_cast<std::size_t>(i + 1)], path, line_no);
      if (std::isnan(v) || !std::isfinite(v) || v < 0.0)
        throw IoError(path + ":" + std::to_string(line_no) + ": invalid spectrum value '" +
                      std::string(toks[static_cast<std::size_t>(i + 1)]) +
                      "' (must be finite and >= 0)");
      lib.spectra(i, next_entry) = v;
    }
    ++next_entry;
  }
  if (next_entry != K)
    throw IoError(path + ": expected " + std::to_string(K) + " entries, found " +
                  std::to_string(next_entry));
  return lib;
}

// Per-iteration objective trace as delimited text.
inline void write_trace(const std::string& path, const std::vector<Objective>& trace) {
  auto f = detail::open_out(path);
  f << "iter,fit,graph_term,sparse_term,total\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    f << (i + 1) << ',' << detail::format_double(trace[i].fit) << ','
      << detail::format_double(trace[i].graph_term) << ','
      << detail::format_double(trace[i].sparse_term) << ','
      << detail::format_double(trace[i].total) << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

// Debug edge-list export: one `j l weight` triple per line, zero-indexed,
// upper triangle only.
inline void write_edges(const std::string& path, const PixelGraph& g) {
  auto f = detail::open_out(path);
  for (int k = 0; k < g.weights.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(g.weights, k); it; ++it)
      if (it.row() < it.col())
        f << it.row() << ' ' << it.col() << ' ' << detail::format_double(it.value()) << '\n';
  if (!f) throw IoError("write failed for '" + path + "'");
}

// Config file format: one `key = value` per line, '#' starts a comment.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  auto f = detail::open_in(path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value', got '" +
                        trimmed + "'");
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    if (out.count(key))
      throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

// Evaluation report as a key = value document (angles in degrees).
inline void write_report_kv(const std::string& path, const EvaluationReport& rep) {
  auto f = detail::open_out(path);
  f << "rms_sad_deg = " << detail::format_double(to_degrees(rep.rms_sad)) << '\n';
  f << "rms_aad_deg = " << detail::format_double(to_degrees(rep.rms_aad)) << '\n';
  f << "excluded_pixels = " << rep.excluded_pixels << '\n';
  f << "matching =";
  for (int j : rep.matching) f << ' ' << j;
  f << '\n';
  for (Eigen::Index j = 0; j < rep.per_endmember_sad.size(); ++j)
    f << "sad_deg_" << j << " = " << detail::format_double(to_degrees(rep.per_endmember_sad[j]))
      << '\n';
  if (!f) throw IoError("write failed for '" + path + "'");
}

// Per-item angles as delimited text.
inline void write_report_csv(const std::string& path, const EvaluationReport& rep) {
  auto f = detail::open_out(path);
  f << "kind,index,angle_deg\n";
  for (Eigen::Index j = 0; j < rep.per_endmember_sad.size(); ++j)
    f << "sad," << j << ',' << detail::format_double(to_degrees(rep.per_endmember_sad[j])) << '\n';
  for (Eigen::Index t = 0; t < rep.per_pixel_aad.size(); ++t) {
    const double v = rep.per_pixel_aad[t];
    f << "aad," << t << ',' << (std::isnan(v) ? std::string("excluded")
                                              : detail::format_double(to_degrees(v)))
      << '\n';
  }
  if (!f) throw IoError("write failed for '" + path + "'");
}

}  // namespace unmix
