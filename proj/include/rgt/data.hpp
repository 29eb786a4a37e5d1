#ifndef RGT_DATA_HPP
#define RGT_DATA_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rgt/error.hpp"
#include "rgt/random.hpp"

namespace rgt {

struct SyntheticSource {
  std::uint64_t seed = 0;
  std::string generator;
};

struct FileSource {
  std::string path;
  std::string format;  ///< "delimited" or "sparse"
};

/// Rows of `x` are samples.
struct Dataset {
  Eigen::MatrixXd x;
  std::string name;
  std::variant<SyntheticSource, FileSource> provenance;

  Eigen::Index size() const noexcept { return x.rows(); }
  Eigen::Index dim() const noexcept { return x.cols(); }
};

inline void check_dataset(const Dataset& d) {
  if (d.x.rows() < 1 || d.x.cols() < 1) throw DataError("dataset '" + d.name + "' is empty");
  if (!d.x.allFinite()) throw DataError("dataset '" + d.name + "' has non-finite entries");
}

// ---------------------------------------------------------------------------
// Generators

/// n points uniform over the disc of the given radius (sqrt-radius polar sampling).
inline Dataset gen_disc(std::size_t n, double radius, std::uint64_t seed) {
  if (n < 1) throw DomainError("gen_disc needs n >= 1");
  if (!(radius > 0.0)) throw DomainError("gen_disc needs radius > 0");
  Rng rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = radius * std::sqrt(rng.uniform());
    x(k, 0) = r * std::cos(theta);
    x(k, 1) = r * std::sin(theta);
  }
  return {std::move(x), "disc", SyntheticSource{seed, "disc"}};
}

/// Equal-weight isotropic Gaussian mixture with covariance var * I.
inline Dataset gen_gmm(std::size_t n, const std::vector<std::vector<double>>& means, double var,
                       std::uint64_t seed) {
  if (means.empty()) throw DomainError("gen_gmm needs at least one component");
  if (!(var > 0.0)) throw DomainError("gen_gmm needs var > 0");
  const std::size_t dim = means.front().size();
  if (dim == 0) throw DomainError("gen_gmm means must be non-empty vectors");
  for (const auto& m : means)
    if (m.size() != dim) throw DomainError("gen_gmm means differ in dimension");
  Rng rng(seed);
  const double sd = std::sqrt(var);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    auto c = std::min<std::size_t>(static_cast<std::size_t>(rng.uniform() * means.size()),
                                   means.size() - 1);
    for (std::size_t j = 0; j < dim; ++j) x(k, static_cast<Eigen::Index>(j)) = means[c][j] + sd * rng.normal();
  }
  return {std::move(x), "gmm", SyntheticSource{seed, "gmm"}};
}

/// Four clusters at (+-s, +-s) with the given variance.
inline Dataset gen_four_clusters(std::size_t n, double s, double var, std::uint64_t seed) {
  Dataset d = gen_gmm(n, {{s, s}, {-s, s}, {-s, -s}, {s, -s}}, var, seed);
  d.name = "gmm4";
  return d;
}

// ---------------------------------------------------------------------------
// Loaders

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return std::string(s);
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    for (;;) {
      auto pos = line.find(',', start);
      out.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    std::size_t k = 0;
    while (k < line.size()) {
      while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
      std::size_t e = k;
      while (e < line.size() && line[e] != ' ' && line[e] != '\t') ++e;
      if (e > k) out.push_back(line.substr(k, e - k));
      k = e;
    }
  }
  return out;
}

inline std::string most_frequent(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> count;
  for (const auto& l : labels) ++count[l];
  std::string best;
  std::size_t n = 0;
  for (const auto& [l, c] : count)
    if (c > n) best = l, n = c;
  return best;
}

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < dim; ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = c < rows[r].size() ? rows[r][c] : 0.0;
  return x;
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace detail

struct DelimitedOptions {
  bool has_header = false;
  int label_column = -1;  ///< negative counts from the end
  std::optional<std::string> majority_label;  ///< unset: the most frequent label
};

/// Comma- or whitespace-separated numeric features with one label column.
/// Only rows carrying the majority label are kept; the label column is dropped.
inline Dataset load_delimited(const std::string& path, const DelimitedOptions& opt = {}) {
  auto in = detail::open(path);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t lineno = 0;
  bool header_pending = opt.has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    auto fields = detail::split_fields(line);
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw ParseError(lineno, "expected " + std::to_string(width) + " fields, found " +
                                   std::to_string(fields.size()));
    if (width < 2) throw ParseError(lineno, "need at least one feature and a label");
    const int lc = opt.label_column < 0 ? static_cast<int>(width) + opt.label_column : opt.label_column;
    if (lc < 0 || lc >= static_cast<int>(width))
      throw ParseError(lineno, "label column out of range");
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == lc) continue;
      auto v = detail::to_double(fields[c]);
      if (!v || !std::isfinite(*v))
        throw ParseError(lineno, "field " + std::to_string(c + 1) + " is not a number: '" +
                                     std::string(fields[c]) + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
    labels.push_back(detail::unquote(fields[static_cast<std::size_t>(lc)]));
  }
  if (rows.empty()) throw EmptySelection("no data rows in " + path);
  const std::string label = opt.majority_label ? *opt.majority_label : detail::most_frequent(labels);
  std::vector<std::vector<double>> kept;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (labels[r] == label) kept.push_back(std::move(rows[r]));
  if (kept.empty()) throw EmptySelection("no rows with label '" + label + "' in " + path);
  Dataset d{detail::to_matrix(kept, width - 1), label, FileSource{path, "delimited"}};
  check_dataset(d);
  return d;
}

/// "label idx:val idx:val ..." lines with 1-based indices; absent entries are 0.
/// The dimension is the largest index in the file (at least `min_dim`).
inline Dataset load_sparse_indexed(const std::string& path,
                                   std::optional<std::string> majority_label = std::nullopt,
                                   std::size_t min_dim = 0) {
  auto in = detail::open(path);
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<std::string> labels;
  std::size_t dim = min_dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    auto fields = detail::split_fields(detail::trim(body));
    if (fields.empty()) continue;
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      auto colon = fields[f].find(':');
      if (colon == std::string_view::npos)
        throw ParseError(lineno, "expected idx:val, found '" + std::string(fields[f]) + "'");
      auto idx = detail::to_double(fields[f].substr(0, colon));
      auto val = detail::to_double(fields[f].substr(colon + 1));
      if (!idx || *idx != std::floor(*idx))
        throw ParseError(lineno, "bad index '" + std::string(fields[f].substr(0, colon)) + "'");
      if (*idx <= 0.0) throw IndexError(lineno, "index must be >= 1");
      if (!val || !std::isfinite(*val))
        throw ParseError(lineno, "bad value '" + std::string(fields[f].substr(colon + 1)) + "'");
      const auto k = static_cast<std::size_t>(*idx);
      dim = std::max(dim, k);
      row.emplace_back(k - 1, *val);
    }
    auto lab = detail::to_double(fields[0]);
    labels.push_back(lab ? std::to_string(static_cast<long long>(*lab)) : std::string(fields[0]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptySelection("no data rows in " + path);
  std::string label = labels.front();
  if (majority_label) {
    auto lab = detail::to_double(*majority_label);
    label = lab ? std::to_string(static_cast<long long>(*lab)) : *majority_label;
  } else {
    label = detail::most_frequent(labels);
  }
  std::vector<std::vector<double>> dense;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (labels[r] != label) continue;
    std::vector<double> x(dim, 0.0);
    for (auto [k, v] : rows[r]) x[k] = v;
    dense.push_back(std::move(x));
  }
  if (dense.empty()) throw EmptySelection("no rows with label '" + label + "' in " + path);
  if (dim == 0) throw EmptySelection("no features in " + path);
  Dataset d{detail::to_matrix(dense, dim), label, FileSource{path, "sparse"}};
  check_dataset(d);
  return d;
}

/// Zero mean, unit variance per column; constant columns are only centred.
inline Dataset standardize(Dataset d) {
  const Eigen::RowVectorXd mean = d.x.colwise().mean();
  d.x.rowwise() -= mean;
  for (Eigen::Index c = 0; c < d.x.cols(); ++c) {
    const double sd = std::sqrt(d.x.col(c).squaredNorm() / static_cast<double>(d.x.rows()));
    if (sd > 0.0) d.x.col(c) /= sd;
  }
  return d;
}

}  // namespace rgt

#endif  // RGT_DATA_HPP
