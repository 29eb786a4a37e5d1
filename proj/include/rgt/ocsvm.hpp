#ifndef RGT_OCSVM_HPP
#define RGT_OCSVM_HPP

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgt/dynamics.hpp"
#include "rgt/error.hpp"
#include "rgt/objective.hpp"
#include "rgt/phasor.hpp"
#include "rgt/random.hpp"
#include "rgt/schedule.hpp"

namespace rgt {

/// Gaussian kernel exp(-|x - y|^2 / (2 sigma^2)).
struct KernelSpec {
  double sigma = 1.0;

  double operator()(double squared_distance) const {
    return std::exp(-squared_distance / (2.0 * sigma * sigma));
  }
};

/// Largest N for which the full Gram matrix is stored.
inline constexpr Eigen::Index kGramCacheLimit = 5000;
/// Largest N for which the PSD check runs at construction.
inline constexpr Eigen::Index kPsdCheckLimit = 2000;

/// Kernel matrix over the rows of a data matrix. Cached for N <= kGramCacheLimit,
/// otherwise products are formed tile by tile from the data.
class Gram {
 public:
  Gram(std::shared_ptr<const Eigen::MatrixXd> data, KernelSpec kernel)
      : data_(std::move(data)), kernel_(kernel) {
    if (!(kernel_.sigma > 0.0) || !std::isfinite(kernel_.sigma))
      throw DomainError("kernel sigma must be > 0");
    norms_ = data_->rowwise().squaredNorm();
    if (size() <= kGramCacheLimit) {
      cache_ = block(0, size());
      if (size() <= kPsdCheckLimit) check_psd();
    }
  }

  Eigen::Index size() const noexcept { return data_->rows(); }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  bool cached() const noexcept { return cache_.has_value(); }
  const Eigen::MatrixXd& data() const noexcept { return *data_; }
  const std::shared_ptr<const Eigen::MatrixXd>& data_ptr() const noexcept { return data_; }

  double operator()(Eigen::Index i, Eigen::Index j) const {
    if (cache_) return (*cache_)(i, j);
    return kernel_((data_->row(i) - data_->row(j)).squaredNorm());
  }

  const Eigen::MatrixXd& matrix() const {
    if (!cache_) throw DomainError("Gram matrix is not cached for N > 5000");
    return *cache_;
  }

  /// K a.
  Eigen::VectorXd apply(const Eigen::VectorXd& a) const {
    if (cache_) return *cache_ * a;
    Eigen::VectorXd out(size());
    constexpr Eigen::Index tile = 512;
    for (Eigen::Index r = 0; r < size(); r += tile) {
      const Eigen::Index rows = std::min(tile, size() - r);
      out.segment(r, rows) = block(r, rows) * a;
    }
    return out;
  }

  /// Kernel values between x and every row.
  Eigen::VectorXd against(const Eigen::VectorXd& x) const {
    Eigen::VectorXd d2 = (data_->rowwise() - x.transpose()).rowwise().squaredNorm();
    return d2.unaryExpr([this](double d) { return kernel_(d); });
  }

 private:
  Eigen::MatrixXd block(Eigen::Index first, Eigen::Index rows) const {
    const auto& x = *data_;
    Eigen::MatrixXd d2 = -2.0 * (x.middleRows(first, rows) * x.transpose());
    d2.colwise() += norms_.segment(first, rows);
    d2.rowwise() += norms_.transpose();
    Eigen::MatrixXd k = d2.unaryExpr([this](double d) { return kernel_(std::max(d, 0.0)); });
    for (Eigen::Index i = 0; i < rows; ++i) k(i, first + i) = 1.0;
    return k;
  }

  void check_psd() const {
    const Eigen::MatrixXd& k = *cache_;
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
    if (lo < -1e-8 * k.trace()) throw DomainError("kernel matrix is not positive semidefinite");
  }

  std::shared_ptr<const Eigen::MatrixXd> data_;
  KernelSpec kernel_;
  Eigen::VectorXd norms_;
  std::optional<Eigen::MatrixXd> cache_;
};

/// Median Euclidean distance between distinct rows. Above 2000 rows an evenly
/// strided subset of 2000 rows is used.
inline double median_pairwise_distance(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index stride = std::max<Eigen::Index>(1, (n + 1999) / 2000);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; i += stride) rows.push_back(i);
  std::vector<double> d;
  d.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) d.push_back((x.row(rows[a]) - x.row(rows[b])).norm());
  if (d.empty()) throw DomainError("median distance needs at least two rows");
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double m = *mid;
  if (d.size() % 2 == 0) m = 0.5 * (m + *std::max_element(d.begin(), mid));
  return m;
}

/// FNV-1a over the shape and the row-major bytes of the data.
inline std::string fingerprint(const Eigen::MatrixXd& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < n; ++k) h = (h ^ b[k]) * 0x100000001b3ULL;
  };
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(x.rows()), static_cast<std::uint64_t>(x.cols())};
  feed(shape, sizeof shape);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double v = x(r, c);
      feed(&v, sizeof v);
    }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class OcsvmProblem {
 public:
  /// h unset selects 1e-3 / N.
  OcsvmProblem(Eigen::MatrixXd data, double nu, KernelSpec kernel, std::optional<double> h = std::nullopt)
      : nu_(nu) {
    if (data.rows() < 2) throw DomainError("one-class SVM needs N >= 2");
    if (!data.allFinite()) throw DomainError("data has non-finite entries");
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("nu must lie in (0, 1)");
    const double n = static_cast<double>(data.rows());
    h_ = h.value_or(1e-3 / n);
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("barrier weight h must be > 0");
    gram_ = std::make_shared<const Gram>(std::make_shared<const Eigen::MatrixXd>(std::move(data)), kernel);
  }

  Eigen::Index size() const noexcept { return gram_->size(); }
  double nu() const noexcept { return nu_; }
  double h() const noexcept { return h_; }
  /// 1 / (nu N)
  double upper_bound() const noexcept { return 1.0 / (nu_ * static_cast<double>(size())); }
  const Gram& gram() const noexcept { return *gram_; }
  const std::shared_ptr<const Gram>& gram_ptr() const noexcept { return gram_; }
  const Eigen::MatrixXd& data() const noexcept { return gram_->data(); }

 private:
  double nu_;
  double h_ = 0.0;
  std::shared_ptr<const Gram> gram_;
};

inline Eigen::VectorXd alphas_of(std::span<const MassPair> m) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(m.size()));
  for (std::size_t k = 0; k < m.size(); ++k) a[static_cast<Eigen::Index>(k)] = m[k].v2 + m[k].i2;
  return a;
}

/// H + h Psi = 1/2 a'Ka - h sum log(1/(nu N) - a_i), with a_i = |V_i|^2 + |I_i|^2.
class OcsvmCost {
 public:
  OcsvmCost(std::shared_ptr<const Gram> gram, double bound, double h)
      : gram_(std::move(gram)), bound_(bound), h_(h) {}

  double bound() const noexcept { return bound_; }
  double h() const noexcept { return h_; }
  const Gram& gram() const noexcept { return *gram_; }

  bool feasible(std::span<const MassPair> m) const {
    for (const auto& p : m)
      if (!(p.v2 + p.i2 < bound_)) return false;
    return true;
  }

  /// Fraction-to-boundary rule: a step may close at most half of any node's
  /// remaining slack. Without it a single step can land within a few ulps of
  /// the bound, where h / slack pins lambda and stalls every other node.
  bool admissible(std::span<const MassPair> from, std::span<const MassPair> to) const {
    for (std::size_t k = 0; k < to.size(); ++k) {
      const double before = bound_ - (from[k].v2 + from[k].i2);
      const double after = bound_ - (to[k].v2 + to[k].i2);
      if (!(after > 0.0) || after < kBoundaryFraction * before) return false;
    }
    return true;
  }

  static constexpr double kBoundaryFraction = 0.5;

  /// 1/2 a'Ka alone.
  double quadratic(const Eigen::VectorXd& a) const { return 0.5 * a.dot(gram_->apply(a)); }

  CostEvaluation evaluate(std::span<const MassPair> m) const {
    if (static_cast<Eigen::Index>(m.size()) != gram_->size())
      throw DomainError("SVM objective expects " + std::to_string(gram_->size()) + " nodes");
    const Eigen::VectorXd a = alphas_of(m);
    const Eigen::VectorXd ka = gram_->apply(a);
    CostEvaluation ce;
    ce.value = 0.5 * a.dot(ka);
    ce.d_v2.resize(m.size());
    ce.d_i2.resize(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double slack = bound_ - a[static_cast<Eigen::Index>(k)];
      if (!(slack > 0.0)) throw BarrierViolation(k, a[static_cast<Eigen::Index>(k)], bound_);
      ce.value -= h_ * std::log(slack);
      const double g = ka[static_cast<Eigen::Index>(k)] + h_ / slack;
      ce.d_v2[k] = g;
      ce.d_i2[k] = g;
    }
    return ce;
  }

 private:
  std::shared_ptr<const Gram> gram_;
  double bound_;
  double h_;
};

using OcsvmObjective = RegularizedObjective<OcsvmCost>;

inline OcsvmObjective build_objective(const OcsvmProblem& p, double beta = 0.0) {
  return OcsvmObjective(OcsvmCost(p.gram_ptr(), p.upper_bound(), p.h()), beta);
}

struct OcsvmModel {
  std::vector<double> alphas;
  std::vector<std::size_t> sv_indices;
  double rho = 0.0;
  KernelSpec kernel;
  double nu = 0.0;
  double h = 0.0;
  double sv_threshold = 0.0;
  std::string data_fingerprint;
  std::shared_ptr<const Gram> gram;  ///< training data and kernel
  std::optional<NetworkState> state;  ///< final phasors when produced by train()
};

/// Scores s_i = sum_j a_j K(x_j, x_i) over the training rows.
inline Eigen::VectorXd training_scores(const Gram& g, const std::vector<double>& alphas) {
  return g.apply(Eigen::Map<const Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size())));
}

/// Fills sv_indices (alpha > threshold) and rho (median SV score).
inline void finalize_model(OcsvmModel& m) {
  m.sv_indices.clear();
  for (std::size_t k = 0; k < m.alphas.size(); ++k)
    if (m.alphas[k] > m.sv_threshold) m.sv_indices.push_back(k);
  if (m.sv_indices.empty()) throw DomainError("model has no support vectors");
  const Eigen::VectorXd s = training_scores(*m.gram, m.alphas);
  std::vector<double> sv;
  for (auto k : m.sv_indices) sv.push_back(s[static_cast<Eigen::Index>(k)]);
  auto mid = sv.begin() + static_cast<std::ptrdiff_t>(sv.size() / 2);
  std::nth_element(sv.begin(), mid, sv.end());
  double rho = *mid;
  if (sv.size() % 2 == 0) rho = 0.5 * (rho + *std::max_element(sv.begin(), mid));
  m.rho = rho;
}

/// Initial state: alpha_i = 1/N split randomly between |V|^2 and |I|^2,
/// random voltage angle, random relative phase away from 0.
inline NetworkState ocsvm_initial_state(std::size_t n, Rng& rng) {
  std::vector<NodeState> nodes(n);
  const double a = 1.0 / static_cast<double>(n);
  for (auto& node : nodes) {
    const double u = rng.uniform(1e-3, 1.0 - 1e-3);
    const double theta = rng.uniform(-kPi, kPi);
    node = make_node(a * u, a * (1.0 - u), random_phase(rng), theta);
  }
  return renormalize(NetworkState::unchecked(std::move(nodes), {Subgroup{[n] {
                                                 std::vector<std::size_t> all(n);
                                                 for (std::size_t k = 0; k < n; ++k) all[k] = k;
                                                 return all;
                                               }()}}));
}

struct TrainResult {
  OcsvmModel model;
  SolveResult run;           ///< final barrier stage
  std::size_t stages = 1;
  std::size_t total_steps = 0;
};

/// Barrier continuation. Training runs a stage at h_start, then at h_start *
/// shrink, and so on down to the problem's h, each warm-started from the
/// previous phasors. A small h makes the barrier stiff near an active box and
/// the shared mass multiplier then crawls; the early stages put the active
/// nodes near their final slack before that happens. h_start <= h is a
/// single stage.
struct BarrierPath {
  double h_start = 0.0;
  double shrink = 0.1;
};

template <class Sink>
  requires std::invocable<Sink&, const TraceRecord&>
TrainResult train(const OcsvmProblem& p, const SolverConfig& cfg, const BetaSchedule& schedule,
                  std::uint64_t seed, Sink&& sink, const BarrierPath& path = {}) {
  if (!(path.shrink > 0.0 && path.shrink < 1.0)) throw DomainError("barrier shrink must be in (0, 1)");
  Rng rng(seed, 0x5356);
  NetworkState state = ocsvm_initial_state(static_cast<std::size_t>(p.size()), rng);
  TrainResult out;
  out.stages = 0;
  for (double h = path.h_start; h > p.h() * (1.0 + 1e-9); h *= path.shrink) {
    const OcsvmObjective stage(OcsvmCost(p.gram_ptr(), p.upper_bound(), h), 0.0);
    SolveResult r = solve(stage, std::move(state), cfg, schedule, [](const TraceRecord&) {});
    state = std::move(r.final.state);
    out.total_steps += r.steps;
    ++out.stages;
  }
  out.run = solve(build_objective(p), std::move(state), cfg, schedule, std::forward<Sink>(sink));
  out.total_steps += out.run.steps;
  ++out.stages;
  const NetworkState& s = out.run.final.state;
  OcsvmModel& m = out.model;
  m.alphas.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) m.alphas[k] = s[k].mass();
  m.kernel = p.gram().kernel();
  m.nu = p.nu();
  m.h = p.h();
  m.sv_threshold = 1.0 / (10.0 * static_cast<double>(p.size()));
  m.data_fingerprint = fingerprint(p.data());
  m.gram = p.gram_ptr();
  m.state = s;
  finalize_model(m);
  return out;
}

inline TrainResult train(const OcsvmProblem& p, const SolverConfig& cfg, const BetaSchedule& schedule,
                         std::uint64_t seed, const BarrierPath& path = {}) {
  return train(p, cfg, schedule, seed, [](const TraceRecord&) {}, path);
}

/// f(x) = sum_j a_j K(x_j, x) - rho; non-negative inside the learned region.
inline double decision_function(const OcsvmModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.gram->data().cols()) throw DomainError("decision_function: dimension mismatch");
  const Eigen::VectorXd k = m.gram->against(x);
  double s = 0.0;
  for (std::size_t j = 0; j < m.alphas.size(); ++j) s += m.alphas[j] * k[static_cast<Eigen::Index>(j)];
  return s - m.rho;
}

struct ClassifyReport {
  std::size_t correct = 0;
  std::size_t outliers = 0;
  std::size_t sv_count = 0;
};

/// Outliers are rows with f(x) < 0.
inline ClassifyReport classify_dataset(const OcsvmModel& m, const Eigen::MatrixXd& data) {
  ClassifyReport r;
  for (Eigen::Index k = 0; k < data.rows(); ++k)
    if (decision_function(m, data.row(k).transpose()) < 0.0) ++r.outliers;
  r.correct = static_cast<std::size_t>(data.rows()) - r.outliers;
  r.sv_count = m.sv_indices.size();
  return r;
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json to_json(const OcsvmModel& m) {
  return nlohmann::json{{"format", "rgt-ocsvm-1"},
                        {"kernel", {{"kind", "gaussian"}, {"sigma", m.kernel.sigma}}},
                        {"nu", m.nu},
                        {"h", m.h},
                        {"sv_threshold", m.sv_threshold},
                        {"rho", m.rho},
                        {"alphas", m.alphas},
                        {"sv_indices", m.sv_indices},
                        {"data_fingerprint", m.data_fingerprint}};
}

/// Rebuilds a model against its training data; the fingerprint must match.
inline OcsvmModel model_from_json(const nlohmann::json& j, const Eigen::MatrixXd& data) {
  try {
    if (j.at("format") != "rgt-ocsvm-1") throw DataError("unknown model format");
    OcsvmModel m;
    m.kernel.sigma = j.at("kernel").at("sigma").get<double>();
    m.nu = j.at("nu").get<double>();
    m.h = j.at("h").get<double>();
    m.sv_threshold = j.at("sv_threshold").get<double>();
    m.rho = j.at("rho").get<double>();
    m.alphas = j.at("alphas").get<std::vector<double>>();
    m.sv_indices = j.at("sv_indices").get<std::vector<std::size_t>>();
    m.data_fingerprint = j.at("data_fingerprint").get<std::string>();
    if (static_cast<Eigen::Index>(m.alphas.size()) != data.rows())
      throw DataError("model has " + std::to_string(m.alphas.size()) + " alphas, data has " +
                      std::to_string(data.rows()) + " rows");
    if (fingerprint(data) != m.data_fingerprint) throw DataError("data does not match the model fingerprint");
    m.gram = std::make_shared<const Gram>(std::make_shared<const Eigen::MatrixXd>(data), m.kernel);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model: ") + e.what());
  }
}

}  // namespace rgt

#endif  // RGT_OCSVM_HPP
