#ifndef RGT_PHASOR_HPP
#define RGT_PHASOR_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "rgt/error.hpp"

namespace rgt {

/// Dimensionless voltage or current phasor in Cartesian form.
using Phasor = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Tolerance on per-subgroup mass sums accepted at construction.
inline constexpr double kMassTolerance = 1e-9;

inline double magnitude2(Phasor p) noexcept { return std::norm(p); }

/// Angle in (-pi, pi]; a zero phasor has phase 0.
inline double phase(Phasor p) noexcept {
  if (p.real() == 0.0 && p.imag() == 0.0) return 0.0;
  double a = std::arg(p);
  return a == -kPi ? kPi : a;
}

inline Phasor from_polar(double magnitude, double angle) noexcept {
  return std::polar(magnitude, angle);
}

struct NodeState {
  Phasor v{};
  Phasor i{};
  double phi = 0.0;  ///< relative phase of the current with respect to the voltage

  double mass() const noexcept { return magnitude2(v) + magnitude2(i); }
};

/// One conservation subgroup: the node indices whose masses sum to one.
struct Subgroup {
  std::vector<std::size_t> nodes;
};

/// Per-node (|V|^2, |I|^2) pair, the simplex coordinates of a node.
struct MassPair {
  double v2 = 0.0;
  double i2 = 0.0;

  friend bool operator==(const MassPair&, const MassPair&) = default;
};

/// The evolving network: phasors, relative phases, and the subgroup partition.
///
/// Every subgroup's mass sum equals one. The global constraint is the case of
/// a single subgroup covering all nodes.
class NetworkState {
 public:
  NetworkState() = default;

  /// Validates the partition and the per-subgroup mass constraint.
  NetworkState(std::vector<NodeState> nodes, std::vector<Subgroup> groups)
      : nodes_(std::move(nodes)), groups_(std::move(groups)) {
    check_partition();
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      double r = std::abs(group_mass(g) - 1.0);
      if (!(r <= kMassTolerance))
        throw DomainError("subgroup " + std::to_string(g) + " mass sum deviates from 1 by " +
                          std::to_string(r));
    }
  }

  /// Single subgroup over all nodes.
  static NetworkState global(std::vector<NodeState> nodes) {
    Subgroup all;
    all.nodes.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) all.nodes[k] = k;
    return NetworkState(std::move(nodes), {std::move(all)});
  }

  /// Builds a state without checking the mass constraint (partition is still checked).
  static NetworkState unchecked(std::vector<NodeState> nodes, std::vector<Subgroup> groups) {
    NetworkState s;
    s.nodes_ = std::move(nodes);
    s.groups_ = std::move(groups);
    s.check_partition();
    return s;
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<NodeState>& nodes() const noexcept { return nodes_; }
  std::vector<NodeState>& nodes() noexcept { return nodes_; }
  const NodeState& operator[](std::size_t k) const { return nodes_[k]; }
  NodeState& operator[](std::size_t k) { return nodes_[k]; }
  const std::vector<Subgroup>& groups() const noexcept { return groups_; }

  /// Index of the subgroup that owns each node.
  std::vector<std::size_t> group_of() const {
    std::vector<std::size_t> owner(nodes_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g)
      for (std::size_t k : groups_[g].nodes) owner[k] = g;
    return owner;
  }

  double group_mass(std::size_t g) const {
    double s = 0.0;
    for (std::size_t k : groups_[g].nodes) s += nodes_[k].mass();
    return s;
  }

  /// max over subgroups of |sum - 1|.
  double conservation_residual() const {
    double r = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) r = std::max(r, std::abs(group_mass(g) - 1.0));
    return r;
  }

 private:
  void check_partition() const {
    if (nodes_.empty()) throw DomainError("network needs at least one node");
    if (groups_.empty()) throw DomainError("network needs at least one subgroup");
    std::vector<int> seen(nodes_.size(), 0);
    for (const auto& g : groups_) {
      if (g.nodes.empty()) throw DomainError("empty subgroup");
      for (std::size_t k : g.nodes) {
        if (k >= nodes_.size()) throw DomainError("subgroup index out of range");
        if (seen[k]++) throw DomainError("node " + std::to_string(k) + " in two subgroups");
      }
    }
    for (std::size_t k = 0; k < seen.size(); ++k)
      if (!seen[k]) throw DomainError("node " + std::to_string(k) + " not in any subgroup");
  }

  std::vector<NodeState> nodes_;
  std::vector<Subgroup> groups_;
};

inline std::vector<MassPair> mass_vector(const NetworkState& state) {
  std::vector<MassPair> out;
  out.reserve(state.size());
  for (const auto& n : state.nodes()) out.push_back({magnitude2(n.v), magnitude2(n.i)});
  return out;
}

/// Scales every subgroup so its mass sum is one. Phases are untouched.
inline NetworkState renormalize(NetworkState state) {
  for (std::size_t g = 0; g < state.groups().size(); ++g) {
    double sum = state.group_mass(g);
    if (!(sum > 0.0) || !std::isfinite(sum)) throw ZeroMassError(g);
    if (sum == 1.0) continue;
    double scale = 1.0 / std::sqrt(sum);
    for (std::size_t k : state.groups()[g].nodes) {
      state[k].v *= scale;
      state[k].i *= scale;
    }
  }
  return state;
}

/// Splits x in [-1, 1] into (x+, x-) with x+ - x- = x and x+ + x- = 1.
inline std::pair<double, double> bounded_to_simplex(double x) {
  if (!(std::abs(x) <= 1.0)) throw DomainError("bounded_to_simplex: |x| > 1");
  return {(1.0 + x) / 2.0, (1.0 - x) / 2.0};
}

/// Node with the given squared magnitudes; the voltage sits at angle theta and
/// the current leads it by phi.
inline NodeState make_node(double v2, double i2, double phi, double theta = 0.0) {
  return NodeState{from_polar(std::sqrt(v2), theta), from_polar(std::sqrt(i2), theta + phi), phi};
}

}  // namespace rgt

#endif  // RGT_PHASOR_HPP
