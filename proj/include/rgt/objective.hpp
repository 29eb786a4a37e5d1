#ifndef RGT_OBJECTIVE_HPP
#define RGT_OBJECTIVE_HPP

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rgt/error.hpp"
#include "rgt/phasor.hpp"

namespace rgt {

/// Partials of L with respect to |V_i|^2, |I_i|^2 and phi_i.
struct Gradient {
  std::vector<double> v2;
  std::vector<double> i2;
  std::vector<double> phi;
};

struct Evaluation {
  double value = 0.0;        ///< L = H + h Psi + beta D
  double cost = 0.0;         ///< H + h Psi
  double dissipation = 0.0;  ///< D, unweighted
  Gradient grad;
};

/// An objective over the network state. Implementations are immutable values;
/// `with_beta` returns a copy with a different regularization weight.
template <class T>
concept Objective = requires(const T& obj, const NetworkState& state, double beta) {
  { obj.evaluate(state) } -> std::same_as<Evaluation>;
  { obj.beta() } -> std::convertible_to<double>;
  { obj.with_beta(beta) } -> std::same_as<T>;
};

/// Value and mass-gradient of the phase-independent part H + h Psi.
struct CostEvaluation {
  double value = 0.0;
  std::vector<double> d_v2;
  std::vector<double> d_i2;
};

template <class C>
concept MassCost = requires(const C& cost, std::span<const MassPair> masses) {
  { cost.evaluate(masses) } -> std::same_as<CostEvaluation>;
};

/// D = sum_i |V_i|^2 |I_i|^2 cos^2(phi_i).
inline double dissipation(const NetworkState& state) {
  double d = 0.0;
  for (const auto& n : state.nodes()) {
    double c = std::cos(n.phi);
    d += magnitude2(n.v) * magnitude2(n.i) * c * c;
  }
  return d;
}

/// L = cost(masses) + beta * D, with the phase-dependence carried entirely by D.
template <MassCost Cost>
class RegularizedObjective {
 public:
  explicit RegularizedObjective(Cost cost, double beta = 0.0) : cost_(std::move(cost)) {
    set_beta(beta);
  }

  double beta() const noexcept { return beta_; }
  const Cost& cost() const noexcept { return cost_; }

  RegularizedObjective with_beta(double beta) const {
    RegularizedObjective copy = *this;
    copy.set_beta(beta);
    return copy;
  }

  /// False when the cost declares the masses outside its domain.
  bool feasible(std::span<const MassPair> masses) const {
    if constexpr (requires { cost_.feasible(masses); })
      return cost_.feasible(masses);
    else
      return true;
  }

  /// False when the cost refuses the move from `from` to `to`.
  bool admissible(std::span<const MassPair> from, std::span<const MassPair> to) const {
    if constexpr (requires { cost_.admissible(from, to); })
      return cost_.admissible(from, to);
    else
      return feasible(to);
  }

  Evaluation evaluate(const NetworkState& state) const {
    const std::size_t n = state.size();
    std::vector<MassPair> masses = mass_vector(state);
    CostEvaluation ce = cost_.evaluate(masses);

    Evaluation ev;
    ev.cost = ce.value;
    ev.grad.v2 = std::move(ce.d_v2);
    ev.grad.i2 = std::move(ce.d_i2);
    ev.grad.phi.assign(n, 0.0);
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double phi = state[k].phi;
      const double c = std::cos(phi);
      const double c2 = c * c;
      const auto [a, b] = masses[k];
      d += a * b * c2;
      ev.grad.v2[k] += beta_ * b * c2;
      ev.grad.i2[k] += beta_ * a * c2;
      ev.grad.phi[k] = -beta_ * a * b * std::sin(2.0 * phi);
    }
    ev.dissipation = d;
    ev.value = ev.cost + beta_ * d;
    return ev;
  }

 private:
  void set_beta(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
    beta_ = beta;
  }

  Cost cost_;
  double beta_ = 0.0;
};

// Convenience accessors on any objective.

template <Objective O>
double eval(const O& obj, const NetworkState& state) {
  return obj.evaluate(state).value;
}

template <Objective O>
double grad_v2(const O& obj, const NetworkState& state, std::size_t i) {
  return obj.evaluate(state).grad.v2.at(i);
}

template <Objective O>
double grad_i2(const O& obj, const NetworkState& state, std::size_t i) {
  return obj.evaluate(state).grad.i2.at(i);
}

template <Objective O>
double grad_phi(const O& obj, const NetworkState& state, std::size_t i) {
  return obj.evaluate(state).grad.phi.at(i);
}

template <Objective O>
O with_beta(const O& obj, double beta) {
  return obj.with_beta(beta);
}

/// H = sum_i (|V_i|^2 - |I_i|^2)^2: each node encodes x_i = |V_i|^2 - |I_i|^2.
class QuadraticCost {
 public:
  explicit QuadraticCost(std::size_t nodes) : nodes_(nodes) {
    if (nodes == 0) throw DomainError("quadratic cost needs at least one node");
  }

  std::size_t nodes() const noexcept { return nodes_; }

  CostEvaluation evaluate(std::span<const MassPair> m) const {
    if (m.size() != nodes_)
      throw DomainError("quadratic cost expects " + std::to_string(nodes_) + " nodes");
    CostEvaluation ce;
    ce.d_v2.resize(nodes_);
    ce.d_i2.resize(nodes_);
    for (std::size_t k = 0; k < nodes_; ++k) {
      double x = m[k].v2 - m[k].i2;
      ce.value += x * x;
      ce.d_v2[k] = 2.0 * x;
      ce.d_i2[k] = -2.0 * x;
    }
    return ce;
  }

 private:
  std::size_t nodes_;
};

using QuadraticObjective = RegularizedObjective<QuadraticCost>;

/// L_1 = (|V|^2 - |I|^2)^2 + beta |V|^2 |I|^2 cos^2 phi on a single node.
inline QuadraticObjective quadratic_single(double beta = 0.0) {
  return QuadraticObjective(QuadraticCost(1), beta);
}

/// N-node extension of quadratic_single.
inline QuadraticObjective quadratic_multi(std::size_t n, double beta = 0.0) {
  return QuadraticObjective(QuadraticCost(n), beta);
}

}  // namespace rgt

#endif  // RGT_OBJECTIVE_HPP
