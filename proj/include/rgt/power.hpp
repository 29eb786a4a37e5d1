#ifndef RGT_POWER_HPP
#define RGT_POWER_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rgt/error.hpp"
#include "rgt/phasor.hpp"

namespace rgt {

/// How the per-node active metric treats the relative phase.
///
/// Resonant: |V||I| cos(phi), reactive |V||I| sin(phi), D = sum |V|^2|I|^2 cos^2(phi).
/// NonResonant: the phase-free model, where the whole product |V||I| is
/// dissipated; reactive is zero and D = sum |V|^2|I|^2.
enum class PowerConvention { Resonant, NonResonant };

struct PowerReport {
  std::vector<double> per_node_active;
  std::vector<double> per_node_reactive;
  double total_active_abs = 0.0;
  double dissipation_D = 0.0;
  double conservation_residual = 0.0;
};

inline PowerReport power_report(const NetworkState& state,
                                PowerConvention convention = PowerConvention::Resonant) {
  PowerReport r;
  r.per_node_active.reserve(state.size());
  r.per_node_reactive.reserve(state.size());
  for (const auto& n : state.nodes()) {
    const double vi = std::abs(n.v) * std::abs(n.i);
    double p = vi, q = 0.0, d = vi * vi;
    if (convention == PowerConvention::Resonant) {
      const double c = std::cos(n.phi);
      p = vi * c;
      q = vi * std::sin(n.phi);
      d = magnitude2(n.v) * magnitude2(n.i) * c * c;
    }
    r.per_node_active.push_back(p);
    r.per_node_reactive.push_back(q);
    r.total_active_abs += std::abs(p);
    r.dissipation_D += d;
  }
  r.conservation_residual = state.conservation_residual();
  return r;
}

/// |omega sqrt(LC) - 1|; zero exactly at resonance.
inline double lc_resonance_check(double inductance, double capacitance, double omega) {
  if (!(inductance > 0.0) || !(capacitance > 0.0) || !(omega > 0.0))
    throw DomainError("lc_resonance_check needs positive L, C and omega");
  return std::abs(omega * std::sqrt(inductance * capacitance) - 1.0);
}

struct TankValues {
  double inductance = 0.0;
  double capacitance = 0.0;
};

/// LC tank resonating at omega whose impedance ratio matches |V_i| / |I_i|:
/// L = |V| / (omega |I|), C = |I| / (omega |V|).
inline TankValues equivalent_lc(const NetworkState& state, std::size_t i, double omega) {
  if (!(omega > 0.0)) throw DomainError("equivalent_lc needs omega > 0");
  const double v = std::abs(state[i].v);
  const double c = std::abs(state[i].i);
  if (v < 1e-12 || c < 1e-12)
    throw NotResonantNode("node " + std::to_string(i) + " is floating or short-circuited");
  return {v / (omega * c), c / (omega * v)};
}

}  // namespace rgt

#endif  // RGT_POWER_HPP
