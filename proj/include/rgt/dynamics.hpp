#ifndef RGT_DYNAMICS_HPP
#define RGT_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rgt/error.hpp"
#include "rgt/objective.hpp"
#include "rgt/phasor.hpp"
#include "rgt/power.hpp"
#include "rgt/random.hpp"
#include "rgt/schedule.hpp"

namespace rgt {

enum class Mode { Discrete, Continuous };

/// Selection of the growth-transform multipliers.
///
/// The mass multiplier is shared by every node of the network:
///   lambda >= max(0, max_i max(dL/d|V_i|^2, dL/d|I_i|^2)) + margin.
/// A step that would raise L (or that the cost refuses) is retried with
/// lambda multiplied by `growth`; the accepted value, scaled by `relax`, is the
/// starting point of the next step.
///
/// Each phase phi_i lives on its own two-point simplex (phi+ + phi- = pi), so
/// it gets its own multiplier
///   lambda_phi_i = phase_gain * max(|dL/dphi_i|, beta |V_i|^2 |I_i|^2).
/// phase_gain >= 3 keeps the phase update a descent step for any relaxation in (0, 1].
struct LambdaPolicy {
  double margin = 1.0;
  double phase_gain = 4.0;
  double growth = 2.0;
  double relax = 0.5;
  int max_backtracks = 80;
};

/// Extra angular rates applied to the phasors. All zero is the plain system.
struct PhaseRates {
  double global = 0.0;           ///< added to both voltage and current rates
  std::vector<double> voltage;   ///< per node, empty means zero
  std::vector<double> current;   ///< per node, empty means zero
};

struct SolverConfig {
  std::vector<double> omega{0.0};  ///< per subgroup; one entry applies to all
  LambdaPolicy lambda;
  std::vector<double> tau{1.0};    ///< per node; one entry applies to all
  double dt = 1.0;
  std::size_t max_steps = 10000;
  double tol_cost = 1e-10;
  std::size_t quiet_steps = 10;
  double dissipation_tol = 1e-3;
  Mode mode = Mode::Discrete;
  PhaseRates rates;

  double omega_for(std::size_t group) const { return omega.size() == 1 ? omega[0] : omega[group]; }
  double tau_for(std::size_t node) const { return tau.size() == 1 ? tau[0] : tau[node]; }
};

namespace detail {
inline double rate_at(const std::vector<double>& r, std::size_t k) { return r.empty() ? 0.0 : r[k]; }
}  // namespace detail

inline void validate(const SolverConfig& cfg, const NetworkState& state) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("solver.dt", "must be > 0");
  if (cfg.omega.size() != 1 && cfg.omega.size() != state.groups().size())
    throw ConfigError("solver.omega", "needs one entry or one per subgroup");
  if (cfg.tau.size() != 1 && cfg.tau.size() != state.size())
    throw ConfigError("solver.tau", "needs one entry or one per node");
  for (double t : cfg.tau)
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("solver.tau", "must be > 0");
  if (cfg.dt > *std::min_element(cfg.tau.begin(), cfg.tau.end()))
    throw ConfigError("solver.dt", "must not exceed the phase time-constant tau");
  if (!(cfg.lambda.margin > 0.0)) throw ConfigError("solver.lambda_margin", "must be > 0");
  if (!(cfg.lambda.phase_gain >= 3.0)) throw ConfigError("solver.phase_gain", "must be >= 3");
  if (!(cfg.lambda.growth > 1.0)) throw ConfigError("solver.lambda_growth", "must be > 1");
  for (const auto* r : {&cfg.rates.voltage, &cfg.rates.current})
    if (!r->empty() && r->size() != state.size())
      throw ConfigError("solver.rates", "per-node rates need one entry per node");
  double max_rate = 0.0;
  for (std::size_t g = 0; g < state.groups().size(); ++g)
    max_rate = std::max(max_rate, std::abs(cfg.omega_for(g)));
  max_rate += std::abs(cfg.rates.global);
  double extra = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k)
    extra = std::max(extra, std::abs(detail::rate_at(cfg.rates.voltage, k)) +
                                std::abs(detail::rate_at(cfg.rates.current, k)));
  if (cfg.mode == Mode::Continuous) {
    if (cfg.dt > 1.0) throw ConfigError("solver.dt", "continuous mode needs dt <= 1");
    if (cfg.dt * (max_rate + extra) >= 0.1)
      throw ConfigError("solver.dt", "continuous mode needs dt * omega < 0.1");
  }
}

/// Property 2: adds a global phase rate to both phasors of every node.
inline SolverConfig apply_global_phase(SolverConfig cfg, double rate) {
  cfg.rates.global += rate;
  return cfg;
}

/// Property 3: independent per-node voltage and current phase rates.
inline SolverConfig apply_relative_phase(SolverConfig cfg, std::vector<double> voltage_rates,
                                         std::vector<double> current_rates) {
  cfg.rates.voltage = std::move(voltage_rates);
  cfg.rates.current = std::move(current_rates);
  return cfg;
}

struct StepReport {
  NetworkState state;
  double cost = 0.0;         ///< L after the step
  double cost_before = 0.0;  ///< L before the step, same beta
  double loss = 0.0;         ///< H + h Psi after the step
  double dissipation = 0.0;  ///< D after the step
  double sigma_min = 1.0;
  double sigma_max = 1.0;
  double lambda_used = 0.0;
  int backtracks = 0;
  bool mass_frozen = false;  ///< no lambda gave descent; only phases moved
  std::size_t step_index = 0;
  double time = 0.0;
};

// ---------------------------------------------------------------------------
// Multipliers

inline double compute_lambda(const Gradient& g, double margin) {
  double m = 0.0;
  for (std::size_t k = 0; k < g.v2.size(); ++k) {
    if (!std::isfinite(g.v2[k]) || !std::isfinite(g.i2[k]) || !std::isfinite(g.phi[k]))
      throw NonFiniteGradient("non-finite gradient at node " + std::to_string(k));
    m = std::max({m, g.v2[k], g.i2[k]});
  }
  return m + margin;
}

template <Objective O>
double compute_lambda(const O& obj, const NetworkState& state, const LambdaPolicy& policy) {
  return compute_lambda(obj.evaluate(state).grad, policy.margin);
}

/// eta_k = sum over subgroup k of |V|^2 (-dL/d|V|^2 + lambda) + |I|^2 (-dL/d|I|^2 + lambda).
inline std::vector<double> group_eta(const NetworkState& state, const Gradient& g, double lambda) {
  std::vector<double> eta(state.groups().size(), 0.0);
  for (std::size_t grp = 0; grp < eta.size(); ++grp) {
    double s = 0.0;
    for (std::size_t k : state.groups()[grp].nodes)
      s += magnitude2(state[k].v) * (lambda - g.v2[k]) + magnitude2(state[k].i) * (lambda - g.i2[k]);
    if (!(s > 0.0)) throw DegenerateEta("eta <= 0 in subgroup " + std::to_string(grp));
    eta[grp] = s;
  }
  return eta;
}

/// Real mass-domain form of the growth factors: sigma^2 = (-dL/dmass + lambda) / eta.
inline std::pair<double, double> sigma(const Gradient& g, std::size_t i, double lambda, double eta) {
  const double sv = (lambda - g.v2[i]) / eta;
  const double si = (lambda - g.i2[i]) / eta;
  if (!(sv > 0.0) || !(si > 0.0)) throw DegenerateEta("lambda does not keep the growth factors positive");
  return {std::sqrt(sv), std::sqrt(si)};
}

template <Objective O>
std::pair<double, double> sigma(const O& obj, const NetworkState& state, std::size_t i, double lambda) {
  const Gradient g = obj.evaluate(state).grad;
  const auto owner = state.group_of();
  const auto eta = group_eta(state, g, lambda);
  return sigma(g, i, lambda, eta[owner.at(i)]);
}

/// Multiplier of the two-point phase simplex of one node.
inline double phase_lambda(double dphi, double v2, double i2, double beta, double gain) {
  return gain * std::max(std::abs(dphi), beta * v2 * i2) + std::numeric_limits<double>::min();
}

/// g_phi = pi (lambda phi - pi dL/dphi) / (lambda pi - phi dL/dphi).
inline double phase_target(double phi, double dphi, double lambda) {
  return kPi * (lambda * phi - kPi * dphi) / (lambda * kPi - phi * dphi);
}

inline double clamp_phase(double phi) { return std::clamp(phi, -kPi, kPi); }

/// First-order relaxation of phi_i toward g_phi with the given multiplier.
template <Objective O>
double phase_step(const O& obj, const NetworkState& state, std::size_t i, const SolverConfig& cfg,
                  double lambda) {
  const double dphi = obj.evaluate(state).grad.phi.at(i);
  if (!(lambda > std::abs(dphi)))
    throw DomainError("phase multiplier must exceed |dL/dphi|");
  const double phi = state[i].phi;
  return clamp_phase(phi + cfg.dt / cfg.tau_for(i) * (phase_target(phi, dphi, lambda) - phi));
}

/// Same, with the per-node phase multiplier of the policy.
template <Objective O>
double phase_step(const O& obj, const NetworkState& state, std::size_t i, const SolverConfig& cfg) {
  const double dphi = obj.evaluate(state).grad.phi.at(i);
  const double lam = phase_lambda(dphi, magnitude2(state[i].v), magnitude2(state[i].i), obj.beta(),
                                  cfg.lambda.phase_gain);
  return phase_step(obj, state, i, cfg, lam);
}

// ---------------------------------------------------------------------------
// Steps

namespace detail {

struct Advance {
  StepReport report;
  Evaluation after;
};

/// Candidate state for growth factors (sv, si) and new phases.
inline NetworkState move(const NetworkState& state, const std::vector<double>& sv,
                         const std::vector<double>& si, const std::vector<double>& phi_new,
                         const SolverConfig& cfg, const std::vector<std::size_t>& owner) {
  NetworkState next = state;
  const double dt = cfg.dt;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const NodeState& n = state[k];
    NodeState& m = next[k];
    const double dphi = phi_new[k] - n.phi;
    if (cfg.mode == Mode::Discrete) {
      m.v = n.v * sv[k];
      m.i = n.i * si[k] * std::polar(1.0, dphi);
    } else {
      const double wv = cfg.omega_for(owner[k]) + cfg.rates.global + rate_at(cfg.rates.voltage, k);
      const double rot_v = dt * wv * sv[k];
      const double rel = dphi + dt * (rate_at(cfg.rates.current, k) - rate_at(cfg.rates.voltage, k));
      m.v = n.v * ((1.0 - dt * (1.0 - sv[k])) * std::polar(1.0, rot_v));
      m.i = n.i * ((1.0 - dt * (1.0 - si[k])) * std::polar(1.0, rot_v + rel));
    }
    m.phi = phi_new[k];
  }
  return next;
}

template <Objective O>
Advance advance(const O& obj, const NetworkState& state, const Evaluation& before,
                const SolverConfig& cfg, double lambda_hint) {
  const std::size_t n = state.size();
  const Gradient& g = before.grad;
  const LambdaPolicy& pol = cfg.lambda;
  const auto owner = state.group_of();

  std::vector<double> phi_new(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = state[k].phi;
    const double lam = phase_lambda(g.phi[k], magnitude2(state[k].v), magnitude2(state[k].i),
                                    obj.beta(), pol.phase_gain);
    phi_new[k] = clamp_phase(phi + cfg.dt / cfg.tau_for(k) * (phase_target(phi, g.phi[k], lam) - phi));
  }

  const double floor = compute_lambda(g, pol.margin);
  double lambda = std::max(floor, lambda_hint * pol.relax);
  const double slack = 1e-13 * (1.0 + std::abs(before.value));

  const std::vector<MassPair> from = mass_vector(state);
  std::vector<double> sv(n), si(n);
  for (int attempt = 0; attempt <= pol.max_backtracks; ++attempt, lambda *= pol.growth) {
    const auto eta = group_eta(state, g, lambda);
    for (std::size_t k = 0; k < n; ++k) std::tie(sv[k], si[k]) = sigma(g, k, lambda, eta[owner[k]]);
    NetworkState cand = move(state, sv, si, phi_new, cfg, owner);
    if constexpr (requires { obj.admissible(std::span<const MassPair>{}, std::span<const MassPair>{}); }) {
      if (!obj.admissible(from, mass_vector(cand))) continue;
    } else if constexpr (requires { obj.feasible(std::span<const MassPair>{}); }) {
      if (!obj.feasible(mass_vector(cand))) continue;
    }
    Evaluation ev = obj.evaluate(cand);
    if (!(ev.value <= before.value + slack)) continue;

    Advance out;
    auto [smin, smax] = std::minmax_element(sv.begin(), sv.end());
    auto [tmin, tmax] = std::minmax_element(si.begin(), si.end());
    out.report.sigma_min = std::min(*smin, *tmin);
    out.report.sigma_max = std::max(*smax, *tmax);
    out.report.lambda_used = lambda;
    out.report.backtracks = attempt;
    out.report.state = renormalize(std::move(cand));
    out.after = std::move(ev);
    return out;
  }

  // No multiplier gave descent: hold the masses, move the phases if that helps.
  std::fill(sv.begin(), sv.end(), 1.0);
  std::fill(si.begin(), si.end(), 1.0);
  Advance out;
  out.report.mass_frozen = true;
  out.report.lambda_used = lambda;
  out.report.backtracks = pol.max_backtracks + 1;
  NetworkState cand = move(state, sv, si, phi_new, cfg, owner);
  Evaluation ev = obj.evaluate(cand);
  if (ev.value <= before.value + slack) {
    out.report.state = renormalize(std::move(cand));
    out.after = std::move(ev);
  } else {
    out.report.state = state;
    out.after = before;
  }
  return out;
}

template <Objective O>
StepReport finish(Advance&& a, const Evaluation& before) {
  StepReport r = std::move(a.report);
  r.cost_before = before.value;
  r.cost = a.after.value;
  r.loss = a.after.cost;
  r.dissipation = a.after.dissipation;
  return r;
}

}  // namespace detail

/// One growth-transform step on the masses: |V|^2 <- |V|^2 sigma_V^2 (and
/// likewise for currents), phases relaxed toward g_phi. Phasor angles are not
/// rotated.
template <Objective O>
StepReport discrete_step(const O& obj, const NetworkState& state, SolverConfig cfg,
                         double lambda_hint = 0.0) {
  cfg.mode = Mode::Discrete;
  validate(cfg, state);
  const Evaluation before = obj.evaluate(state);
  return detail::finish<O>(detail::advance(obj, state, before, cfg, lambda_hint), before);
}

/// One explicit step of the phasor ODE
///   dV/dt = j omega sigma_V V - (1 - sigma_V) V
///   dI/dt = j (omega + omega_phi) sigma_I I - (1 - sigma_I) I
/// taken in polar form: magnitudes by forward Euler, angles by exact rotation.
/// The current keeps its angle offset phi_i from the voltage.
template <Objective O>
StepReport continuous_step(const O& obj, const NetworkState& state, SolverConfig cfg,
                           double lambda_hint = 0.0) {
  cfg.mode = Mode::Continuous;
  validate(cfg, state);
  const Evaluation before = obj.evaluate(state);
  return detail::finish<O>(detail::advance(obj, state, before, cfg, lambda_hint), before);
}

// ---------------------------------------------------------------------------
// Driver

/// Per-step record handed to trace consumers.
struct TraceRecord {
  std::size_t step = 0;
  double time = 0.0;
  double beta = 0.0;
  double loss = 0.0;         ///< H (+ h Psi)
  double dissipation = 0.0;  ///< D
  double value = 0.0;        ///< L
  double lambda = 0.0;
  PowerReport power;
  const NetworkState* state = nullptr;
};

struct SolveResult {
  StepReport final;
  bool converged = false;
  bool max_steps_exceeded = false;
  std::size_t steps = 0;
  std::vector<std::size_t> zero_mass_nodes;
};

/// Runs the configured dynamics under the beta schedule until L is stationary
/// (|dL| < tol_cost for quiet_steps consecutive steps, schedule settled and,
/// when beta > 0, sum |V||I||cos phi| < dissipation_tol) or max_steps.
template <Objective O, class Sink>
SolveResult solve(const O& obj, NetworkState initial, const SolverConfig& cfg,
                  const BetaSchedule& schedule, Sink&& sink) {
  validate(cfg, initial);
  NetworkState state = renormalize(std::move(initial));

  auto emit = [&](std::size_t step, double t, double beta, const Evaluation& ev, double lambda) {
    TraceRecord rec;
    rec.step = step;
    rec.time = t;
    rec.beta = beta;
    rec.loss = ev.cost;
    rec.dissipation = ev.dissipation;
    rec.value = ev.value;
    rec.lambda = lambda;
    rec.power = power_report(state);
    rec.state = &state;
    sink(static_cast<const TraceRecord&>(rec));
  };

  SolveResult res;
  double beta = schedule.beta_at(0.0);
  O current = obj.with_beta(beta);
  Evaluation ev = current.evaluate(state);
  emit(0, 0.0, beta, ev, 0.0);

  double hint = 0.0;
  std::size_t quiet = 0;
  for (std::size_t step = 0; step < cfg.max_steps; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    const double b = schedule.beta_at(t);
    if (b != beta) {
      beta = b;
      current = obj.with_beta(beta);
      ev = current.evaluate(state);
    }
    detail::Advance a = detail::advance(current, state, ev, cfg, hint);
    const double before = ev.value;
    state = std::move(a.report.state);
    ev = std::move(a.after);
    hint = a.report.lambda_used;

    a.report.cost_before = before;
    a.report.cost = ev.value;
    a.report.loss = ev.cost;
    a.report.dissipation = ev.dissipation;
    a.report.step_index = step + 1;
    a.report.time = t + cfg.dt;
    res.final = std::move(a.report);
    res.steps = step + 1;

    emit(step + 1, t + cfg.dt, beta, ev, hint);

    quiet = std::abs(before - ev.value) < cfg.tol_cost ? quiet + 1 : 0;
    if (quiet >= cfg.quiet_steps && schedule.settled(t)) {
      const bool quiet_power = beta == 0.0 || power_report(state).total_active_abs < cfg.dissipation_tol;
      if (quiet_power) {
        res.converged = true;
        break;
      }
    }
  }
  res.final.state = state;
  res.max_steps_exceeded = !res.converged;
  for (std::size_t k = 0; k < state.size(); ++k)
    if (state[k].mass() == 0.0) res.zero_mass_nodes.push_back(k);
  return res;
}

template <Objective O>
SolveResult solve(const O& obj, NetworkState initial, const SolverConfig& cfg,
                  const BetaSchedule& schedule) {
  return solve(obj, std::move(initial), cfg, schedule, [](const TraceRecord&) {});
}

// ---------------------------------------------------------------------------
// Initialization

/// Draws phi uniformly from [-pi, pi] with (-1e-3, 1e-3) excluded: phi = 0 is
/// an unstable fixed point of the phase update.
inline double random_phase(Rng& rng) {
  for (;;) {
    double phi = rng.uniform(-kPi, kPi);
    if (std::abs(phi) >= 1e-3) return phi;
  }
}

/// Random feasible state: node masses uniform then normalized per subgroup,
/// random voltage angle, current at voltage angle + phi.
inline NetworkState random_state(std::size_t n, Rng& rng) {
  std::vector<NodeState> nodes(n);
  std::vector<double> raw(2 * n);
  double sum = 0.0;
  for (double& r : raw) sum += (r = rng.uniform(1e-3, 1.0));
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = rng.uniform(-kPi, kPi);
    nodes[k] = make_node(raw[2 * k] / sum, raw[2 * k + 1] / sum, random_phase(rng), theta);
  }
  return renormalize(NetworkState::unchecked(std::move(nodes), {Subgroup{[n] {
                                                 std::vector<std::size_t> all(n);
                                                 for (std::size_t k = 0; k < n; ++k) all[k] = k;
                                                 return all;
                                               }()}}));
}

/// Same over an explicit subgroup partition.
inline NetworkState random_state(std::vector<Subgroup> groups, std::size_t n, Rng& rng) {
  std::vector<NodeState> nodes(n);
  for (std::size_t k = 0; k < n; ++k)
    nodes[k] = make_node(rng.uniform(1e-3, 1.0), rng.uniform(1e-3, 1.0), random_phase(rng),
                         rng.uniform(-kPi, kPi));
  return renormalize(NetworkState::unchecked(std::move(nodes), std::move(groups)));
}

}  // namespace rgt

#endif  // RGT_DYNAMICS_HPP
