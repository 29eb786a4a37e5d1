#ifndef RGT_TOOLS_VERIFY_HPP
#define RGT_TOOLS_VERIFY_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "rgt/rgt.hpp"

namespace rgt::cli {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  bool corrupt_gradient = false;  ///< negative control: perturb one analytic partial
};

namespace detail {

inline OcsvmProblem small_svm(std::uint64_t seed, int n, std::optional<double> h = std::nullopt) {
  Rng r(seed);
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = r.normal();
  return OcsvmProblem(x, 0.2, {1.0}, h);
}

template <Objective O>
double worst_fd(const O& obj, std::size_t n, std::uint64_t seed, int samples) {
  Rng r(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    NetworkState st = random_state(n, r);
    worst = std::max(worst, finite_diff_check(obj, st).max_error);
  }
  return worst;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/// Oracle and invariant suites, oracles first.
inline std::vector<SuiteResult> run_verify(const VerifyOptions& opt) {
  std::vector<SuiteResult> out;
  auto record = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };

  {  // finite_diff_check on every objective
    double worst = 0.0;
    if (opt.corrupt_gradient) {
      worst = std::max(worst, detail::worst_fd(CorruptedGradient(quadratic_multi(4, 1.0), 0), 4, 11, 20));
    } else {
      worst = std::max(worst, detail::worst_fd(quadratic_single(1.0), 1, 11, 20));
      worst = std::max(worst, detail::worst_fd(quadratic_multi(4, 1.0), 4, 12, 20));
    }
    const OcsvmProblem p = detail::small_svm(13, 10);
    Rng r(14);
    const auto obj = build_objective(p, 1.0);
    for (int s = 0; s < 20; ++s) worst = std::max(worst, finite_diff_check(obj, ocsvm_initial_state(10, r)).max_error);
    record("finite_diff_check", worst < 1e-6, "max rel error " + detail::fmt(worst));
  }

  {  // grid oracle against the solver on the single-node quadratic
    const auto obj = quadratic_single(1.0);
    const GridResult g = grid_minimize(obj, 1);
    SolverConfig cfg;
    cfg.mode = Mode::Discrete;
    Rng r(21);
    const SolveResult s = solve(obj, random_state(1, r), cfg, BetaSchedule::constant(1.0, 0.0));
    const double l = obj.evaluate(s.final.state).value;
    record("grid_minimize", std::abs(g.value - l) < 1e-4 && s.converged,
           "grid " + detail::fmt(g.value) + " solver " + detail::fmt(l));
  }

  {  // QP oracle against training
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const OcsvmProblem p = detail::small_svm(30 + k, 6 + 3 * k, 1e-9);
      SolverConfig cfg;
      cfg.mode = Mode::Discrete;
      cfg.max_steps = 1000000;
      cfg.tol_cost = 1e-15;
      const TrainResult t = train(p, cfg, BetaSchedule::constant(0.0, 0.0), k);
      const QpResult q = projected_gradient_qp(p);
      const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(t.model.alphas.data(), p.size());
      worst = std::max(worst, std::abs(0.5 * a.dot(p.gram().apply(a)) - q.value) / q.value);
    }
    record("projected_gradient_qp", worst < 1e-4, "max rel gap " + detail::fmt(worst));
  }

  {  // monotone descent, conservation, phase attractors
    double rise = 0.0, residual = 0.0, phase_dev = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto obj = quadratic_multi(2 + k % 4, 1.0);
      Rng r(100 + k);
      SolverConfig cfg;
      cfg.mode = Mode::Discrete;
      double prev = std::numeric_limits<double>::infinity();
      const SolveResult s = solve(obj, random_state(obj.cost().nodes(), r), cfg, BetaSchedule::constant(1.0, 0.0),
                                  [&](const TraceRecord& t) {
                                    rise = std::max(rise, t.value - prev);
                                    prev = t.value;
                                    residual = std::max(residual, t.power.conservation_residual);
                                  });
      for (const auto& n : s.final.state.nodes())
        if (std::abs(n.v) * std::abs(n.i) > 1e-6)
          phase_dev = std::max(phase_dev, std::min(std::abs(n.phi - kPi / 2), std::abs(n.phi + kPi / 2)));
    }
    record("monotone_descent", rise <= 1e-10, "max rise " + detail::fmt(rise));
    record("conservation", residual < 1e-9, "max residual " + detail::fmt(residual));
    record("phase_attractors", phase_dev < 1e-3, "max deviation " + detail::fmt(phase_dev));
  }
  return out;
}

inline bool print_verify(const std::vector<SuiteResult>& results, double seconds, std::ostream& os) {
  bool ok = true;
  for (const auto& r : results) {
    os << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
    ok = ok && r.pass;
  }
  if (seconds > 120.0) os << "warning: verify took " << detail::fmt(seconds) << " s (budget 120 s)\n";
  return ok;
}

}  // namespace rgt::cli

#endif  // RGT_TOOLS_VERIFY_HPP
