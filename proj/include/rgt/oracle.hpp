#ifndef RGT_ORACLE_HPP
#define RGT_ORACLE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rgt/error.hpp"
#include "rgt/objective.hpp"
#include "rgt/ocsvm.hpp"
#include "rgt/phasor.hpp"

namespace rgt {

// ---------------------------------------------------------------------------
// Exhaustive grid search

struct GridOptions {
  std::size_t resolution = 200;        ///< mass lattice step 1/resolution
  std::size_t phase_resolution = 200;  ///< phi in {-pi + 2 pi k / phase_resolution}
};

struct GridResult {
  NetworkState state;
  double value = std::numeric_limits<double>::infinity();
};

/// Scans the mass simplex lattice times the phase grid for one or two nodes
/// under the global constraint. Points outside the objective's domain are skipped.
template <Objective O>
GridResult grid_minimize(const O& obj, std::size_t n_nodes, GridOptions opt = {}) {
  if (n_nodes < 1 || n_nodes > 2) throw DomainError("grid_minimize supports 1 or 2 nodes");
  if (opt.resolution < 1 || opt.phase_resolution < 1) throw DomainError("grid resolution must be >= 1");
  const double res = static_cast<double>(opt.resolution);
  std::vector<double> phis(opt.phase_resolution);
  for (std::size_t k = 0; k < phis.size(); ++k)
    phis[k] = -kPi + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(opt.phase_resolution);

  GridResult best;
  auto consider = [&](std::vector<NodeState> nodes) {
    NetworkState s = NetworkState::unchecked(std::move(nodes), {Subgroup{n_nodes == 1 ? std::vector<std::size_t>{0}
                                                                                      : std::vector<std::size_t>{0, 1}}});
    if constexpr (requires { obj.feasible(std::span<const MassPair>{}); }) {
      if (!obj.feasible(mass_vector(s))) return;
    }
    const double v = obj.evaluate(s).value;
    if (v < best.value) {
      best.value = v;
      best.state = std::move(s);
    }
  };

  const std::size_t r = opt.resolution;
  if (n_nodes == 1) {
    for (std::size_t a = 0; a <= r; ++a)
      for (double phi : phis) {
        const double v2 = static_cast<double>(a) / res;
        consider({make_node(v2, 1.0 - v2, phi)});
      }
  } else {
    for (std::size_t a1 = 0; a1 <= r; ++a1)
      for (std::size_t b1 = 0; a1 + b1 <= r; ++b1)
        for (std::size_t a2 = 0; a1 + b1 + a2 <= r; ++a2) {
          const std::size_t b2 = r - a1 - b1 - a2;
          for (double p1 : phis)
            for (double p2 : phis)
              consider({make_node(static_cast<double>(a1) / res, static_cast<double>(b1) / res, p1),
                        make_node(static_cast<double>(a2) / res, static_cast<double>(b2) / res, p2)});
        }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Reference QP for the one-class dual

/// Euclidean projection onto {x : sum x = 1, 0 <= x_i <= bound}.
///
/// Solves sum_i clip(y_i - tau, 0, bound) = 1 exactly by sweeping the sorted
/// breakpoints y_i and y_i - bound, on which the left side is piecewise linear.
inline Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double bound) {
  const Eigen::Index n = y.size();
  if (!(bound * static_cast<double>(n) >= 1.0 - 1e-12)) throw DomainError("capped simplex is empty");
  struct Break {
    double at;
    int slope;  // change of d(sum)/d(-tau) when tau passes below `at`
  };
  std::vector<Break> br;
  br.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    br.push_back({y[i], +1});
    br.push_back({y[i] - bound, -1});
  }
  std::sort(br.begin(), br.end(), [](const Break& a, const Break& b) { return a.at > b.at; });

  double tau = br.front().at;
  double sum = 0.0;
  int slope = 0;
  for (const auto& b : br) {
    const double next = sum + slope * (tau - b.at);
    if (slope > 0 && next >= 1.0) {
      tau -= (1.0 - sum) / slope;
      sum = 1.0;
      break;
    }
    sum = next;
    tau = b.at;
    slope += b.slope;
  }
  if (sum < 1.0) tau -= slope > 0 ? (1.0 - sum) / slope : 0.0;
  return (y.array() - tau).cwiseMax(0.0).cwiseMin(bound).matrix();
}

struct QpOptions {
  std::size_t max_iterations = 200000;
  double tolerance = 1e-10;  ///< on the projected-gradient residual
};

struct QpResult {
  Eigen::VectorXd alphas;
  double value = 0.0;  ///< 1/2 a'Ka
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
};

/// max_i |a_i - P(a - Ka)_i|: zero exactly at the constrained minimiser.
inline double qp_kkt_residual(const Eigen::MatrixXd& k, const Eigen::VectorXd& a, double bound) {
  return (a - project_capped_simplex(a - k * a, bound)).cwiseAbs().maxCoeff();
}

/// min 1/2 a'Ka subject to sum a = 1, 0 <= a_i <= bound, by accelerated
/// projected gradient with adaptive restart and step 1/lambda_max(K).
inline QpResult projected_gradient_qp(const Eigen::MatrixXd& k, double bound, QpOptions opt = {}) {
  const Eigen::Index n = k.rows();
  if (n < 1 || k.cols() != n) throw DomainError("QP needs a square kernel matrix");
  if (n > 2000) throw DomainError("QP oracle is limited to N <= 2000");
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lmax, 1e-12);

  Eigen::VectorXd a = project_capped_simplex(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), bound);
  Eigen::VectorXd y = a, prev = a;
  double t = 1.0;
  double f = 0.5 * a.dot(k * a);
  QpResult r;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    prev = a;
    a = project_capped_simplex(y - step * (k * y), bound);
    const double fa = 0.5 * a.dot(k * a);
    if (fa > f) {  // restart momentum
      t = 1.0;
      y = prev;
      a = project_capped_simplex(y - step * (k * y), bound);
    }
    f = 0.5 * a.dot(k * a);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = a + ((t - 1.0) / tn) * (a - prev);
    t = tn;
    if (it % 16 == 0 || it == opt.max_iterations) {
      r.kkt_residual = qp_kkt_residual(k, a, bound);
      if (r.kkt_residual < opt.tolerance) {
        r.iterations = it;
        r.alphas = a;
        r.value = f;
        return r;
      }
    }
  }
  throw NoConvergence("projected_gradient_qp: KKT residual " + std::to_string(r.kkt_residual) +
                      " after " + std::to_string(opt.max_iterations) + " iterations");
}

/// The barrier-free reference for an SVM problem.
inline QpResult projected_gradient_qp(const OcsvmProblem& p, QpOptions opt = {}) {
  return projected_gradient_qp(p.gram().matrix(), p.upper_bound(), opt);
}

// ---------------------------------------------------------------------------
// Gradient check

struct FiniteDiffReport {
  double max_error = 0.0;  ///< max |analytic - central| / max(1, |analytic|, |central|)
  std::size_t node = 0;
  std::string partial;     ///< "v2", "i2" or "phi"
};

/// Compares every analytic partial with central differences of the value.
/// Masses are perturbed by rescaling the phasor magnitude, phases directly.
template <Objective O>
FiniteDiffReport finite_diff_check(const O& obj, const NetworkState& state, double step = 1e-6) {
  if (!(step > 0.0)) throw DomainError("finite_diff_check needs step > 0");
  const Gradient g = obj.evaluate(state).grad;
  FiniteDiffReport rep;
  auto value_with = [&](std::size_t k, int which, double delta) {
    NetworkState s = state;
    NodeState& n = s[k];
    if (which == 0) n.v = from_polar(std::sqrt(magnitude2(n.v) + delta), phase(n.v));
    if (which == 1) n.i = from_polar(std::sqrt(magnitude2(n.i) + delta), phase(n.i));
    if (which == 2) n.phi += delta;
    return obj.evaluate(s).value;
  };
  static constexpr const char* kNames[3] = {"v2", "i2", "phi"};
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double an[3] = {g.v2[k], g.i2[k], g.phi[k]};
    for (int which = 0; which < 3; ++which) {
      const double fd = (value_with(k, which, step) - value_with(k, which, -step)) / (2.0 * step);
      const double err = std::abs(an[which] - fd) / std::max({1.0, std::abs(an[which]), std::abs(fd)});
      if (err > rep.max_error || !std::isfinite(err)) {
        rep.max_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
        rep.node = k;
        rep.partial = kNames[which];
      }
    }
  }
  return rep;
}

/// Wraps an objective and adds `offset` to one analytic partial; the value is
/// untouched. Negative control for finite_diff_check.
template <Objective O>
class CorruptedGradient {
 public:
  CorruptedGradient(O inner, std::size_t node, double offset = 1.0)
      : inner_(std::move(inner)), node_(node), offset_(offset) {}

  double beta() const { return inner_.beta(); }
  CorruptedGradient with_beta(double b) const { return {inner_.with_beta(b), node_, offset_}; }
  Evaluation evaluate(const NetworkState& s) const {
    Evaluation ev = inner_.evaluate(s);
    ev.grad.v2.at(node_) += offset_;
    return ev;
  }

 private:
  O inner_;
  std::size_t node_;
  double offset_;
};

}  // namespace rgt

#endif  // RGT_ORACLE_HPP
