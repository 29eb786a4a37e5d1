#ifndef RGT_SCHEDULE_HPP
#define RGT_SCHEDULE_HPP

#include <cmath>
#include <string>
#include <variant>

#include "rgt/error.hpp"

namespace rgt {

namespace detail {
template <class... F>
struct Overload : F... {
  using F::operator()...;
};
template <class... F>
Overload(F...) -> Overload<F...>;
}  // namespace detail

/// Time-dependent regularization weight beta(t).
class BetaSchedule {
 public:
  struct Constant {
    double beta = 1.0;
  };
  /// beta_min + (beta_max - beta_min) / (1 + exp(-k (t + t0)))
  struct Logistic {
    double beta_min = 0.0;
    double beta_max = 1.0;
    double k = 20.0;
    double t0 = -0.5;
  };
  struct Switching {
    double beta_min = 0.0;
    double beta_max = 1.0;
    double t_switch = 0.3;
  };
  using Kind = std::variant<Constant, Logistic, Switching>;

  static constexpr double kDefaultStart = 0.1;

  BetaSchedule() : BetaSchedule(Constant{}) {}
  explicit BetaSchedule(Kind kind, double start_time = kDefaultStart)
      : kind_(kind), start_(start_time) {
    validate();
  }

  static BetaSchedule constant(double beta, double start_time = kDefaultStart) {
    return BetaSchedule(Constant{beta}, start_time);
  }
  static BetaSchedule logistic(double beta_min, double beta_max, double k, double t0,
                               double start_time = kDefaultStart) {
    return BetaSchedule(Logistic{beta_min, beta_max, k, t0}, start_time);
  }
  static BetaSchedule switching(double beta_min, double beta_max, double t_switch,
                                double start_time = kDefaultStart) {
    return BetaSchedule(Switching{beta_min, beta_max, t_switch}, start_time);
  }

  const Kind& kind() const noexcept { return kind_; }
  double start_time() const noexcept { return start_; }

  std::string name() const {
    return std::visit(detail::Overload{[](const Constant&) { return std::string("constant"); },
                               [](const Logistic&) { return std::string("logistic"); },
                               [](const Switching&) { return std::string("switching"); }},
                      kind_);
  }

  double beta_min() const {
    return std::visit(detail::Overload{[](const Constant&) { return 0.0; },
                               [](const Logistic& l) { return l.beta_min; },
                               [](const Switching& s) { return s.beta_min; }},
                      kind_);
  }

  double beta_max() const {
    return std::visit(detail::Overload{[](const Constant& c) { return c.beta; },
                               [](const Logistic& l) { return l.beta_max; },
                               [](const Switching& s) { return s.beta_max; }},
                      kind_);
  }

  double beta_at(double t) const {
    return std::visit(
        detail::Overload{[&](const Constant& c) { return t >= start_ ? c.beta : 0.0; },
                 [&](const Logistic& l) {
                   if (t < start_) return l.beta_min;
                   double s = 1.0 / (1.0 + std::exp(-l.k * (t + l.t0)));
                   return l.beta_min + (l.beta_max - l.beta_min) * s;
                 },
                 [&](const Switching& s) {
                   return (t >= start_ && t >= s.t_switch) ? s.beta_max : s.beta_min;
                 }},
        kind_);
  }

  /// True once beta(t) has reached its final value (logistic: within 1e-9 relative).
  bool settled(double t) const {
    return std::visit(detail::Overload{[&](const Constant&) { return t >= start_; },
                               [&](const Logistic& l) {
                                 double span = l.beta_max - l.beta_min;
                                 return t >= start_ && l.beta_max - beta_at(t) <= 1e-9 * span;
                               },
                               [&](const Switching& s) { return t >= start_ && t >= s.t_switch; }},
                      kind_);
  }

 private:
  void validate() const {
    if (!std::isfinite(start_)) throw DomainError("schedule start_time must be finite");
    std::visit(detail::Overload{[](const Constant& c) {
                          if (!(c.beta >= 0.0) || !std::isfinite(c.beta))
                            throw DomainError("constant beta must be finite and >= 0");
                        },
                        [](const Logistic& l) {
                          if (!(0.0 <= l.beta_min && l.beta_min <= l.beta_max) ||
                              !std::isfinite(l.beta_max))
                            throw DomainError("logistic schedule needs 0 <= beta_min <= beta_max");
                          if (!(l.k > 0.0) || !std::isfinite(l.t0))
                            throw DomainError("logistic schedule needs k > 0 and finite t0");
                        },
                        [](const Switching& s) {
                          if (!(0.0 <= s.beta_min && s.beta_min <= s.beta_max) ||
                              !std::isfinite(s.beta_max) || !std::isfinite(s.t_switch))
                            throw DomainError("switching schedule needs 0 <= beta_min <= beta_max");
                        }},
               kind_);
  }

  Kind kind_;
  double start_;
};

}  // namespace rgt

#endif  // RGT_SCHEDULE_HPP
