#ifndef DUALCAST_DUAL_HPP
#define DUALCAST_DUAL_HPP

#include <cstdint>
#include <vector>

#include "dualcast/utility.hpp"

namespace dualcast {

// One allocation problem: maximize the sum of user utilities subject to the
// shared capacity Q and the per-user boxes. Construction validates
// well-posedness (sum m_i <= Q <= sum M_i, N >= 1, unique ids) and stores
// users sorted by ascending id; every aggregation over users follows that
// order with a single accumulator so trajectories are bit-reproducible.
// Immutable after construction; all free functions below are pure and safe
// to call concurrently.
class ProblemInstance {
 public:
  ProblemInstance(std::vector<UserProfile> users, double Q);

  const std::vector<UserProfile>& users() const { return users_; }
  int size() const { return static_cast<int>(users_.size()); }
  double capacity() const { return Q_; }

  // Instance-wide curvature: mu = min over users of mu_i on [m_i, M_i],
  // lsmooth = max over users of lsmooth_i.
  double mu() const { return mu_; }
  double lsmooth() const { return lsmooth_; }

  double sum_lower() const { return sum_m_; }
  double sum_upper() const { return sum_M_; }
  Price max_p_hi() const { return max_p_hi_; }

 private:
  std::vector<UserProfile> users_;
  double Q_;
  double mu_;
  double lsmooth_;
  double sum_m_;
  double sum_M_;
  Price max_p_hi_;
};

// Total demand at price p, summed in ascending user-id order.
Power aggregate_demand(const ProblemInstance& instance, Price p);

// Gradient of the dual function: Q - sum_i demand_i(p). Nondecreasing in p;
// this is exactly what the supplier measures after a broadcast.
double dual_gradient(const ProblemInstance& instance, Price p);

// Dual function value: sum_i U_i(q_i(p)) - p * (sum_i q_i(p) - Q).
// Convex in p.
double dual_value(const ProblemInstance& instance, Price p);

// Per-user share of the dual: D_i(p) = U_i(q_i(p)) - p*q_i(p) + p*Q/N.
// The shares sum to dual_value up to accumulation error. On [0, p_lo_i] the
// derivative is constant Q/N - M_i, on [p_hi_i, inf) constant Q/N - m_i.
double dual_component(const UserProfile& user, double Q, int N, Price p);

// The largest step size that preserves primal feasibility when starting at
// or above the optimal price: mu/N with the instance-wide mu.
double max_feasible_step(const ProblemInstance& instance);

enum class StepMode {
  // gamma = mu/N; feasible from p0 >= optimal price, fastest such rate.
  kFeasibleOptimal,
  // explicit gamma in (0, mu/N]; same feasibility guarantee.
  kFeasibleCustom,
  // explicit gamma in (0, 2mu/N): converges but may overshoot into
  // infeasible aggregates. Callers opt in explicitly.
  kConvergentOnlyCustom,
};

// Step-size rule; resolve() validates the mode's window against an instance
// and returns the concrete gamma.
struct StepSizePolicy {
  StepMode mode = StepMode::kFeasibleOptimal;
  double gamma = 0.0;  // used by the custom modes

  static StepSizePolicy feasible_optimal() { return {}; }
  static StepSizePolicy feasible_custom(double g) {
    return {StepMode::kFeasibleCustom, g};
  }
  static StepSizePolicy convergent_only(double g) {
    return {StepMode::kConvergentOnlyCustom, g};
  }

  double resolve(const ProblemInstance& instance) const;
};

// Price iterate: current broadcast price (kept >= 0 by projection) and the
// iteration counter.
struct DualState {
  Price p = 0.0;
  std::int64_t t = 0;
};

// Projected dual-descent update: p <- max(0, p - gamma * gradient),
// t <- t + 1. gamma must be positive.
DualState price_step(DualState state, double gradient, double gamma);

}  // namespace dualcast

#endif  // DUALCAST_DUAL_HPP
