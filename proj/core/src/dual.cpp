#include "dualcast/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "dualcast/errors.hpp"

namespace dualcast {

ProblemInstance::ProblemInstance(std::vector<UserProfile> users, double Q)
    : users_(std::move(users)), Q_(Q) {
  if (users_.empty())
    throw std::invalid_argument("ProblemInstance: needs at least one user");
  if (!std::isfinite(Q_))
    throw std::invalid_argument("ProblemInstance: capacity must be finite");

  std::sort(users_.begin(), users_.end(),
            [](const UserProfile& a, const UserProfile& b) {
              return a.id() < b.id();
            });
  std::unordered_set<int> ids;
  for (const auto& u : users_) {
    if (!ids.insert(u.id()).second)
      throw std::invalid_argument("ProblemInstance: duplicate user id " +
                                  std::to_string(u.id()));
  }

  sum_m_ = 0.0;
  sum_M_ = 0.0;
  mu_ = users_.front().curvature().mu;
  lsmooth_ = users_.front().curvature().lsmooth;
  max_p_hi_ = users_.front().p_hi();
  for (const auto& u : users_) {
    sum_m_ += u.m();
    sum_M_ += u.M();
    mu_ = std::min(mu_, u.curvature().mu);
    lsmooth_ = std::max(lsmooth_, u.curvature().lsmooth);
    max_p_hi_ = std::max(max_p_hi_, u.p_hi());
  }
  if (!(sum_m_ <= Q_ && Q_ <= sum_M_))
    throw InfeasibleInstanceError(
        "ProblemInstance: capacity " + std::to_string(Q_) +
        " outside [sum of lower bounds, sum of upper bounds] = [" +
        std::to_string(sum_m_) + ", " + std::to_string(sum_M_) + "]");
}

Power aggregate_demand(const ProblemInstance& instance, Price p) {
  double total = 0.0;
  for (const auto& u : instance.users()) total += demand(u, p);
  return total;
}

double dual_gradient(const ProblemInstance& instance, Price p) {
  return instance.capacity() - aggregate_demand(instance, p);
}

double dual_value(const ProblemInstance& instance, Price p) {
  if (p < 0.0 || std::isnan(p))
    throw std::domain_error("dual_value: price must be >= 0");
  double utility_sum = 0.0;
  double demand_sum = 0.0;
  for (const auto& u : instance.users()) {
    const Power q = demand(u, p);
    utility_sum += u.utility().value(q);
    demand_sum += q;
  }
  return utility_sum - p * (demand_sum - instance.capacity());
}

double dual_component(const UserProfile& user, double Q, int N, Price p) {
  if (p < 0.0 || std::isnan(p))
    throw std::domain_error("dual_component: price must be >= 0");
  if (N < 1) throw std::invalid_argument("dual_component: N must be >= 1");
  const Power q = demand(user, p);
  return user.utility().value(q) - p * q + p * Q / N;
}

double max_feasible_step(const ProblemInstance& instance) {
  return instance.mu() / instance.size();
}

double StepSizePolicy::resolve(const ProblemInstance& instance) const {
  const double cap = max_feasible_step(instance);
  switch (mode) {
    case StepMode::kFeasibleOptimal:
      return cap;
    case StepMode::kFeasibleCustom:
      if (!(gamma > 0.0 && gamma <= cap))
        throw std::invalid_argument(
            "StepSizePolicy: feasible step must lie in (0, " +
            std::to_string(cap) + "], got " + std::to_string(gamma));
      return gamma;
    case StepMode::kConvergentOnlyCustom:
      if (!(gamma > 0.0 && gamma < 2.0 * cap))
        throw std::invalid_argument(
            "StepSizePolicy: convergent-only step must lie in (0, " +
            std::to_string(2.0 * cap) + "), got " + std::to_string(gamma));
      return gamma;
  }
  throw std::logic_error("StepSizePolicy: unknown mode");
}

DualState price_step(DualState state, double gradient, double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("price_step: gamma must be positive");
  return DualState{std::max(0.0, state.p - gamma * gradient), state.t + 1};
}

}  // namespace dualcast
