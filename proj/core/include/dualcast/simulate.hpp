#ifndef DUALCAST_SIMULATE_HPP
#define DUALCAST_SIMULATE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dualcast/dual.hpp"

namespace dualcast {

enum class BlackoutPolicy {
  kHalt,               // stop at the first infeasible aggregate
  kRecordAndContinue,  // flag the record, keep iterating (default)
};

enum class StopReason {
  kGradientTolerance,
  kMaxIterations,
  kBlackoutHalt,
};

// Termination rule: stop once |measured gradient| <= grad_tol or after
// max_iters recorded iterations. grad_tol < 0 selects the scale-free
// default 1e-9 * Q.
struct StoppingConfig {
  double grad_tol = -1.0;
  std::int64_t max_iters = 100000;
};

// One row of the trajectory. gradient is exactly Q - aggregate_demand;
// feasible is the exact comparison aggregate_demand <= Q (no tolerance:
// this is the safety property). dist_to_pstar and dual_gap stay empty until
// an oracle solution is supplied to annotate_with_oracle.
struct IterationRecord {
  std::int64_t t = 0;
  Price p = 0.0;
  Power aggregate_demand = 0.0;
  double gradient = 0.0;
  bool feasible = true;
  std::optional<double> dist_to_pstar;
  std::optional<double> dual_gap;
};

struct Trajectory {
  std::vector<IterationRecord> records;
  StopReason terminated_reason = StopReason::kGradientTolerance;
  // Run configuration, kept for downstream certificate preconditions.
  Price p0 = 0.0;
  double gamma = 0.0;
  double capacity = 0.0;
};

// The supplier side of the protocol. It knows only its own capacity, step
// size and current price; per iteration it consumes exactly one scalar (the
// measured aggregate load) and holds no reference to any user data.
class Supplier {
 public:
  Supplier(double capacity, double gamma, Price p0,
           BlackoutPolicy policy = BlackoutPolicy::kRecordAndContinue);

  Price broadcast() const { return state_.p; }
  std::int64_t iteration() const { return state_.t; }
  double capacity() const { return capacity_; }
  BlackoutPolicy blackout_policy() const { return policy_; }

  // Reacts to the measured aggregate load: computes the deviation from
  // capacity and applies the projected price update. Returns the gradient
  // it measured.
  double measure_and_update(Power aggregate_load);

 private:
  double capacity_;
  double gamma_;
  DualState state_;
  BlackoutPolicy policy_;
};

// The user side: holds the private profile and answers each broadcast with
// its clamped demand.
class UserAgent {
 public:
  explicit UserAgent(UserProfile profile);

  Power respond(Price p);  // sets last_price/last_demand
  Price last_price() const { return last_price_; }
  Power last_demand() const { return last_demand_; }
  const UserProfile& profile() const { return profile_; }

 private:
  UserProfile profile_;
  Price last_price_;
  Power last_demand_;
};

// Runs the synchronous broadcast protocol: each iteration broadcasts the
// price, collects every agent's demand, measures the aggregate in ascending
// user-id order, records the row, then updates the price. Terminates per
// the stopping rule, or at the first infeasible row under the halt policy.
// Independent calls share no mutable state.
Trajectory run(const ProblemInstance& instance, Price p0,
               const StepSizePolicy& policy, const StoppingConfig& stop = {},
               BlackoutPolicy blackout = BlackoutPolicy::kRecordAndContinue);

struct FeasibilityReport {
  bool feasible = true;
  std::optional<std::int64_t> first_violation;
};

// True iff every record satisfies aggregate_demand <= capacity exactly;
// otherwise reports the first violating iteration.
FeasibilityReport feasibility_certificate(const Trajectory& traj);

// Aggregate demand at each given price, exactly as run() would measure it.
std::vector<Power> replay_aggregate(const ProblemInstance& instance,
                                    std::span<const Price> prices);

// CSV trajectory I/O. Header is
//   t,p,aggregate_demand,gradient,feasible,dist_to_pstar,dual_gap
// with 17-significant-digit floats, feasible as 0/1 and empty cells for
// unfilled optional columns. Values round-trip bit-exactly.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

extern const char* const kTrajectoryCsvHeader;

}  // namespace dualcast

#endif  // DUALCAST_SIMULATE_HPP
