#ifndef DUALCAST_ANALYSIS_HPP
#define DUALCAST_ANALYSIS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dualcast/oracle.hpp"
#include "dualcast/simulate.hpp"

namespace dualcast {

struct PriceInterval {
  Price lo = 0.0;
  Price hi = 0.0;
};

// Euclidean distance from p to the interval; zero iff lo <= p <= hi.
double interval_distance(Price p, const PriceInterval& interval);

// First hole found between the users' sorted saturation intervals.
struct ConnectivityGap {
  int left_user_id = 0;   // interval whose upper end precedes the gap
  int right_user_id = 0;  // interval whose lower end follows it
  Price gap_lo = 0.0;
  Price gap_hi = 0.0;
};

using ConnectivityResult = std::variant<PriceInterval, ConnectivityGap>;

// Merges the users' [p_lo_i, p_hi_i] intervals sorted by lower endpoint.
// Returns the merged interval when every adjacent pair overlaps or touches,
// otherwise the first gap.
ConnectivityResult check_connectivity(const ProblemInstance& instance);

// Sufficient condition for connectivity when every user has a log utility
// with m_i = 0 and the common upper bound M: with scales sorted ascending,
// (b_i + M) * a_i >= a_{i+1} for every consecutive pair. Throws
// UnsupportedError for non-log users or mismatched bounds.
bool check_prop6_condition(const ProblemInstance& instance, Power M);

// True iff all users share identical breakpoints (p_lo, p_hi) to within
// 1e-12 relative.
bool check_assumption5(const ProblemInstance& instance);

enum class RateKind {
  kSublinear1T,
  kLinearGeneral,
  kLinearNIndependent,
};

const char* rate_kind_name(RateKind kind);

// Outcome of checking one convergence-rate envelope over a trajectory.
// c is the contraction factor for the linear kinds (1 - gamma/L for the
// general rate, 1 - N*gamma/L for the N-independent one). worst_violation
// is the largest ratio of observed quantity to its certified bound; holds
// iff that never exceeds 1.
struct RateCertificate {
  RateKind kind = RateKind::kSublinear1T;
  std::optional<double> c;
  bool holds = false;
  double worst_violation = 0.0;
  std::pair<std::int64_t, std::int64_t> checked_range{0, 0};
};

// Checks the O(1/t) value envelope of a run with gamma = mu/N:
//   D(p(t)) - D(p*) <= 2 * (N/mu) * dist(p(0), P*)^2 / (t + 4)
// with additive slack 1e-9 * |D(p*)|, at every recorded iteration. The
// N/mu factor is the dual function's smoothness constant; the envelope is
// the standard fixed-step gradient bound for that constant. Throws
// InapplicableError when the run's step size is not mu/N.
RateCertificate certify_sublinear(const Trajectory& traj,
                                  const OracleSolution& oracle,
                                  const ProblemInstance& instance);

enum class LinearRateMode { kGeneral, kNIndependent };

// Checks dist(p(t), P*) <= c^t * dist(p(0), P*) + 1e-9 at every iteration,
// with c per the mode. Preconditions (violations throw InapplicableError
// naming the failed assumption): the saturation intervals must merge into
// one interval [p_lo, p_hi] (identical across users for the N-independent
// mode), p(0) must lie inside it, and gamma must lie in (0, mu/N].
RateCertificate certify_linear(const Trajectory& traj,
                               const OracleSolution& oracle,
                               const ProblemInstance& instance,
                               LinearRateMode mode);

// One run paired with the instance that produced it.
struct RunView {
  const ProblemInstance* instance = nullptr;
  const Trajectory* traj = nullptr;
};

// True iff the price trajectories agree pairwise within 1e-9 absolute per
// iteration over the common length. Applicable only to runs with identical
// log-utility users, capacity proportional to the user count, a common
// initial price and gamma = mu/N each; anything else throws
// InapplicableError.
bool check_n_independence(std::span<const RunView> runs);

// Fills dist_to_pstar and dual_gap on every record from an oracle solution.
void annotate_with_oracle(Trajectory& traj, const ProblemInstance& instance,
                          const OracleSolution& oracle);

// Certificate report writers: a plain-text block per certificate, and a
// machine-readable CSV (kind,c,holds,worst_violation,range_begin,range_end).
void write_certificate_report(std::ostream& out,
                              std::span<const RateCertificate> certs);
void write_certificate_csv(std::ostream& out,
                           std::span<const RateCertificate> certs);

}  // namespace dualcast

#endif  // DUALCAST_ANALYSIS_HPP
