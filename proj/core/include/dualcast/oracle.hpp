#ifndef DUALCAST_ORACLE_HPP
#define DUALCAST_ORACLE_HPP

#include <iosfwd>
#include <vector>

#include "dualcast/dual.hpp"

namespace dualcast {

// Ground truth for one instance, computed independently of the iterative
// protocol: the optimal-price interval endpoints, the per-user optimal
// allocations taken at the upper endpoint (the feasible side), and the
// matching primal/dual objective values. tol bounds both the price-endpoint
// error and the demand-scale residuals certified by the solver.
struct OracleSolution {
  Price p_star_lo = 0.0;
  Price p_star_hi = 0.0;
  std::vector<Power> q_star;
  double primal_value = 0.0;
  double dual_value_at_pstar = 0.0;
  double tol = 0.0;
};

// Solves the allocation problem by bisecting the monotone dual gradient over
// [0, max_i p_hi_i]. Both endpoints of the optimal set {p : D'(p) = 0} are
// located: the lower one as inf{p : D'(p) >= 0}, the upper one as
// sup{p : D'(p) <= 0}, each bracketed to width <= tol (or to machine
// precision if tol is smaller than that). If D'(0) >= 0 the interval starts
// at 0. Optimal sets extending beyond max_i p_hi_i (possible only when
// Q equals the sum of lower bounds) are truncated there; demands are
// constant beyond that price, so the reported allocation is unaffected.
//
// tol < 0 selects the default 1e-12 * (1 + max_i p_hi_i).
OracleSolution solve(const ProblemInstance& instance, double tol = -1.0);

struct BruteForceResult {
  std::vector<Power> allocation;
  double value = 0.0;
};

// Exhaustive primal maximization for cross-checking the solver on tiny
// instances (N <= 4). The first N-1 coordinates run over uniform grids of
// the given pitch on [m_i, M_i]; because utilities are increasing, the last
// coordinate is optimal at min(M_N, Q - sum of the others), which is taken
// exactly. Ties resolve to the lowest lexicographic grid index.
BruteForceResult brute_force_primal(const ProblemInstance& instance,
                                    double grid_pitch);

// Human-readable solution summary.
void write_oracle_report(std::ostream& out, const ProblemInstance& instance,
                         const OracleSolution& solution);

}  // namespace dualcast

#endif  // DUALCAST_ORACLE_HPP
