#include "dualcast/oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dualcast/errors.hpp"

namespace dualcast {

namespace {

struct Bracket {
  double lo = 0.0;  // pred false here
  double hi = 0.0;  // pred true here
  double width() const { return hi - lo; }
};

// Boundary of a monotone predicate over [lo, hi]: pred(lo) is false,
// pred(hi) is true. Shrinks the bracket until it is narrower than tol or
// cannot shrink further in double precision.
Bracket bisect_boundary(const std::function<bool(double)>& pred, double lo,
                        double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (!(lo < mid && mid < hi)) break;  // bracket at machine resolution
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return {lo, hi};
}

}  // namespace

OracleSolution solve(const ProblemInstance& instance, double tol) {
  if (tol == 0.0 || std::isnan(tol))
    throw std::invalid_argument("oracle::solve: tol must be positive");
  const double p_max = instance.max_p_hi();
  if (tol < 0.0) tol = 1e-12 * (1.0 + p_max);

  const auto grad = [&](double p) { return dual_gradient(instance, p); };
  const double g0 = grad(0.0);
  const double g_top = grad(p_max);

  // The reported interval takes the outer side of each final bracket, so it
  // always encloses the true optimal set; in particular the upper endpoint
  // sits on the nonnegative-gradient (feasible-demand) side.
  double lo_end = 0.0, lo_width = 0.0;
  if (g0 < 0.0) {
    // inf{p : D'(p) >= 0}; well-posedness gives D'(p_max) = Q - sum m_i >= 0.
    const Bracket b = bisect_boundary(
        [&](double p) { return grad(p) >= 0.0; }, 0.0, p_max, tol);
    lo_end = b.lo;
    lo_width = b.width();
  }

  double hi_end = 0.0, hi_width = 0.0;
  if (g_top <= 0.0) {
    hi_end = p_max;  // optimal set reaches the top of the bracket
  } else if (g0 > 0.0) {
    hi_end = 0.0;  // unconstrained optimum at the price floor
  } else {
    // sup{p : D'(p) <= 0}. A flat optimal set puts an exact zero on the
    // bracket's inner side; report that optimal price directly. Otherwise
    // take the outer side, whose demand is strictly inside the capacity.
    const Bracket b = bisect_boundary(
        [&](double p) { return grad(p) > 0.0; }, 0.0, p_max, tol);
    hi_end = grad(b.lo) == 0.0 ? b.lo : b.hi;
    hi_width = b.width();
  }

  OracleSolution sol;
  sol.p_star_lo = lo_end;
  sol.p_star_hi = hi_end;
  sol.q_star.reserve(instance.users().size());
  double primal = 0.0;
  for (const auto& u : instance.users()) {
    const Power q = demand(u, sol.p_star_hi);
    sol.q_star.push_back(q);
    primal += u.utility().value(q);
  }
  sol.primal_value = primal;
  sol.dual_value_at_pstar = dual_value(instance, sol.p_star_hi);

  // Certified tolerance: endpoint error grows by the gradient's Lipschitz
  // constant N/mu on the demand scale and by the price level on the
  // objective scale.
  const double width = std::max(std::max(lo_width, hi_width), tol);
  const double grad_lipschitz = instance.size() / instance.mu();
  sol.tol = width * (1.0 + grad_lipschitz) * (1.0 + p_max);
  return sol;
}

BruteForceResult brute_force_primal(const ProblemInstance& instance,
                                    double grid_pitch) {
  const int n = instance.size();
  if (n > 4)
    throw UnsupportedError(
        "brute_force_primal: exhaustive search supports at most 4 users");
  if (!(grid_pitch > 0.0))
    throw std::invalid_argument("brute_force_primal: pitch must be positive");

  const auto& users = instance.users();
  const double Q = instance.capacity();

  // Grid ticks for the first n-1 users; the last coordinate is solved
  // exactly (utilities increase, so it saturates the remaining budget).
  std::vector<std::vector<double>> ticks(n > 0 ? n - 1 : 0);
  double total_points = 1.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double m = users[i].m(), M = users[i].M();
    auto& t = ticks[i];
    for (double q = m; q < M; q += grid_pitch) t.push_back(q);
    t.push_back(M);
    total_points *= static_cast<double>(t.size());
  }
  if (total_points > 2e8)
    throw UnsupportedError(
        "brute_force_primal: grid too large; widen the pitch or shrink the "
        "boxes");

  BruteForceResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<double> point(n, 0.0);

  // Lexicographic depth-first enumeration; ties keep the first point found.
  std::function<void(int, double, double)> visit = [&](int i, double used,
                                                       double utility) {
    if (i == n - 1) {
      const auto& last = users[i];
      const double q = std::min(last.M(), Q - used);
      if (q < last.m() - 1e-12) return;  // no feasible completion
      point[i] = std::max(q, last.m());
      const double value = utility + last.utility().value(point[i]);
      if (value > best.value) {
        best.value = value;
        best.allocation = point;
      }
      return;
    }
    for (double q : ticks[i]) {
      if (used + q > Q + 1e-12) break;  // ticks ascend; rest only grows
      point[i] = q;
      visit(i + 1, used + q, utility + users[i].utility().value(q));
    }
  };
  visit(0, 0.0, 0.0);

  if (best.allocation.empty())
    throw InfeasibleInstanceError(
        "brute_force_primal: no feasible grid point");
  return best;
}

void write_oracle_report(std::ostream& out, const ProblemInstance& instance,
                         const OracleSolution& solution) {
  out.precision(17);
  out << "optimal price interval: [" << solution.p_star_lo << ", "
      << solution.p_star_hi << "]\n";
  out << "certified tolerance: " << solution.tol << "\n";
  out << "primal value: " << solution.primal_value << "\n";
  out << "dual value at upper endpoint: " << solution.dual_value_at_pstar
      << "\n";
  out << "duality gap: "
      << solution.primal_value - solution.dual_value_at_pstar << "\n";
  out << "allocations (user id, q):\n";
  for (std::size_t i = 0; i < solution.q_star.size(); ++i)
    out << "  " << instance.users()[i].id() << " " << solution.q_star[i]
        << "\n";
}

}  // namespace dualcast
