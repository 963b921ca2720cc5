#include "dualcast/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "dualcast/errors.hpp"

namespace dualcast {

namespace {

constexpr double kRelTol = 1e-12;
constexpr double kCertSlack = 1e-9;

bool nearly_equal(double a, double b, double rel = kRelTol) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

const LogUtility* as_log(const UserProfile& user) {
  return dynamic_cast<const LogUtility*>(&user.utility());
}

}  // namespace

double interval_distance(Price p, const PriceInterval& interval) {
  return std::max({0.0, interval.lo - p, p - interval.hi});
}

ConnectivityResult check_connectivity(const ProblemInstance& instance) {
  struct Entry {
    Price lo, hi;
    int id;
  };
  std::vector<Entry> entries;
  entries.reserve(instance.users().size());
  for (const auto& u : instance.users())
    entries.push_back({u.p_lo(), u.p_hi(), u.id()});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.lo < b.lo; });

  Price merged_lo = entries.front().lo;
  Price merged_hi = entries.front().hi;
  int last_id = entries.front().id;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (e.lo > merged_hi) {  // touching endpoints still count as connected
      return ConnectivityGap{last_id, e.id, merged_hi, e.lo};
    }
    if (e.hi > merged_hi) {
      merged_hi = e.hi;
      last_id = e.id;
    }
  }
  return PriceInterval{merged_lo, merged_hi};
}

bool check_prop6_condition(const ProblemInstance& instance, Power M) {
  std::vector<std::pair<double, double>> scales;  // (a_i, b_i) sorted by a
  scales.reserve(instance.users().size());
  for (const auto& u : instance.users()) {
    const LogUtility* log = as_log(u);
    if (!log)
      throw UnsupportedError(
          "check_prop6_condition: all users must have log utilities");
    if (u.m() != 0.0 || u.M() != M)
      throw UnsupportedError(
          "check_prop6_condition: users must have m = 0 and the common "
          "upper bound M");
    scales.emplace_back(log->a(), log->b());
  }
  std::sort(scales.begin(), scales.end());
  for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
    const auto [a, b] = scales[i];
    if ((b + M) * a < scales[i + 1].first) return false;
  }
  return true;
}

bool check_assumption5(const ProblemInstance& instance) {
  const auto& users = instance.users();
  for (std::size_t i = 1; i < users.size(); ++i) {
    if (!nearly_equal(users[i].p_lo(), users[0].p_lo()) ||
        !nearly_equal(users[i].p_hi(), users[0].p_hi()))
      return false;
  }
  return true;
}

const char* rate_kind_name(RateKind kind) {
  switch (kind) {
    case RateKind::kSublinear1T:
      return "sublinear-1t";
    case RateKind::kLinearGeneral:
      return "linear-general";
    case RateKind::kLinearNIndependent:
      return "linear-n-independent";
  }
  return "unknown";
}

RateCertificate certify_sublinear(const Trajectory& traj,
                                  const OracleSolution& oracle,
                                  const ProblemInstance& instance) {
  if (traj.records.empty())
    throw std::invalid_argument("certify_sublinear: empty trajectory");
  const double optimal_gamma = max_feasible_step(instance);
  if (!nearly_equal(traj.gamma, optimal_gamma))
    throw InapplicableError(
        "certify_sublinear: run used gamma = " + std::to_string(traj.gamma) +
        ", bound requires gamma = mu/N = " + std::to_string(optimal_gamma));

  const PriceInterval pstar{oracle.p_star_lo, oracle.p_star_hi};
  const double dist0 = interval_distance(traj.p0, pstar);
  const double smoothness = instance.size() / instance.mu();
  const double dual_opt = oracle.dual_value_at_pstar;
  const double slack = kCertSlack * std::abs(dual_opt);

  RateCertificate cert;
  cert.kind = RateKind::kSublinear1T;
  cert.holds = true;
  cert.worst_violation = 0.0;
  cert.checked_range = {traj.records.front().t, traj.records.back().t};
  for (const auto& rec : traj.records) {
    const double gap = dual_value(instance, rec.p) - dual_opt;
    const double bound =
        2.0 * smoothness * dist0 * dist0 / static_cast<double>(rec.t + 4) +
        slack;
    const double ratio = bound > 0.0
                             ? gap / bound
                             : (gap <= 0.0 ? 0.0
                                           : std::numeric_limits<
                                                 double>::infinity());
    cert.worst_violation = std::max(cert.worst_violation, ratio);
    if (ratio > 1.0) cert.holds = false;
  }
  return cert;
}

RateCertificate certify_linear(const Trajectory& traj,
                               const OracleSolution& oracle,
                               const ProblemInstance& instance,
                               LinearRateMode mode) {
  if (traj.records.empty())
    throw std::invalid_argument("certify_linear: empty trajectory");

  const auto connectivity = check_connectivity(instance);
  const PriceInterval* merged = std::get_if<PriceInterval>(&connectivity);
  if (!merged)
    throw InapplicableError(
        "certify_linear: the users' saturation intervals do not form a "
        "single interval");
  if (mode == LinearRateMode::kNIndependent && !check_assumption5(instance))
    throw InapplicableError(
        "certify_linear: n-independent rate requires identical breakpoints "
        "across users");
  if (traj.p0 < merged->lo || traj.p0 > merged->hi)
    throw InapplicableError(
        "certify_linear: initial price " + std::to_string(traj.p0) +
        " lies outside the saturation interval [" +
        std::to_string(merged->lo) + ", " + std::to_string(merged->hi) + "]");
  const double gamma_cap = max_feasible_step(instance);
  if (!(traj.gamma > 0.0))
    throw InapplicableError("certify_linear: gamma must be positive");
  if (traj.gamma > gamma_cap * (1.0 + kRelTol))
    throw InapplicableError(
        "certify_linear: gamma = " + std::to_string(traj.gamma) +
        " exceeds mu/N = " + std::to_string(gamma_cap));

  const double L = instance.lsmooth();
  const double c =
      mode == LinearRateMode::kGeneral
          ? 1.0 - traj.gamma / L
          : 1.0 - instance.size() * traj.gamma / L;

  const PriceInterval pstar{oracle.p_star_lo, oracle.p_star_hi};
  const double dist0 = interval_distance(traj.p0, pstar);

  RateCertificate cert;
  cert.kind = mode == LinearRateMode::kGeneral
                  ? RateKind::kLinearGeneral
                  : RateKind::kLinearNIndependent;
  cert.c = c;
  cert.holds = true;
  cert.worst_violation = 0.0;
  cert.checked_range = {traj.records.front().t, traj.records.back().t};
  double envelope = dist0;  // c^t * dist0, accumulated multiplicatively
  for (const auto& rec : traj.records) {
    const double dist = interval_distance(rec.p, pstar);
    const double bound = envelope + kCertSlack;
    const double ratio = dist / bound;
    cert.worst_violation = std::max(cert.worst_violation, ratio);
    if (ratio > 1.0) cert.holds = false;
    envelope *= c;
  }
  return cert;
}

bool check_n_independence(std::span<const RunView> runs) {
  if (runs.size() < 2)
    throw InapplicableError(
        "check_n_independence: needs at least two runs to compare");
  for (const auto& run : runs) {
    if (!run.instance || !run.traj || run.traj->records.empty())
      throw InapplicableError("check_n_independence: missing run data");
  }

  // Reference shape from the first run's first user.
  const LogUtility* ref = as_log(runs[0].instance->users().front());
  if (!ref)
    throw InapplicableError(
        "check_n_independence: identical-utility validation supports log "
        "utilities only");
  const UserProfile& ref_user = runs[0].instance->users().front();
  const double ratio0 =
      runs[0].instance->capacity() / runs[0].instance->size();
  const double p0 = runs[0].traj->p0;

  for (const auto& run : runs) {
    const ProblemInstance& inst = *run.instance;
    for (const auto& u : inst.users()) {
      const LogUtility* log = as_log(u);
      if (!log)
        throw InapplicableError(
            "check_n_independence: identical-utility validation supports "
            "log utilities only");
      if (log->a() != ref->a() || log->b() != ref->b() ||
          u.m() != ref_user.m() || u.M() != ref_user.M())
        throw InapplicableError(
            "check_n_independence: users are not identical across runs");
    }
    if (!nearly_equal(inst.capacity() / inst.size(), ratio0))
      throw InapplicableError(
          "check_n_independence: capacity is not proportional to the user "
          "count");
    if (!nearly_equal(run.traj->p0, p0))
      throw InapplicableError(
          "check_n_independence: runs do not share the initial price");
    if (!nearly_equal(run.traj->gamma, max_feasible_step(inst)))
      throw InapplicableError(
          "check_n_independence: runs must use gamma = mu/N");
  }

  const std::size_t common = std::min_element(
      runs.begin(), runs.end(), [](const RunView& a, const RunView& b) {
        return a.traj->records.size() < b.traj->records.size();
      })->traj->records.size();
  for (std::size_t t = 0; t < common; ++t) {
    const double p_ref = runs[0].traj->records[t].p;
    for (const auto& run : runs) {
      if (std::abs(run.traj->records[t].p - p_ref) > 1e-9) return false;
    }
  }
  return true;
}

void annotate_with_oracle(Trajectory& traj, const ProblemInstance& instance,
                          const OracleSolution& oracle) {
  const PriceInterval pstar{oracle.p_star_lo, oracle.p_star_hi};
  for (auto& rec : traj.records) {
    rec.dist_to_pstar = interval_distance(rec.p, pstar);
    rec.dual_gap = dual_value(instance, rec.p) - oracle.dual_value_at_pstar;
  }
}

void write_certificate_report(std::ostream& out,
                              std::span<const RateCertificate> certs) {
  out.precision(17);
  for (const auto& cert : certs) {
    out << "certificate: " << rate_kind_name(cert.kind) << "\n";
    if (cert.c) out << "  contraction factor c: " << *cert.c << "\n";
    out << "  holds: " << (cert.holds ? "yes" : "no") << "\n";
    out << "  worst violation ratio: " << cert.worst_violation << "\n";
    out << "  checked iterations: [" << cert.checked_range.first << ", "
        << cert.checked_range.second << "]\n";
  }
}

void write_certificate_csv(std::ostream& out,
                           std::span<const RateCertificate> certs) {
  out.precision(17);
  out << "kind,c,holds,worst_violation,range_begin,range_end\n";
  for (const auto& cert : certs) {
    out << rate_kind_name(cert.kind) << ",";
    if (cert.c) out << *cert.c;
    out << "," << (cert.holds ? 1 : 0) << "," << cert.worst_violation << ","
        << cert.checked_range.first << "," << cert.checked_range.second
        << "\n";
  }
}

}  // namespace dualcast
