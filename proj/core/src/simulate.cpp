#include "dualcast/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dualcast {

const char* const kTrajectoryCsvHeader =
    "t,p,aggregate_demand,gradient,feasible,dist_to_pstar,dual_gap";

Supplier::Supplier(double capacity, double gamma, Price p0,
                   BlackoutPolicy policy)
    : capacity_(capacity), gamma_(gamma), state_{p0, 0}, policy_(policy) {
  if (!(p0 >= 0.0))
    throw std::invalid_argument("Supplier: initial price must be >= 0");
  if (!(gamma > 0.0))
    throw std::invalid_argument("Supplier: gamma must be positive");
}

double Supplier::measure_and_update(Power aggregate_load) {
  const double gradient = capacity_ - aggregate_load;
  state_ = price_step(state_, gradient, gamma_);
  return gradient;
}

UserAgent::UserAgent(UserProfile profile)
    : profile_(std::move(profile)),
      last_price_(profile_.p_hi()),
      last_demand_(profile_.m()) {}

Power UserAgent::respond(Price p) {
  last_price_ = p;
  last_demand_ = demand(profile_, p);
  return last_demand_;
}

Trajectory run(const ProblemInstance& instance, Price p0,
               const StepSizePolicy& policy, const StoppingConfig& stop,
               BlackoutPolicy blackout) {
  if (!(p0 >= 0.0) || !std::isfinite(p0))
    throw std::invalid_argument("run: initial price must be >= 0");
  const double gamma = policy.resolve(instance);
  const double grad_tol =
      stop.grad_tol < 0.0 ? 1e-9 * instance.capacity() : stop.grad_tol;
  if (stop.max_iters < 1)
    throw std::invalid_argument("run: max_iters must be >= 1");

  std::vector<UserAgent> agents;
  agents.reserve(instance.users().size());
  for (const auto& u : instance.users()) agents.emplace_back(u);

  Supplier supplier(instance.capacity(), gamma, p0, blackout);

  Trajectory traj;
  traj.p0 = p0;
  traj.gamma = gamma;
  traj.capacity = instance.capacity();

  for (;;) {
    const Price p = supplier.broadcast();
    // Synchronous round: every agent answers the same broadcast; the
    // aggregate is reduced in ascending id order (agents are stored sorted).
    Power aggregate = 0.0;
    for (auto& agent : agents) aggregate += agent.respond(p);

    IterationRecord rec;
    rec.t = supplier.iteration();
    rec.p = p;
    rec.aggregate_demand = aggregate;
    rec.gradient = instance.capacity() - aggregate;
    rec.feasible = aggregate <= instance.capacity();
    traj.records.push_back(rec);

    // The safety check outranks the convergence check.
    if (!rec.feasible &&
        supplier.blackout_policy() == BlackoutPolicy::kHalt) {
      traj.terminated_reason = StopReason::kBlackoutHalt;
      break;
    }
    if (std::abs(rec.gradient) <= grad_tol) {
      traj.terminated_reason = StopReason::kGradientTolerance;
      break;
    }
    if (rec.t + 1 >= stop.max_iters) {
      traj.terminated_reason = StopReason::kMaxIterations;
      break;
    }
    supplier.measure_and_update(aggregate);
  }
  return traj;
}

FeasibilityReport feasibility_certificate(const Trajectory& traj) {
  if (traj.records.empty())
    throw std::invalid_argument("feasibility_certificate: empty trajectory");
  for (const auto& rec : traj.records) {
    if (!rec.feasible) return {false, rec.t};
  }
  return {true, std::nullopt};
}

std::vector<Power> replay_aggregate(const ProblemInstance& instance,
                                    std::span<const Price> prices) {
  std::vector<Power> aggregates;
  aggregates.reserve(prices.size());
  for (const Price p : prices)
    aggregates.push_back(aggregate_demand(instance, p));
  return aggregates;
}

namespace {

void append_double(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryCsvHeader << '\n';
  std::string line;
  for (const auto& rec : traj.records) {
    line.clear();
    line += std::to_string(rec.t);
    line += ',';
    append_double(line, rec.p);
    line += ',';
    append_double(line, rec.aggregate_demand);
    line += ',';
    append_double(line, rec.gradient);
    line += ',';
    line += rec.feasible ? '1' : '0';
    line += ',';
    if (rec.dist_to_pstar) append_double(line, *rec.dist_to_pstar);
    line += ',';
    if (rec.dual_gap) append_double(line, *rec.dual_gap);
    line += '\n';
    out << line;
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("trajectory csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryCsvHeader)
    throw std::runtime_error("trajectory csv: missing or wrong header");

  const auto parse_optional = [](const std::string& field)
      -> std::optional<double> {
    if (field.empty()) return std::nullopt;
    return std::strtod(field.c_str(), nullptr);
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 7)
      throw std::runtime_error("trajectory csv: expected 7 fields, got " +
                               std::to_string(fields.size()));
    IterationRecord rec;
    rec.t = std::strtoll(fields[0].c_str(), nullptr, 10);
    rec.p = std::strtod(fields[1].c_str(), nullptr);
    rec.aggregate_demand = std::strtod(fields[2].c_str(), nullptr);
    rec.gradient = std::strtod(fields[3].c_str(), nullptr);
    rec.feasible = fields[4] == "1";
    rec.dist_to_pstar = parse_optional(fields[5]);
    rec.dual_gap = parse_optional(fields[6]);
    traj.records.push_back(rec);
  }
  if (!traj.records.empty()) traj.p0 = traj.records.front().p;
  return traj;
}

}  // namespace dualcast
