#include "dualcast/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dualcast/errors.hpp"

namespace dualcast {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(line, "expected a number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ConfigError(line, "malformed number '" + t + "'");
  return v;
}

std::int64_t parse_integer(const std::string& text, int line) {
  const std::string t = trim(text);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError(line, "malformed integer '" + t + "'");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// "a=20 b=1 m=0 M=4"
UserSpec parse_user_spec(const std::string& text, int line) {
  UserSpec spec;
  bool seen_a = false, seen_b = false, seen_m = false, seen_M = false;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "user fields must look like key=value, got '" +
                                  token + "'");
    const std::string key = token.substr(0, eq);
    const double value = parse_number(token.substr(eq + 1), line);
    if (key == "a") {
      spec.a = value;
      seen_a = true;
    } else if (key == "b") {
      spec.b = value;
      seen_b = true;
    } else if (key == "m") {
      spec.m = value;
      seen_m = true;
    } else if (key == "M") {
      spec.M = value;
      seen_M = true;
    } else {
      throw ConfigError(line, "unknown user field '" + key + "'");
    }
  }
  if (!(seen_a && seen_b && seen_m && seen_M))
    throw ConfigError(line, "user needs all of a, b, m, M");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  GeneratorSpec generator;
  bool in_generator = false;
  bool has_p0 = false, has_q = false;
  int generator_keys = 0;  // a, b, m, M all required with [generator]

  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "stop" &&
          section != "users" && section != "generator")
        throw ConfigError(line_no, "unknown section '" + section + "'");
      if (section == "generator") in_generator = true;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "experiment") {
      if (key == "p0") {
        config.p0 = parse_number(value, line_no);
        has_p0 = true;
      } else if (key == "gamma") {
        if (value == "mu/N") {
          config.gamma_rule = GammaRule::kMuOverN;
        } else if (value == "2mu/N-eps") {
          config.gamma_rule = GammaRule::kTwoMuOverNMinusEps;
          config.convergent_only = true;
        } else {
          config.gamma_rule = GammaRule::kExplicit;
          config.gamma_value = parse_number(value, line_no);
        }
      } else if (key == "step_mode") {
        if (value == "feasible")
          config.convergent_only = false;
        else if (value == "convergent-only")
          config.convergent_only = true;
        else
          throw ConfigError(line_no, "step_mode must be 'feasible' or "
                                     "'convergent-only'");
      } else if (key == "Q") {
        const auto star = value.find('*');
        if (star != std::string::npos) {
          const std::string rhs = trim(value.substr(star + 1));
          if (rhs != "N")
            throw ConfigError(line_no,
                              "capacity expression must be '<ratio>*N'");
          config.Q_ratio = parse_number(value.substr(0, star), line_no);
        } else {
          config.Q = parse_number(value, line_no);
        }
        has_q = true;
      } else if (key == "seed") {
        config.seed = parse_integer(value, line_no);
      } else if (key == "outputs") {
        config.outputs = value;
      } else if (key == "blackout_policy") {
        if (value == "halt")
          config.blackout_policy = BlackoutPolicy::kHalt;
        else if (value == "record-and-continue")
          config.blackout_policy = BlackoutPolicy::kRecordAndContinue;
        else
          throw ConfigError(line_no, "blackout_policy must be 'halt' or "
                                     "'record-and-continue'");
      } else {
        throw ConfigError(line_no,
                          "unknown key '" + key + "' in [experiment]");
      }
    } else if (section == "stop") {
      if (key == "grad_tol") {
        config.stop.grad_tol =
            value == "default" ? -1.0 : parse_number(value, line_no);
      } else if (key == "max_iters") {
        config.stop.max_iters = parse_integer(value, line_no);
      } else {
        throw ConfigError(line_no, "unknown key '" + key + "' in [stop]");
      }
    } else if (section == "users") {
      if (key != "user")
        throw ConfigError(line_no, "only 'user = ...' lines belong in "
                                   "[users]");
      config.users.push_back(parse_user_spec(value, line_no));
    } else if (section == "generator") {
      if (key == "count") {
        generator.count = static_cast<int>(parse_integer(value, line_no));
      } else if (key == "a") {
        generator.tmpl.a = parse_number(value, line_no);
        ++generator_keys;
      } else if (key == "b") {
        generator.tmpl.b = parse_number(value, line_no);
        ++generator_keys;
      } else if (key == "m") {
        generator.tmpl.m = parse_number(value, line_no);
        ++generator_keys;
      } else if (key == "M") {
        generator.tmpl.M = parse_number(value, line_no);
        ++generator_keys;
      } else {
        throw ConfigError(line_no, "unknown key '" + key + "' in "
                                   "[generator]");
      }
    } else {
      throw ConfigError(line_no, "key outside of any section");
    }
  }

  if (in_generator) {
    if (generator.count < 1)
      throw ConfigError(line_no, "[generator] needs count >= 1");
    if (generator_keys != 4)
      throw ConfigError(line_no, "[generator] needs all of a, b, m, M");
    config.generator = generator;
  }
  if (config.users.empty() && !config.generator)
    throw ConfigError(line_no, "config needs a [users] or [generator] "
                               "section");
  if (!config.users.empty() && config.generator)
    throw ConfigError(line_no, "[users] and [generator] are mutually "
                               "exclusive");
  if (!has_p0) throw ConfigError(line_no, "missing key 'p0'");
  if (!has_q) throw ConfigError(line_no, "missing key 'Q'");
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "p0 = " << format_double(config.p0) << "\n";
  switch (config.gamma_rule) {
    case GammaRule::kMuOverN:
      out << "gamma = mu/N\n";
      break;
    case GammaRule::kTwoMuOverNMinusEps:
      out << "gamma = 2mu/N-eps\n";
      break;
    case GammaRule::kExplicit:
      out << "gamma = " << format_double(config.gamma_value) << "\n";
      break;
  }
  out << "step_mode = "
      << (config.convergent_only ? "convergent-only" : "feasible") << "\n";
  if (config.Q_ratio)
    out << "Q = " << format_double(*config.Q_ratio) << "*N\n";
  else
    out << "Q = " << format_double(config.Q) << "\n";
  out << "seed = " << config.seed << "\n";
  if (!config.outputs.empty()) out << "outputs = " << config.outputs << "\n";
  out << "blackout_policy = "
      << (config.blackout_policy == BlackoutPolicy::kHalt
              ? "halt"
              : "record-and-continue")
      << "\n";
  out << "\n[stop]\n";
  if (config.stop.grad_tol < 0.0)
    out << "grad_tol = default\n";
  else
    out << "grad_tol = " << format_double(config.stop.grad_tol) << "\n";
  out << "max_iters = " << config.stop.max_iters << "\n";
  if (config.generator) {
    out << "\n[generator]\n";
    out << "count = " << config.generator->count << "\n";
    out << "a = " << format_double(config.generator->tmpl.a) << "\n";
    out << "b = " << format_double(config.generator->tmpl.b) << "\n";
    out << "m = " << format_double(config.generator->tmpl.m) << "\n";
    out << "M = " << format_double(config.generator->tmpl.M) << "\n";
  } else {
    out << "\n[users]\n";
    for (const auto& u : config.users) {
      out << "user = a=" << format_double(u.a) << " b=" << format_double(u.b)
          << " m=" << format_double(u.m) << " M=" << format_double(u.M)
          << "\n";
    }
  }
  return out.str();
}

ProblemInstance build_instance(const ExperimentConfig& config) {
  std::vector<UserProfile> users;
  if (config.generator) {
    users.reserve(config.generator->count);
    const UserSpec& t = config.generator->tmpl;
    for (int i = 0; i < config.generator->count; ++i)
      users.push_back(make_log_user(i, t.a, t.b, t.m, t.M));
  } else {
    users.reserve(config.users.size());
    for (std::size_t i = 0; i < config.users.size(); ++i) {
      const UserSpec& u = config.users[i];
      users.push_back(make_log_user(static_cast<int>(i), u.a, u.b, u.m, u.M));
    }
  }
  const double q = config.Q_ratio
                       ? *config.Q_ratio * static_cast<double>(users.size())
                       : config.Q;
  return ProblemInstance(std::move(users), q);
}

StepSizePolicy resolve_policy(const ExperimentConfig& config,
                              const ProblemInstance& instance) {
  switch (config.gamma_rule) {
    case GammaRule::kMuOverN:
      return StepSizePolicy::feasible_optimal();
    case GammaRule::kTwoMuOverNMinusEps:
      // Just inside the open convergence window.
      return StepSizePolicy::convergent_only(
          2.0 * max_feasible_step(instance) * (1.0 - 1e-6));
    case GammaRule::kExplicit:
      return config.convergent_only
                 ? StepSizePolicy::convergent_only(config.gamma_value)
                 : StepSizePolicy::feasible_custom(config.gamma_value);
  }
  throw std::logic_error("resolve_policy: unknown gamma rule");
}

ExperimentConfig preset_two_user() {
  ExperimentConfig config;
  config.users = {{20.0, 1.0, 0.0, 4.0}, {20.0, 1.0, 0.0, 4.0}};
  config.Q = 1.6;
  config.p0 = 30.0;
  config.gamma_rule = GammaRule::kMuOverN;
  return config;
}

ExperimentConfig preset_multi_user(int n) {
  if (n < 1)
    throw std::invalid_argument("preset_multi_user: need at least one user");
  ExperimentConfig config;
  config.generator = GeneratorSpec{n, {20.0, 1.0, 0.0, 4.0}};
  config.Q_ratio = 0.8;  // capacity 4N/5
  config.p0 = 30.0;
  config.gamma_rule = GammaRule::kMuOverN;
  return config;
}

namespace {

std::string resolve_out_dir(const ExperimentConfig& config,
                            const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (!config.outputs.empty()) return config.outputs;
  const char* root = std::getenv("DUALCAST_OUT");
  const std::string base = root && *root ? root : "out";
  const std::string name = options.experiment_name.empty()
                               ? "experiment"
                               : options.experiment_name;
  return base + "/" + name;
}

void write_plot_data(std::ostream& out, const Trajectory& traj,
                     const ProblemInstance& instance,
                     const OracleSolution& oracle) {
  out << "# t dist_to_pstar aggregate_over_Q primal_error\n";
  std::string line;
  char buf[32];
  for (const auto& rec : traj.records) {
    double err_sq = 0.0;
    for (std::size_t i = 0; i < instance.users().size(); ++i) {
      const double diff =
          demand(instance.users()[i], rec.p) - oracle.q_star[i];
      err_sq += diff * diff;
    }
    line = std::to_string(rec.t);
    const double cols[3] = {rec.dist_to_pstar.value_or(0.0),
                            rec.aggregate_demand / instance.capacity(),
                            std::sqrt(err_sq)};
    for (double v : cols) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      line += buf;
    }
    line += '\n';
    out << line;
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const RunOptions& options) {
  ExperimentResult result;
  const ProblemInstance instance = build_instance(config);
  const StepSizePolicy policy = resolve_policy(config, instance);
  result.oracle = solve(instance);

  if (config.p0 < result.oracle.p_star_hi) {
    std::cerr << "warning: initial price " << config.p0
              << " is below the optimal price " << result.oracle.p_star_hi
              << "; aggregate feasibility is not guaranteed\n";
  }

  result.trajectory = run(instance, config.p0, policy, config.stop,
                          config.blackout_policy);
  annotate_with_oracle(result.trajectory, instance, result.oracle);
  result.feasibility = feasibility_certificate(result.trajectory);

  const auto try_certificate = [&](const char* label, auto&& fn) {
    try {
      result.certificates.push_back(fn());
    } catch (const InapplicableError& e) {
      result.skipped_certificates.push_back(std::string(label) + ": " +
                                            e.what());
    }
  };
  try_certificate("sublinear-1t", [&] {
    return certify_sublinear(result.trajectory, result.oracle, instance);
  });
  try_certificate("linear-general", [&] {
    return certify_linear(result.trajectory, result.oracle, instance,
                          LinearRateMode::kGeneral);
  });
  try_certificate("linear-n-independent", [&] {
    return certify_linear(result.trajectory, result.oracle, instance,
                          LinearRateMode::kNIndependent);
  });

  if (options.write_files) {
    namespace fs = std::filesystem;
    result.out_dir = resolve_out_dir(config, options);
    fs::create_directories(result.out_dir);
    const auto emit = [&](const std::string& name, auto&& writer) {
      const std::string path = result.out_dir + "/" + name;
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write " + path);
      writer(out);
      result.files_written.push_back(path);
    };
    emit("trajectory.csv", [&](std::ostream& out) {
      write_trajectory_csv(out, result.trajectory);
    });
    emit("oracle.txt", [&](std::ostream& out) {
      write_oracle_report(out, instance, result.oracle);
    });
    emit("certificates.txt", [&](std::ostream& out) {
      if (result.feasibility.feasible)
        out << "feasibility: every iteration satisfied the capacity\n";
      else
        out << "feasibility: VIOLATED first at t="
            << *result.feasibility.first_violation << "\n";
      write_certificate_report(out, result.certificates);
      for (const auto& s : result.skipped_certificates)
        out << "skipped " << s << "\n";
    });
    emit("certificates.csv", [&](std::ostream& out) {
      write_certificate_csv(out, result.certificates);
    });
    emit("plot.dat", [&](std::ostream& out) {
      write_plot_data(out, result.trajectory, instance, result.oracle);
    });
    emit("config_resolved.cfg", [&](std::ostream& out) {
      out << serialize_config(config);
    });
  }

  bool failed =
      result.trajectory.terminated_reason == StopReason::kBlackoutHalt;
  if (options.strict) {
    if (!result.feasibility.feasible) failed = true;
    for (const auto& cert : result.certificates)
      if (!cert.holds) failed = true;
  }
  result.exit_status = failed ? 1 : 0;
  return result;
}

ReplayCheck verify_replay(const ProblemInstance& instance,
                          std::istream& csv) {
  const Trajectory traj = read_trajectory_csv(csv);
  ReplayCheck check;
  check.rows_checked = static_cast<std::int64_t>(traj.records.size());
  std::vector<Price> prices;
  prices.reserve(traj.records.size());
  for (const auto& rec : traj.records) prices.push_back(rec.p);
  const std::vector<Power> replayed = replay_aggregate(instance, prices);
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    if (replayed[i] != traj.records[i].aggregate_demand) {
      check.ok = false;
      check.first_mismatch = traj.records[i].t;
      break;
    }
  }
  return check;
}

}  // namespace dualcast
