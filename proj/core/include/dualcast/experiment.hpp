#ifndef DUALCAST_EXPERIMENT_HPP
#define DUALCAST_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualcast/analysis.hpp"
#include "dualcast/oracle.hpp"
#include "dualcast/simulate.hpp"

namespace dualcast {

// Log-utility user parameters as written in config files.
struct UserSpec {
  double a = 0.0;
  double b = 0.0;
  double m = 0.0;
  double M = 0.0;
};

// N copies of one template user.
struct GeneratorSpec {
  int count = 0;
  UserSpec tmpl;
};

enum class GammaRule {
  kMuOverN,             // "mu/N": the feasibility-preserving optimum
  kExplicit,            // a literal step size
  kTwoMuOverNMinusEps,  // "2mu/N-eps": just inside the convergence window
};

// Parsed experiment description. Users come either as an explicit list or
// from a generator; capacity is a literal or a per-user ratio ("r*N").
struct ExperimentConfig {
  std::vector<UserSpec> users;
  std::optional<GeneratorSpec> generator;

  double Q = 0.0;
  std::optional<double> Q_ratio;  // set when Q was given as "r*N"

  double p0 = 0.0;
  GammaRule gamma_rule = GammaRule::kMuOverN;
  double gamma_value = 0.0;       // used by kExplicit
  bool convergent_only = false;   // opt-in to the wider step window

  StoppingConfig stop;
  BlackoutPolicy blackout_policy = BlackoutPolicy::kRecordAndContinue;
  std::int64_t seed = 0;
  std::string outputs;
};

// Parses the sectioned key=value config format (see README). Throws
// ConfigError with the offending line number on malformed input.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical text form; parse(serialize(parse(x))) resolves identically to
// parse(x).
std::string serialize_config(const ExperimentConfig& config);

// Builders from the parsed description.
ProblemInstance build_instance(const ExperimentConfig& config);
StepSizePolicy resolve_policy(const ExperimentConfig& config,
                              const ProblemInstance& instance);

// Reproduction presets: a two-user system at capacity 1.6, and N identical
// users at capacity 4N/5, both with utility scale 20, shift 1, bounds
// [0, 4], initial price 30 and the feasibility-preserving optimal step.
ExperimentConfig preset_two_user();
ExperimentConfig preset_multi_user(int n);

struct RunOptions {
  std::string out_dir;          // overrides config.outputs when nonempty
  std::string experiment_name;  // used when neither names a directory
  bool strict = false;          // nonzero exit on certificate failure
  bool write_files = true;
};

struct ExperimentResult {
  int exit_status = 0;
  Trajectory trajectory;
  OracleSolution oracle;
  FeasibilityReport feasibility;
  std::vector<RateCertificate> certificates;
  std::vector<std::string> skipped_certificates;  // inapplicable, with cause
  std::vector<std::string> files_written;
  std::string out_dir;
};

// Runs the experiment end to end: builds the instance, solves the oracle,
// simulates, annotates, evaluates every applicable certificate and writes
// trajectory.csv, oracle.txt, certificates.txt, certificates.csv, plot.dat
// and config_resolved.cfg into the output directory. The directory is
// resolved as options.out_dir, else config.outputs, else
// $DUALCAST_OUT/<experiment_name> (falling back to ./out/<experiment_name>).
//
// Exit status: 1 on a blackout halt; under strict also 1 when the run was
// infeasible or a computed certificate failed.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const RunOptions& options = {});

struct ReplayCheck {
  bool ok = true;
  std::int64_t rows_checked = 0;
  std::optional<std::int64_t> first_mismatch;
};

// Re-evaluates the aggregate column of a trajectory CSV from its price
// column against the config's instance; bit-exact comparison.
ReplayCheck verify_replay(const ProblemInstance& instance,
                          std::istream& csv);

}  // namespace dualcast

#endif  // DUALCAST_EXPERIMENT_HPP
