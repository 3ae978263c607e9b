#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace osnr::bench {

/// One experiment: a problem family, a horizon, a set of algorithms with
/// sketch percentages, and a block of seeded repetitions. Run i uses seed
/// base_seed + i with substreams derived by fixed labels, so adding an
/// algorithm or a rho never perturbs the randomness of existing runs.
struct ExperimentConfig {
  std::string experiment = "track";  // track | opf | root-demo
  int n = 20;
  int m = 18;
  std::string case_path;  // opf only
  int T = 1000;
  int runs = 20;
  int jobs = 1;
  std::uint64_t base_seed = 1;
  std::vector<std::string> algorithms{"osnr"};  // osnr | osnr_ec | ogd | onm
  std::vector<double> rhos{1.0};
  double eta = 0.0;  // 0 selects the ogd default 1/(15 sqrt(T))
  std::string alpha_rule = "paper";  // paper | inverse-square
  std::string out_dir = "out";
  bool record_decisions = false;
  double drift = 0.0;  // root-demo: zero-drift scale (0 = static field)
};

/// Parse a plain-text config file: `key = value` lines, '#' comments,
/// comma-separated lists. Unknown keys are rejected.
ExperimentConfig load_config_file(const std::string& path);

/// Apply one key/value pair (shared by config files and CLI overrides).
void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value);

void validate(const ExperimentConfig& cfg);

/// Execute every (algorithm, rho, seed) combination, writing into out_dir:
///   run_<label>_seed<seed>.csv   deterministic per-round metrics
///   agg_<label>.csv              per-round mean/std across seeds
///   times_<label>.csv            per-round wall-time stats (not deterministic)
///   manifest.json                config echo, environment, wall-times, failures
/// Failed runs are recorded in the manifest and do not stop the others.
/// Returns the number of failed runs.
int run_experiment(const ExperimentConfig& cfg);

/// Re-shape a bundle into a long-format CSV plot_<quantity>.csv with columns
/// round,algorithm,rho,mean,std. Quantities: regret | violation | steptime.
/// Returns the path of the written file.
std::string emit_plotdata(const std::string& bundle_dir,
                          const std::string& quantity);

}  // namespace osnr::bench
