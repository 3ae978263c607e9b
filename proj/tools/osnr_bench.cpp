// Command-line harness: seeded experiment execution, case-file inspection,
// and plot-ready reshaping of result bundles.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "osnr/bench.hpp"
#include "osnr/errors.hpp"
#include "osnr/matpower.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int cmd_run(const std::string& config_path,
            const std::vector<std::pair<std::string, std::string>>& overrides) {
  osnr::bench::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = osnr::bench::load_config_file(config_path);
    for (const auto& [key, value] : overrides) {
      osnr::bench::apply_key(cfg, key, value);
    }
    osnr::bench::validate(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    const int failures = osnr::bench::run_experiment(cfg);
    if (failures > 0) {
      std::fprintf(stderr, "%d run(s) failed; see %s/manifest.json\n", failures,
                   cfg.out_dir.c_str());
      return kExitRuntime;
    }
    std::printf("bundle written to %s\n", cfg.out_dir.c_str());
    return kExitOk;
  } catch (const osnr::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == osnr::ErrorKind::invalid_argument ? kExitConfig
                                                         : kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}

int cmd_parse_case(const std::string& path) {
  try {
    const osnr::matpower::PowerCase pc = osnr::matpower::load_case_file(path);
    osnr::matpower::validate_case(pc);
    double total_demand = 0.0;
    int loads = 0;
    int ref_bus = 0;
    for (const auto& b : pc.buses) {
      total_demand += b.pd_mw;
      if (b.pd_mw != 0.0) ++loads;
      if (b.type == osnr::matpower::BusType::ref) ref_bus = b.id;
    }
    std::printf("case ok: %zu buses, %zu branches, %zu generators\n",
                pc.buses.size(), pc.branches.size(), pc.gens.size());
    std::printf("baseMVA %.17g, reference bus %d, %d load(s), total demand %.17g MW\n",
                pc.base_mva, ref_bus, loads, total_demand);
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "parse-case: %s\n", e.what());
    return kExitConfig;
  }
}

int cmd_plot_data(const std::string& bundle, const std::string& quantity) {
  try {
    const std::string out = osnr::bench::emit_plotdata(bundle, quantity);
    std::printf("%s\n", out.c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "plot-data: %s\n", e.what());
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online sketched Newton-Raphson benchmark harness"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "execute a seeded experiment");
  std::string config_path;
  run->add_option("--config", config_path, "config file (key = value lines)");
  std::vector<std::pair<std::string, std::string>> overrides;
  auto capture = [&overrides](const std::string& key) {
    return [&overrides, key](const std::string& value) {
      overrides.emplace_back(key, value);
    };
  };
  run->add_option_function<std::string>("--experiment", capture("experiment"),
                                        "track | opf | root-demo");
  run->add_option_function<std::string>("--case", capture("case"), "case file (opf)");
  run->add_option_function<std::string>("--n", capture("n"), "decision dimension");
  run->add_option_function<std::string>("--m", capture("m"), "output dimension");
  run->add_option_function<std::string>("--T", capture("T"), "horizon (rounds)");
  std::vector<std::string> rho_values;
  run->add_option("--rho", rho_values, "sketch percentage in (0,1]; repeatable");
  std::vector<std::string> algo_values;
  run->add_option("--algo", algo_values,
                  "algorithm (osnr, osnr_ec, ogd, onm); repeatable");
  run->add_option_function<std::string>("--runs", capture("runs"), "seed count");
  run->add_option_function<std::string>("--seed", capture("seed"), "base seed");
  run->add_option_function<std::string>("--eta", capture("eta"),
                                        "ogd step size (0 = 1/(15 sqrt(T)))");
  run->add_option_function<std::string>("--alpha-rule", capture("alpha_rule"),
                                        "paper | inverse-square");
  run->add_option_function<std::string>("--out", capture("out"), "output directory");
  run->add_option_function<std::string>("--jobs", capture("jobs"),
                                        "max concurrent runs");
  run->add_option_function<std::string>("--drift", capture("drift"),
                                        "root-demo zero drift scale");
  run->add_flag_function("--record-decisions", [&overrides](std::int64_t) {
    overrides.emplace_back("record_decisions", "true");
  });

  // parse-case -----------------------------------------------------------
  auto* parse = app.add_subcommand("parse-case", "validate a case file");
  std::string case_path;
  parse->add_option("file", case_path, "case file")->required();

  // plot-data --------------------------------------------------------------
  auto* plot = app.add_subcommand("plot-data", "emit long-format plot CSV");
  std::string bundle;
  std::string quantity = "regret";
  plot->add_option("--bundle", bundle, "result bundle directory")->required();
  plot->add_option("--quantity", quantity, "regret | violation | steptime");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    // Repeatable flags fold into comma lists so file and CLI share one path.
    if (!rho_values.empty()) {
      std::string joined;
      for (const auto& r : rho_values) joined += (joined.empty() ? "" : ",") + r;
      overrides.emplace_back("rho", joined);
    }
    if (!algo_values.empty()) {
      std::string joined;
      for (const auto& a : algo_values) joined += (joined.empty() ? "" : ",") + a;
      overrides.emplace_back("algorithms", joined);
    }
    return cmd_run(config_path, overrides);
  }
  if (parse->parsed()) return cmd_parse_case(case_path);
  if (plot->parsed()) return cmd_plot_data(bundle, quantity);
  return kExitConfig;
}
