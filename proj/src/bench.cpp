#include "osnr/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "osnr/algorithms.hpp"
#include "osnr/errors.hpp"
#include "osnr/kernels.hpp"
#include "osnr/matpower.hpp"
#include "osnr/metrics.hpp"
#include "osnr/opf.hpp"
#include "osnr/problems.hpp"

namespace osnr::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    raise(ErrorKind::invalid_argument, "config: bad number '" + s + "' for " + key);
  }
}

long long to_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    raise(ErrorKind::invalid_argument, "config: bad integer '" + s + "' for " + key);
  }
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  raise(ErrorKind::invalid_argument, "config: bad boolean '" + s + "' for " + key);
}

struct AlgoConfig {
  Algorithm algorithm = Algorithm::osnr;
  bool sketched = false;  // carries a rho of its own
  double rho = 1.0;
  std::string label;
};

struct RunResult {
  TrajectoryRecord record;
  bool ok = false;
  int failed_round = 0;
  std::string message;
  double wall_seconds = 0.0;
};

Algorithm parse_algorithm(const std::string& name) {
  if (name == "osnr") return Algorithm::osnr;
  if (name == "osnr_ec") return Algorithm::osnr_ec;
  if (name == "ogd") return Algorithm::ogd;
  if (name == "onm") return Algorithm::onm;
  raise(ErrorKind::invalid_argument, "config: unknown algorithm '" + name + "'");
}

std::vector<AlgoConfig> algo_matrix(const ExperimentConfig& cfg, bool constrained) {
  std::vector<AlgoConfig> out;
  for (const std::string& name : cfg.algorithms) {
    const Algorithm a = parse_algorithm(name);
    if (constrained && (a == Algorithm::osnr || a == Algorithm::ogd)) {
      raise(ErrorKind::invalid_argument,
            "config: algorithm '" + name + "' is unconstrained; the " +
                cfg.experiment + " experiment needs osnr_ec or onm");
    }
    if (!constrained && a == Algorithm::osnr_ec) {
      raise(ErrorKind::invalid_argument,
            "config: osnr_ec needs a constrained experiment (opf)");
    }
    if (a == Algorithm::osnr || a == Algorithm::osnr_ec) {
      for (double rho : cfg.rhos) {
        AlgoConfig ac;
        ac.algorithm = a;
        ac.sketched = true;
        ac.rho = rho;
        ac.label = name + "_rho" + fmt_short(rho);
        out.push_back(ac);
      }
    } else {
      AlgoConfig ac;
      ac.algorithm = a;
      ac.label = name;
      out.push_back(ac);
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::invalid_argument, "cannot write " + path.string());
  out << body;
}

// ---- per-experiment run bodies ------------------------------------------

RunConfig base_run_config(const ExperimentConfig& cfg, const AlgoConfig& ac,
                          std::uint64_t seed) {
  RunConfig rc;
  rc.T = cfg.T;
  rc.seed = seed;
  rc.algorithm = ac.algorithm;
  rc.sketch = SketchSpec::by_fraction(ac.sketched ? ac.rho : 1.0);
  rc.eta = cfg.eta;
  rc.record_decisions = cfg.record_decisions;
  return rc;
}

TrajectoryRecord run_track(const ExperimentConfig& cfg, const AlgoConfig& ac,
                           std::uint64_t seed) {
  SeedStream problem_rng = SeedStream(seed).derive("problem");
  TargetTrackingProblem problem(cfg.n, cfg.m, problem_rng);
  // Trackers start from the initial target fix; the regret then measures how
  // well each update follows the moving zero.
  const Eigen::VectorXd x0 = problem.target();
  RunConfig rc = resolve_onm(base_run_config(cfg, ac, seed), cfg.m);
  if (rc.algorithm == Algorithm::ogd) return ogd_run(problem, rc, x0);
  return osnr_run(problem, rc, x0);
}

TrajectoryRecord run_root_demo(const ExperimentConfig& cfg, const AlgoConfig& ac,
                               std::uint64_t seed) {
  SeedStream problem_rng = SeedStream(seed).derive("problem");
  Eigen::MatrixXd W(cfg.m, cfg.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.m));
  for (int j = 0; j < cfg.n; ++j) {
    for (int i = 0; i < cfg.m; ++i) W(i, j) = scale * problem_rng.normal();
  }
  Eigen::VectorXd x_star(cfg.n);
  for (int i = 0; i < cfg.n; ++i) x_star[i] = 10.0 * problem_rng.normal();
  AffineResidualField problem(std::move(W), std::move(x_star), cfg.drift);

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cfg.n);
  RunConfig rc = resolve_onm(base_run_config(cfg, ac, seed), cfg.m);
  if (rc.algorithm == Algorithm::ogd) return ogd_run(problem, rc, x0);
  return osnr_run(problem, rc, x0);
}

TrajectoryRecord run_opf(const ExperimentConfig& cfg, const AlgoConfig& ac,
                         std::uint64_t seed, const matpower::PowerCase& pc,
                         const AffineConstraintSet& cs, AlphaRule rule) {
  OpfBuild build = opf_build(pc, rule);
  PenalizedOpfProblem& problem = build.problem;
  const Eigen::VectorXd x0 =
      project_onto(cs, Eigen::VectorXd::Zero(cs.n()), build.b0);

  RunConfig rc = resolve_onm(base_run_config(cfg, ac, seed), cs.reduced_dim(), true);

  // Dynamic regret needs the round optimum; solve each frozen round with a
  // warm start from the previous one. The tolerance is scaled by the full
  // gradient's magnitude: the reduced gradient cannot cancel below the
  // rounding floor of the Lagrangian terms it is built from.
  Eigen::VectorXd warm = x0;
  auto value = [&problem](const Eigen::VectorXd& y) { return problem.value(y); };
  GradFn grad = [&problem](const Eigen::VectorXd& y) { return problem.gradient(y); };
  HessFn hess = [&problem](const Eigen::VectorXd& y) { return problem.hessian(y); };
  RoundObserver observer = [&](const RoundView& view) -> std::optional<double> {
    const double scale = problem.gradient(warm).norm();
    OracleResult res =
        round_oracle(value, grad, hess, &cs, view.b, warm, 1e-10 * (1.0 + scale));
    warm = res.x;
    return res.value;
  };
  return osnr_ec_run(problem, cs, rc, x0, observer);
}

// ---- CSV bodies -----------------------------------------------------------

std::string run_csv_body(const TrajectoryRecord& rec, bool constrained) {
  std::string body;
  body += constrained
              ? "round,loss,residual_norm,violation_norm,b_delta_norm,oracle_loss,gram_rank\n"
              : "round,loss,residual_norm,gram_rank\n";
  for (int t = 0; t < rec.rounds; ++t) {
    const auto i = static_cast<std::size_t>(t);
    body += std::to_string(t + 1);
    body += ',';
    body += fmt(rec.loss[i]);
    body += ',';
    body += fmt(rec.residual_norm[i]);
    if (constrained) {
      body += ',';
      body += fmt(rec.violation_norm[i]);
      body += ',';
      body += fmt(rec.b_delta_norm[i]);
      body += ',';
      body += fmt(rec.oracle_loss.empty() ? std::nan("") : rec.oracle_loss[i]);
    }
    body += ',';
    body += std::to_string(rec.gram_rank[i]);
    body += '\n';
  }
  return body;
}

std::string agg_csv_body(const SeriesStats& regret, const SeriesStats* vio) {
  std::string body = vio ? "round,regret_mean,regret_std,violation_mean,violation_std\n"
                         : "round,regret_mean,regret_std\n";
  for (std::size_t t = 0; t < regret.mean.size(); ++t) {
    body += std::to_string(t + 1);
    body += ',';
    body += fmt(regret.mean[t]);
    body += ',';
    body += fmt(regret.stddev[t]);
    if (vio) {
      body += ',';
      body += fmt(vio->mean[t]);
      body += ',';
      body += fmt(vio->stddev[t]);
    }
    body += '\n';
  }
  return body;
}

std::string times_csv_body(const SeriesStats& st) {
  std::string body = "round,steptime_mean,steptime_std\n";
  for (std::size_t t = 0; t < st.mean.size(); ++t) {
    body += std::to_string(t + 1);
    body += ',';
    body += fmt(st.mean[t]);
    body += ',';
    body += fmt(st.stddev[t]);
    body += '\n';
  }
  return body;
}

}  // namespace

void apply_key(ExperimentConfig& cfg, const std::string& raw_key,
               const std::string& value) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "experiment") {
    cfg.experiment = value;
  } else if (key == "n") {
    cfg.n = static_cast<int>(to_int(value, key));
  } else if (key == "m") {
    cfg.m = static_cast<int>(to_int(value, key));
  } else if (key == "case") {
    cfg.case_path = value;
  } else if (key == "T" || key == "t") {
    cfg.T = static_cast<int>(to_int(value, key));
  } else if (key == "runs") {
    cfg.runs = static_cast<int>(to_int(value, key));
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(to_int(value, key));
  } else if (key == "seed") {
    cfg.base_seed = static_cast<std::uint64_t>(to_int(value, key));
  } else if (key == "algorithms" || key == "algorithm" || key == "algo") {
    cfg.algorithms = split(value, ',');
  } else if (key == "rho") {
    cfg.rhos.clear();
    for (const std::string& r : split(value, ',')) {
      const double rho = to_double(r, key);
      if (!(rho > 0.0) || rho > 1.0) {
        raise(ErrorKind::invalid_argument,
              "config: rho=" + r + " outside (0, 1]");
      }
      cfg.rhos.push_back(rho);
    }
  } else if (key == "eta") {
    cfg.eta = to_double(value, key);
  } else if (key == "alpha_rule") {
    cfg.alpha_rule = value;
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "record_decisions") {
    cfg.record_decisions = to_bool(value, key);
  } else if (key == "drift") {
    cfg.drift = to_double(value, key);
  } else {
    raise(ErrorKind::invalid_argument, "config: unknown key '" + raw_key + "'");
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::invalid_argument, "cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorKind::invalid_argument,
            "config: line " + std::to_string(lineno) + " is not 'key = value'");
    }
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.experiment != "track" && cfg.experiment != "opf" &&
      cfg.experiment != "root-demo") {
    raise(ErrorKind::invalid_argument,
          "config: unknown experiment '" + cfg.experiment + "'");
  }
  if (cfg.T < 1) raise(ErrorKind::invalid_argument, "config: T must be >= 1");
  if (cfg.runs < 1) raise(ErrorKind::invalid_argument, "config: runs must be >= 1");
  if (cfg.jobs < 1) raise(ErrorKind::invalid_argument, "config: jobs must be >= 1");
  if (cfg.algorithms.empty()) {
    raise(ErrorKind::invalid_argument, "config: no algorithms selected");
  }
  for (double r : cfg.rhos) {
    if (!(r > 0.0) || r > 1.0) {
      raise(ErrorKind::invalid_argument,
            "config: rho=" + fmt_short(r) + " outside (0, 1]");
    }
  }
  if (cfg.experiment == "opf") {
    if (cfg.case_path.empty()) {
      raise(ErrorKind::invalid_argument, "config: opf experiment needs a case file");
    }
    if (cfg.alpha_rule != "paper" && cfg.alpha_rule != "inverse-square" &&
        cfg.alpha_rule != "inverse_square") {
      raise(ErrorKind::invalid_argument,
            "config: unknown alpha rule '" + cfg.alpha_rule + "'");
    }
  } else {
    if (cfg.n < 1 || cfg.m < 1) {
      raise(ErrorKind::invalid_argument, "config: n and m must be >= 1");
    }
  }
}

int run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t_start = std::chrono::steady_clock::now();
  const bool constrained = cfg.experiment == "opf";
  const std::vector<AlgoConfig> matrix = algo_matrix(cfg, constrained);

  // Shared immutable inputs for opf runs.
  matpower::PowerCase pc;
  AffineConstraintSet cs;
  AlphaRule rule = AlphaRule::paper;
  if (constrained) {
    pc = matpower::load_case_file(cfg.case_path);
    rule = cfg.alpha_rule == "paper" ? AlphaRule::paper : AlphaRule::inverse_square;
    cs = build_constraints(opf_build(pc, rule).A);
  }

  const std::size_t total = matrix.size() * static_cast<std::size_t>(cfg.runs);
  std::vector<RunResult> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::size_t i;
    while ((i = next.fetch_add(1)) < total) {
      const AlgoConfig& ac = matrix[i / static_cast<std::size_t>(cfg.runs)];
      const int run = static_cast<int>(i % static_cast<std::size_t>(cfg.runs));
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(run);
      RunResult& res = results[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (cfg.experiment == "track") {
          res.record = run_track(cfg, ac, seed);
        } else if (cfg.experiment == "root-demo") {
          res.record = run_root_demo(cfg, ac, seed);
        } else {
          res.record = run_opf(cfg, ac, seed, pc, cs, rule);
        }
        res.ok = true;
      } catch (const RunError& e) {
        res.failed_round = e.round();
        res.message = e.what();
      } catch (const std::exception& e) {
        res.message = e.what();
      }
      res.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    }
  };
  {
    std::vector<std::thread> pool;
    const int threads = std::min<int>(cfg.jobs, static_cast<int>(total));
    pool.reserve(static_cast<std::size_t>(threads));
    for (int j = 0; j < threads; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  fs::create_directories(cfg.out_dir);
  json manifest;
  manifest["tool"] = "osnr_bench";
  manifest["version"] = "1.0.0";
  manifest["kernels"] = kernels::active().name;
  manifest["constrained"] = constrained;
  manifest["experiment"] = {
      {"experiment", cfg.experiment}, {"n", cfg.n},
      {"m", cfg.m},                   {"case", cfg.case_path},
      {"T", cfg.T},                   {"runs", cfg.runs},
      {"jobs", cfg.jobs},             {"seed", cfg.base_seed},
      {"algorithms", cfg.algorithms}, {"rho", cfg.rhos},
      {"eta", cfg.eta},               {"alpha_rule", cfg.alpha_rule},
      {"out", cfg.out_dir},           {"record_decisions", cfg.record_decisions},
      {"drift", cfg.drift}};
  manifest["configs"] = json::array();

  int failures = 0;
  for (std::size_t c = 0; c < matrix.size(); ++c) {
    const AlgoConfig& ac = matrix[c];
    json jc;
    jc["label"] = ac.label;
    jc["algorithm"] = algorithm_name(ac.algorithm);
    if (ac.sketched) jc["rho"] = ac.rho;
    jc["runs"] = json::array();

    std::vector<const TrajectoryRecord*> ok_runs;
    std::vector<std::string> run_files;
    double mean_step = 0.0;
    int step_count = 0;
    for (int run = 0; run < cfg.runs; ++run) {
      const RunResult& res =
          results[c * static_cast<std::size_t>(cfg.runs) + static_cast<std::size_t>(run)];
      json jr;
      jr["seed"] = cfg.base_seed + static_cast<std::uint64_t>(run);
      jr["status"] = res.ok ? "ok" : "failed";
      jr["wall_seconds"] = res.wall_seconds;
      if (res.ok) {
        const std::string file =
            "run_" + ac.label + "_seed" +
            std::to_string(cfg.base_seed + static_cast<std::uint64_t>(run)) + ".csv";
        write_file(fs::path(cfg.out_dir) / file,
                   run_csv_body(res.record, constrained));
        run_files.push_back(file);
        jr["file"] = file;
        jr["singular_guards"] = res.record.singular_guards;
        const double steps = std::accumulate(res.record.step_seconds.begin(),
                                             res.record.step_seconds.end(), 0.0);
        const double per_step =
            res.record.rounds > 0 ? steps / res.record.rounds : 0.0;
        jr["mean_step_seconds"] = per_step;
        mean_step += per_step;
        ++step_count;
        ok_runs.push_back(&res.record);
      } else {
        ++failures;
        jr["round"] = res.failed_round;
        jr["message"] = res.message;
      }
      jc["runs"].push_back(jr);
    }
    jc["files"] = run_files;
    if (step_count > 0) jc["mean_step_seconds"] = mean_step / step_count;

    if (!ok_runs.empty()) {
      std::vector<std::vector<double>> regret_series;
      std::vector<std::vector<double>> vio_series;
      std::vector<std::vector<double>> time_series;
      for (const TrajectoryRecord* r : ok_runs) {
        regret_series.push_back(constrained
                                    ? regret_dynamic(*r, r->oracle_loss).cumulative
                                    : regret_zero(*r).cumulative);
        if (constrained) vio_series.push_back(violation(*r).cumulative);
        time_series.push_back(r->step_seconds);
      }
      const SeriesStats regret = aggregate_series(regret_series);
      SeriesStats vio;
      if (constrained) vio = aggregate_series(vio_series);
      const std::string agg_file = "agg_" + ac.label + ".csv";
      write_file(fs::path(cfg.out_dir) / agg_file,
                 agg_csv_body(regret, constrained ? &vio : nullptr));
      jc["aggregate"] = agg_file;
      const std::string times_file = "times_" + ac.label + ".csv";
      write_file(fs::path(cfg.out_dir) / times_file,
                 times_csv_body(aggregate_series(time_series)));
      jc["times"] = times_file;
    }
    manifest["configs"].push_back(jc);
  }

  manifest["failures"] = failures;
  manifest["total_wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  write_file(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");
  return failures;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::invalid_argument, "cannot open " + path.string());
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  return t;
}

}  // namespace

std::string emit_plotdata(const std::string& bundle_dir,
                          const std::string& quantity) {
  if (quantity != "regret" && quantity != "violation" && quantity != "steptime") {
    raise(ErrorKind::invalid_argument,
          "plot-data: unknown quantity '" + quantity + "'");
  }
  const fs::path dir(bundle_dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) {
    raise(ErrorKind::invalid_argument,
          "plot-data: no manifest.json in " + bundle_dir);
  }
  json manifest = json::parse(mf);

  std::string body = "round,algorithm,rho,mean,std\n";
  const bool constrained = manifest.value("constrained", false);
  if (quantity == "violation" && !constrained) {
    body += "warning,no violation series in this bundle,,,\n";
  } else {
    for (const json& jc : manifest["configs"]) {
      const std::string file = quantity == "steptime"
                                   ? jc.value("times", "")
                                   : jc.value("aggregate", "");
      if (file.empty()) continue;
      const Table t = read_csv(dir / file);
      const std::string mean_col =
          quantity == "regret" ? "regret_mean"
          : quantity == "violation" ? "violation_mean" : "steptime_mean";
      const std::string std_col =
          quantity == "regret" ? "regret_std"
          : quantity == "violation" ? "violation_std" : "steptime_std";
      const int cm = t.col(mean_col);
      const int cstd = t.col(std_col);
      if (cm < 0 || cstd < 0) continue;
      const std::string algo = jc.value("algorithm", "?");
      const std::string rho =
          jc.contains("rho") ? fmt_short(jc["rho"].get<double>()) : "";
      for (const auto& row : t.rows) {
        body += row[0];
        body += ',';
        body += algo;
        body += ',';
        body += rho;
        body += ',';
        body += row[static_cast<std::size_t>(cm)];
        body += ',';
        body += row[static_cast<std::size_t>(cstd)];
        body += '\n';
      }
    }
  }
  const fs::path out = dir / ("plot_" + quantity + ".csv");
  write_file(out, body);
  return out.string();
}

}  // namespace osnr::bench
