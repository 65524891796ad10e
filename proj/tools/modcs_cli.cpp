// Command-line front end: simulate, check, ric, zeta, figure3.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "modcs/analysis.hpp"
#include "modcs/errors.hpp"
#include "modcs/harness.hpp"

namespace fs = std::filesystem;
using namespace modcs;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void WriteText(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void PrintSummary(const ExperimentResult& r, std::ostream& out) {
  const MetricSeries& m = r.metrics;
  const int t_from = std::min(20, m.t.empty() ? 0 : m.t.back());
  out << std::left << std::setw(16) << "algorithm" << std::setw(14) << "mean_nmse"
      << std::setw(14) << "max_nmse" << std::setw(14) << "mean_extras" << std::setw(14)
      << "mean_misses" << "trials\n";
  for (std::size_t a = 0; a < m.algorithms.size(); ++a) {
    const int t_to = m.t.empty() ? 0 : m.t.back();
    out << std::left << std::setw(16) << m.algorithms[a] << std::setw(14)
        << m.MeanOver(m.nmse[a], t_from, t_to) << std::setw(14)
        << m.MaxOver(m.nmse[a], t_from, t_to) << std::setw(14)
        << m.MeanOver(m.extras[a], t_from, t_to) << std::setw(14)
        << m.MeanOver(m.misses[a], t_from, t_to) << m.trials_used[a] << '\n';
  }
  out << "(means over t >= " << t_from << ")\n";
}

void SaveTrajectories(const ExperimentSpec& spec, const std::string& dir) {
  const SensingSystem system = BuildSensingSystem(spec);
  const SequenceRunner runner(system);
  const std::uint64_t seed = TrialSeed(spec.master_seed, spec.first_trial);
  bool truth_written = false;
  for (const auto& a : spec.algorithms) {
    RecoveryConfig cfg = a;
    if (!cfg.epsilon) cfg.epsilon = spec.sensing.SolverEpsilon();
    std::vector<std::pair<int, Eigen::VectorXd>> truth, est;
    runner.Run(spec.model, cfg, spec.horizon, seed,
               [&](const RecoveryStep& s, const SparseSignal& x) {
                 truth.emplace_back(s.t, x.values);
                 est.emplace_back(s.t, s.x_hat);
               });
    if (!truth_written) {
      WriteTrajectoryCsv((fs::path(dir) / "trajectory_truth.csv").string(), truth);
      truth_written = true;
    }
    WriteTrajectoryCsv(
        (fs::path(dir) / ("trajectory_" + AlgorithmName(a.algorithm) + ".csv")).string(), est);
  }
}

struct MatrixSource {
  std::string path;
  int n = 59;
  int m = 200;
  std::uint64_t seed = 1;
};

Eigen::MatrixXd LoadOrGenerate(const MatrixSource& src, std::uint64_t* seed_used) {
  if (!src.path.empty()) return LoadMatrixCsv(src.path, seed_used);
  *seed_used = src.seed;
  return GaussianMatrix(src.n, src.m, MatrixSeed(src.seed));
}

void AddMatrixOptions(CLI::App* cmd, MatrixSource& src) {
  cmd->add_option("--matrix", src.path, "Matrix CSV (first line n,m,seed)");
  cmd->add_option("--n", src.n, "Rows of a generated Gaussian matrix");
  cmd->add_option("--m", src.m, "Columns of a generated Gaussian matrix");
  cmd->add_option("--matrix-seed", src.seed, "Master seed of a generated matrix");
}

RocOptions MakeRocOptions(const std::string& mode, std::uint64_t samples, std::uint64_t budget,
                          std::uint64_t seed) {
  RocOptions o;
  if (mode == "exhaustive") {
    o.mode = EstimateMode::kExhaustive;
  } else if (mode == "sampled") {
    o.mode = EstimateMode::kSampled;
  } else if (mode == "auto") {
    o.mode = EstimateMode::kAuto;
  } else {
    throw ConfigurationError("--mode must be exhaustive, sampled or auto");
  }
  o.num_samples = samples;
  o.budget = budget;
  o.seed = seed;
  return o;
}

void WriteManifest(const fs::path& dir, const nlohmann::json& body) {
  nlohmann::json j = body;
  j["version"] = kVersion;
  WriteText(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive sparse reconstruction: simulation and stability analysis"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a config file");
  std::string sim_config;
  std::vector<std::string> sim_sets;
  std::string sim_output = "out/simulate";
  int sim_trials = -1, sim_horizon = -1, sim_threads = -1;
  long long sim_seed = -1;
  bool sim_traj = false;
  sim->add_option("--config", sim_config, "key=value config file");
  sim->add_option("--set", sim_sets, "Override a config key (key=value), repeatable");
  sim->add_option("--output", sim_output, "Output directory");
  sim->add_option("--trials", sim_trials, "Monte Carlo trials");
  sim->add_option("--horizon", sim_horizon, "Time steps");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
  sim->add_flag("--save-trajectory", sim_traj, "Also write first-trial signal trajectories");

  // check
  auto* chk = app.add_subcommand("check", "Evaluate the hypotheses of a stability result");
  std::string chk_result = "addlsdel";
  BoundInputs in;
  in.epsilon = 0.1266 * std::sqrt(59.0);
  in.alpha_add = 0.1266 / 2.0;
  std::string chk_init = "oracle";
  int chk_false_adds = -1;
  MatrixSource chk_src;
  std::string chk_mode = "auto";
  std::uint64_t chk_samples = 20000, chk_budget = kDefaultSubsetBudget, chk_sample_seed = 1;
  std::string chk_output = "out/check";
  chk->add_option("--theorem", chk_result,
                  "modcs | addlsdel | addlsdel-spread | addlsdel-general | lscs");
  chk->add_option("--s0", in.s0, "Support size");
  chk->add_option("--sa", in.sa, "Additions per step");
  chk->add_option("--eps", in.epsilon, "Noise bound");
  chk->add_option("--r", in.r, "Magnitude increment");
  chk->add_option("--d", in.d, "Magnitude levels");
  chk->add_option("--alpha-add", in.alpha_add, "Addition threshold");
  chk->add_option("--d0", in.d0, "Miss level for addlsdel-general");
  chk->add_option("--zeta", in.zeta, "LS error spread factor");
  chk->add_option("--init", chk_init, "oracle | simplecs");
  chk->add_option("--false-adds", chk_false_adds, "Measured max false additions per step");
  AddMatrixOptions(chk, chk_src);
  chk->add_option("--mode", chk_mode, "exhaustive | sampled | auto");
  chk->add_option("--samples", chk_samples, "Subsets per sampled constant");
  chk->add_option("--budget", chk_budget, "Exhaustive subset budget");
  chk->add_option("--sample-seed", chk_sample_seed, "Seed for subset sampling");
  chk->add_option("--output", chk_output, "Output directory");
  int chk_f = -1;
  chk->add_option("--f", chk_f, "Allowed false additions (addlsdel-general)");

  // ric
  auto* ric = app.add_subcommand("ric", "Estimate restricted isometry / orthogonality constants");
  MatrixSource ric_src;
  int ric_s = 2, ric_s2 = 0;
  std::string ric_mode = "auto", ric_save, ric_output = "out/ric";
  std::uint64_t ric_samples = 100000, ric_budget = kDefaultSubsetBudget, ric_sample_seed = 1;
  AddMatrixOptions(ric, ric_src);
  ric->add_option("--s", ric_s, "Subset size (S, or S1 with --s2)");
  ric->add_option("--s2", ric_s2, "Second subset size for the orthogonality constant");
  ric->add_option("--mode", ric_mode, "exhaustive | sampled | auto");
  ric->add_option("--samples", ric_samples, "Random subsets when sampling");
  ric->add_option("--budget", ric_budget, "Exhaustive subset budget");
  ric->add_option("--sample-seed", ric_sample_seed, "Seed for subset sampling");
  ric->add_option("--save-matrix", ric_save, "Write the matrix used to this CSV");
  ric->add_option("--output", ric_output, "Output directory");

  // zeta
  auto* zeta = app.add_subcommand("zeta", "Estimate the LS error spread factor");
  ZetaParams zp;
  std::string zeta_output = "out/zeta";
  zeta->add_option("--m", zp.m, "Signal length");
  zeta->add_option("--s0", zp.s0, "Support size");
  zeta->add_option("--sa", zp.sa, "Additions per step");
  zeta->add_option("--r", zp.r, "Magnitude increment");
  zeta->add_option("--d", zp.d, "Magnitude levels");
  zeta->add_option("--n", zp.n, "Measurements (0 = ceil(0.3861 S0 log2 m))");
  zeta->add_option("--c", zp.c, "Noise half-width");
  zeta->add_option("--trials", zp.trials, "Trials");
  zeta->add_option("--horizon", zp.horizon, "Time steps per trial");
  zeta->add_option("--seed", zp.seed, "Master seed");
  zeta->add_option("--threads", zp.threads, "Worker threads (0 = all cores)");
  zeta->add_option("--output", zeta_output, "Output directory");

  // figure3
  auto* fig = app.add_subcommand("figure3", "Run the four preset reproduction panels");
  std::string fig_panel = "all", fig_output = "out/figure3";
  int fig_trials = 100, fig_horizon = 200, fig_threads = 0;
  std::uint64_t fig_seed = 1;
  fig->add_option("--panel", fig_panel, "a | b | c | d | all");
  fig->add_option("--trials", fig_trials, "Monte Carlo trials");
  fig->add_option("--horizon", fig_horizon, "Time steps");
  fig->add_option("--seed", fig_seed, "Master seed");
  fig->add_option("--threads", fig_threads, "Worker threads (0 = all cores)");
  fig->add_option("--output", fig_output, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) {
      std::map<std::string, std::string> kv;
      if (!sim_config.empty()) kv = ReadKeyValueFile(sim_config);
      for (const auto& s : sim_sets) {
        const auto parsed = ParseKeyValues(s);
        if (parsed.empty()) throw ConfigurationError("--set expects key=value");
        for (const auto& [k, v] : parsed) kv[k] = v;
      }
      if (sim_trials >= 0) kv["trials"] = std::to_string(sim_trials);
      if (sim_horizon >= 0) kv["horizon"] = std::to_string(sim_horizon);
      if (sim_seed >= 0) kv["seed"] = std::to_string(sim_seed);
      if (sim_threads >= 0) kv["threads"] = std::to_string(sim_threads);
      ExperimentSpec spec = SpecFromKeyValues(kv);
      const std::string dir = spec.output_dir.empty() || sim->count("--output")
                                  ? sim_output
                                  : spec.output_dir;
      const ExperimentResult r = RunExperiment(spec);
      const OutputFiles files = WriteExperimentOutputs(r, dir);
      if (sim_traj) SaveTrajectories(spec, dir);
      PrintSummary(r, std::cout);
      std::cout << "wrote " << files.metrics << ", " << files.manifest << '\n';
    } else if (*chk) {
      in.init_mode = chk_init == "simplecs" ? InitMode::kSimpleCS : InitMode::kOracle;
      if (chk_init != "simplecs" && chk_init != "oracle") {
        throw ConfigurationError("--init must be oracle or simplecs");
      }
      if (chk_false_adds >= 0) in.measured_false_additions = chk_false_adds;
      if (chk_f >= 0) in.f = chk_f;
      const ResultKind kind = ParseResult(chk_result);
      std::uint64_t seed_used = 0;
      const Eigen::MatrixXd a = LoadOrGenerate(chk_src, &seed_used);
      const MatrixConstantProvider provider(
          a, MakeRocOptions(chk_mode, chk_samples, chk_budget, chk_sample_seed));
      const ConditionReport rep = CheckResult(kind, in, provider);
      const std::string text = FormatReportText(rep);
      std::cout << "matrix: " << a.rows() << "x" << a.cols() << " seed " << seed_used << "\n"
                << text;
      const fs::path dir(chk_output);
      WriteText(dir / "conditions.txt", text);
      WriteText(dir / "conditions.csv", FormatReportCsv(rep));
      WriteManifest(dir, {{"command", "check"},
                          {"result", ResultName(kind)},
                          {"s0", in.s0},
                          {"sa", in.sa},
                          {"epsilon", in.epsilon},
                          {"r", in.r},
                          {"d", in.d},
                          {"alpha_add", in.alpha_add},
                          {"d0", in.d0},
                          {"zeta", in.zeta},
                          {"matrix", chk_src.path.empty() ? "generated" : chk_src.path},
                          {"matrix_rows", a.rows()},
                          {"matrix_cols", a.cols()},
                          {"matrix_seed", seed_used},
                          {"mode", chk_mode},
                          {"samples", chk_samples},
                          {"sample_seed", chk_sample_seed}});
    } else if (*ric) {
      std::uint64_t seed_used = 0;
      const Eigen::MatrixXd a = LoadOrGenerate(ric_src, &seed_used);
      if (!ric_save.empty()) SaveMatrixCsv(ric_save, a, seed_used);
      const RocOptions opts = MakeRocOptions(ric_mode, ric_samples, ric_budget, ric_sample_seed);
      const RicRocEstimate e = ric_s2 > 0 ? Roc(a, ric_s, ric_s2, opts) : Ric(a, ric_s, opts);
      const std::string text = FormatEstimate(e);
      std::cout << text;
      const fs::path dir(ric_output);
      WriteText(dir / "estimate.txt", text);
      WriteManifest(dir, {{"command", "ric"},
                          {"matrix", ric_src.path.empty() ? "generated" : ric_src.path},
                          {"matrix_rows", a.rows()},
                          {"matrix_cols", a.cols()},
                          {"matrix_seed", seed_used},
                          {"s1", ric_s},
                          {"s2", ric_s2},
                          {"mode", ric_mode},
                          {"samples", ric_samples},
                          {"sample_seed", ric_sample_seed},
                          {"value", e.value},
                          {"exact", e.IsExact()}});
    } else if (*zeta) {
      const ZetaResult z = EstimateZeta(zp);
      std::ostringstream text;
      text << "zeta=" << std::setprecision(6) << z.zeta << "\nn=" << z.n
           << "\nsamples=" << z.samples << "\nfailed_steps=" << z.failed_steps << '\n';
      std::cout << text.str();
      const fs::path dir(zeta_output);
      WriteText(dir / "zeta.txt", text.str());
      WriteManifest(dir, {{"command", "zeta"},
                          {"m", zp.m},
                          {"s0", zp.s0},
                          {"sa", zp.sa},
                          {"r", zp.r},
                          {"d", zp.d},
                          {"n", z.n},
                          {"c", zp.c},
                          {"trials", zp.trials},
                          {"horizon", zp.horizon},
                          {"seed", zp.seed},
                          {"zeta", z.zeta}});
    } else if (*fig) {
      std::string panels = fig_panel == "all" ? "abcd" : fig_panel;
      if (panels.empty()) throw ConfigurationError("--panel must be a, b, c, d or all");
      for (char p : panels) {
        ExperimentSpec spec = Figure3Preset(p);
        spec.trials = fig_trials;
        spec.horizon = fig_horizon;
        spec.master_seed = fig_seed;
        spec.threads = fig_threads;
        const std::string dir = (fs::path(fig_output) / std::string(1, p)).string();
        const ExperimentResult r = RunExperiment(spec);
        WriteExperimentOutputs(r, dir);
        std::cout << "panel " << p << " (n=" << spec.sensing.n << ", r=" << spec.model.r
                  << ", d=" << spec.model.d << ") -> " << dir << '\n';
        PrintSummary(r, std::cout);
      }
    }
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
