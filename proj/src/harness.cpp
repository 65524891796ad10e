#include "modcs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "modcs/errors.hpp"
#include "modcs/random.hpp"

namespace modcs {

namespace {

namespace fs = std::filesystem;

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string Fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::string RuleName(EpsilonRule r) {
  return r == EpsilonRule::kNoiseBound ? "bound" : "rms";
}

std::string InitName(InitMode m) { return m == InitMode::kOracle ? "oracle" : "simplecs"; }

}  // namespace

double SensingSpec::SolverEpsilon() const {
  if (epsilon) return *epsilon;
  if (!noise) return 0.0;
  const double rows = static_cast<double>(n);
  return epsilon_rule == EpsilonRule::kNoiseBound ? c * std::sqrt(rows)
                                                  : c * std::sqrt(rows / 3.0);
}

void ExperimentSpec::Validate() const {
  model.Validate();
  if (trials < 1) throw ConfigurationError("trials must be >= 1");
  if (horizon < 1) throw ConfigurationError("horizon must be >= 1");
  if (first_trial < 0) throw ConfigurationError("first_trial must be >= 0");
  if (algorithms.empty()) throw ConfigurationError("at least one algorithm is required");
  if (sensing.n < 1 || sensing.n >= model.m) throw ConfigurationError("require 0 < n < m");
  if (sensing.n0 && (*sensing.n0 < sensing.n || *sensing.n0 > model.m)) {
    throw ConfigurationError("require n <= n0 <= m");
  }
  if (sensing.noise && sensing.c < 0.0) throw ConfigurationError("noise c must be >= 0");
  if (sensing.epsilon && *sensing.epsilon < 0.0) {
    throw ConfigurationError("epsilon must be >= 0");
  }
  std::vector<std::string> names;
  for (const auto& a : algorithms) {
    a.Validate();
    names.push_back(AlgorithmName(a.algorithm));
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ConfigurationError("algorithms must be distinct");
  }
}

std::uint64_t MatrixSeed(std::uint64_t master_seed) {
  return DeriveKey(master_seed, static_cast<std::uint64_t>(StreamTag::kMatrix));
}

std::uint64_t TrialSeed(std::uint64_t master_seed, int trial) {
  return DeriveKey(master_seed, static_cast<std::uint64_t>(StreamTag::kTrial),
                   static_cast<std::uint64_t>(trial));
}

SensingSystem BuildSensingSystem(const ExperimentSpec& spec) {
  const NoiseSpec noise = spec.sensing.noise ? NoiseSpec::Uniform(spec.sensing.c) : NoiseSpec::None();
  return MakeGaussianSystem(spec.sensing.n, spec.model.m, spec.sensing.n0, noise,
                            MatrixSeed(spec.master_seed));
}

int MetricSeries::AlgorithmIndex(const std::string& name) const {
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    if (algorithms[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double MetricSeries::MeanOver(const std::vector<double>& v, int t_from, int t_to) const {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t_from && t[i] <= t_to) {
      sum += v[i];
      ++count;
    }
  }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

double MetricSeries::MaxOver(const std::vector<double>& v, int t_from, int t_to) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t_from && t[i] <= t_to) best = std::max(best, v[i]);
  }
  return best;
}

ExperimentResult RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  ExperimentResult res;
  res.spec = spec;
  for (const auto& a : spec.algorithms) res.algorithm_names.push_back(AlgorithmName(a.algorithm));

  const SensingSystem system = BuildSensingSystem(spec);
  const SequenceRunner runner(system);
  const double eps = spec.sensing.SolverEpsilon();
  const std::size_t num_alg = spec.algorithms.size();
  res.records.assign(num_alg, std::vector<TrialRecord>(spec.trials));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < spec.trials; k = next++) {
      const int trial = spec.first_trial + k;
      const std::uint64_t seed = TrialSeed(spec.master_seed, trial);
      for (std::size_t a = 0; a < num_alg; ++a) {
        RecoveryConfig cfg = spec.algorithms[a];
        if (!cfg.epsilon) cfg.epsilon = eps;
        TrialRecord& rec = res.records[a][k];
        rec.trial = trial;
        rec.steps.reserve(spec.horizon + 1);
        try {
          runner.Run(spec.model, cfg, spec.horizon, seed,
                     [&](const RecoveryStep& s, const SparseSignal& truth) {
                       StepRecord sr;
                       sr.t = s.t;
                       sr.diag = s.diag;
                       sr.truth_size = static_cast<int>(truth.support.size());
                       sr.converged = s.converged;
                       sr.failed = s.failed;
                       rec.steps.push_back(sr);
                     });
        } catch (const std::exception& e) {
          rec.completed = false;
          rec.error = e.what();
          rec.steps.clear();
        }
      }
    }
  };
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int threads =
      std::max(1, std::min(spec.trials, spec.threads > 0 ? spec.threads : std::max(1, hw)));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  res.metrics = Aggregate(res.algorithm_names, res.records);
  return res;
}

MetricSeries Aggregate(const std::vector<std::string>& names,
                       const std::vector<std::vector<TrialRecord>>& records) {
  MetricSeries m;
  m.algorithms = names;
  // The time axis is taken from the first completed trial.
  for (const auto& alg : records) {
    for (const auto& tr : alg) {
      if (tr.completed && !tr.steps.empty()) {
        for (const auto& s : tr.steps) m.t.push_back(s.t);
        break;
      }
    }
    if (!m.t.empty()) break;
  }
  const std::size_t nt = m.t.size();
  for (std::size_t a = 0; a < records.size(); ++a) {
    std::vector<const TrialRecord*> order;
    for (const auto& tr : records[a]) order.push_back(&tr);
    std::stable_sort(order.begin(), order.end(),
                     [](const TrialRecord* x, const TrialRecord* y) { return x->trial < y->trial; });
    std::vector<double> err(nt, 0.0), pow(nt, 0.0), ext(nt, 0.0), mis(nt, 0.0), size(nt, 0.0);
    int used = 0;
    for (const TrialRecord* tr : order) {
      if (!tr->completed || tr->steps.size() != nt) continue;
      ++used;
      for (std::size_t i = 0; i < nt; ++i) {
        const StepRecord& s = tr->steps[i];
        err[i] += s.diag.sq_error;
        pow[i] += s.diag.power;
        ext[i] += s.diag.extras;
        mis[i] += s.diag.misses;
        size[i] += s.truth_size;
      }
    }
    std::vector<double> nmse(nt), extras(nt), misses(nt);
    for (std::size_t i = 0; i < nt; ++i) {
      nmse[i] = pow[i] > 0.0 ? err[i] / pow[i] : 0.0;
      extras[i] = size[i] > 0.0 ? ext[i] / size[i] : 0.0;
      misses[i] = size[i] > 0.0 ? mis[i] / size[i] : 0.0;
    }
    m.nmse.push_back(std::move(nmse));
    m.extras.push_back(std::move(extras));
    m.misses.push_back(std::move(misses));
    m.trials_used.push_back(used);
  }
  return m;
}

ExperimentResult MergeResults(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.algorithm_names != b.algorithm_names) {
    throw ConfigurationError("MergeResults: algorithm lists differ");
  }
  if (a.spec.master_seed != b.spec.master_seed || a.spec.horizon != b.spec.horizon) {
    throw ConfigurationError("MergeResults: specs differ in seed or horizon");
  }
  ExperimentResult out;
  out.spec = a.spec;
  out.spec.first_trial = std::min(a.spec.first_trial, b.spec.first_trial);
  out.spec.trials = a.spec.trials + b.spec.trials;
  out.algorithm_names = a.algorithm_names;
  out.records.resize(a.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    auto& dst = out.records[k];
    dst = a.records[k];
    dst.insert(dst.end(), b.records[k].begin(), b.records[k].end());
    std::stable_sort(dst.begin(), dst.end(),
                     [](const TrialRecord& x, const TrialRecord& y) { return x.trial < y.trial; });
    for (std::size_t i = 1; i < dst.size(); ++i) {
      if (dst[i].trial == dst[i - 1].trial) {
        throw ConfigurationError("MergeResults: overlapping trial indices");
      }
    }
  }
  out.metrics = Aggregate(out.algorithm_names, out.records);
  return out;
}

std::string MetricsCsv(const MetricSeries& m) {
  std::ostringstream out;
  out << "# schema: modcs-metrics v1\n";
  out << "algorithm,t,nmse,extras_norm,misses_norm,trials\n";
  for (std::size_t a = 0; a < m.algorithms.size(); ++a) {
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      out << m.algorithms[a] << ',' << m.t[i] << ',' << Fmt(m.nmse[a][i]) << ','
          << Fmt(m.extras[a][i]) << ',' << Fmt(m.misses[a][i]) << ',' << m.trials_used[a]
          << '\n';
    }
  }
  return out.str();
}

std::string DiagnosticsCsv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "# schema: modcs-diagnostics v1; -1 = not applicable\n";
  out << "trial,t,algorithm,misses_pred,extras_pred,misses_add,extras_add,misses,extras,"
         "sq_error,converged,failed\n";
  for (std::size_t a = 0; a < r.records.size(); ++a) {
    for (const auto& tr : r.records[a]) {
      for (const auto& s : tr.steps) {
        const StepDiagnostics& d = s.diag;
        out << tr.trial << ',' << s.t << ',' << r.algorithm_names[a] << ',' << d.misses_pred
            << ',' << d.extras_pred << ',' << d.misses_add << ',' << d.extras_add << ','
            << d.misses << ',' << d.extras << ',' << Fmt(d.sq_error) << ','
            << (s.converged ? 1 : 0) << ',' << (s.failed ? 1 : 0) << '\n';
      }
    }
  }
  return out.str();
}

std::string ManifestJson(const ExperimentResult& r, const OutputFiles& files) {
  using nlohmann::json;
  const ExperimentSpec& s = r.spec;
  json j;
  j["version"] = kVersion;
  j["name"] = s.name;
  j["model"] = {{"m", s.model.m},
                {"s0", s.model.s0},
                {"sa", s.model.sa},
                {"r", s.model.r},
                {"d", s.model.d},
                {"generator", s.model.generator == Generator::kGen1 ? "gen1" : "gen2"}};
  json sensing = {{"n", s.sensing.n},
                  {"noise", s.sensing.noise ? "uniform" : "none"},
                  {"c", s.sensing.c},
                  {"epsilon_rule", RuleName(s.sensing.epsilon_rule)},
                  {"solver_epsilon", s.sensing.SolverEpsilon()}};
  if (s.sensing.n0) sensing["n0"] = *s.sensing.n0;
  j["sensing"] = sensing;
  json algs = json::array();
  for (const auto& a : s.algorithms) {
    json aj = {{"algorithm", AlgorithmName(a.algorithm)},
               {"alpha", a.alpha},
               {"alpha_add", a.alpha_add},
               {"alpha_del", a.alpha_del},
               {"init", InitName(a.init_mode)}};
    if (a.epsilon) aj["epsilon"] = *a.epsilon;
    algs.push_back(aj);
  }
  j["algorithms"] = algs;
  j["horizon"] = s.horizon;
  j["trials"] = s.trials;
  j["first_trial"] = s.first_trial;
  j["master_seed"] = s.master_seed;
  j["matrix_seed"] = MatrixSeed(s.master_seed);
  j["trial_seed_rule"] = "DeriveKey(master_seed, trial_tag, trial_index)";
  json completed = json::object();
  for (std::size_t a = 0; a < r.algorithm_names.size(); ++a) {
    int failed_steps = 0;
    std::vector<std::string> errors;
    for (const auto& tr : r.records[a]) {
      for (const auto& st : tr.steps) failed_steps += st.failed ? 1 : 0;
      if (!tr.completed) errors.push_back(tr.error);
    }
    completed[r.algorithm_names[a]] = {{"completed_trials", r.metrics.trials_used[a]},
                                       {"failed_steps", failed_steps},
                                       {"trial_errors", errors}};
  }
  j["status"] = completed;
  j["files"] = {{"metrics", files.metrics},
                {"diagnostics", files.diagnostics},
                {"plots", files.plots}};
  return j.dump(2) + "\n";
}

std::vector<std::string> EmitPlotData(const MetricSeries& m, const std::string& output_dir) {
  if (m.algorithms.empty()) throw ConfigurationError("EmitPlotData: no algorithms");
  fs::create_directories(output_dir);
  const std::pair<const char*, const std::vector<std::vector<double>>*> panels[] = {
      {"nmse.dat", &m.nmse}, {"extras.dat", &m.extras}, {"misses.dat", &m.misses}};
  std::vector<std::string> paths;
  for (const auto& [file, data] : panels) {
    std::ostringstream out;
    out << "# t";
    for (const auto& a : m.algorithms) out << ' ' << a;
    out << '\n';
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      out << m.t[i];
      for (std::size_t a = 0; a < m.algorithms.size(); ++a) out << ' ' << Fmt((*data)[a][i]);
      out << '\n';
    }
    const std::string path = (fs::path(output_dir) / file).string();
    WriteFile(path, out.str());
    paths.push_back(path);
  }
  return paths;
}

OutputFiles WriteExperimentOutputs(const ExperimentResult& r, const std::string& output_dir) {
  fs::create_directories(output_dir);
  OutputFiles files;
  files.metrics = (fs::path(output_dir) / "metrics.csv").string();
  files.diagnostics = (fs::path(output_dir) / "diagnostics.csv").string();
  files.manifest = (fs::path(output_dir) / "manifest.json").string();
  WriteFile(files.metrics, MetricsCsv(r.metrics));
  WriteFile(files.diagnostics, DiagnosticsCsv(r));
  files.plots = EmitPlotData(r.metrics, output_dir);
  WriteFile(files.manifest, ManifestJson(r, files));
  return files;
}

void WriteTrajectoryCsv(const std::string& path,
                        const std::vector<std::pair<int, Eigen::VectorXd>>& trajectory) {
  std::ostringstream out;
  out << "# schema: modcs-trajectory v1\n";
  out << "t,entries\n";
  for (const auto& [t, x] : trajectory) {
    out << t << ',';
    bool first = true;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) continue;
      if (!first) out << ';';
      out << i << ':' << Fmt(x[i]);
      first = false;
    }
    out << '\n';
  }
  WriteFile(path, out.str());
}

RecoveryConfig DefaultRecoveryConfig(Algorithm a, double c, double r) {
  RecoveryConfig cfg;
  cfg.algorithm = a;
  cfg.alpha_add = c / 2.0;
  cfg.alpha_del = r / 2.0;
  cfg.alpha = (cfg.alpha_add + cfg.alpha_del) / 2.0;
  return cfg;
}

ExperimentSpec Figure3Preset(char panel) {
  ExperimentSpec spec;
  spec.model.m = 200;
  spec.model.s0 = 20;
  spec.model.sa = 2;
  spec.sensing.c = 0.1266;
  switch (panel) {
    case 'a':
      spec.sensing.n = 65;
      spec.model.r = 1.0;
      spec.model.d = 3;
      break;
    case 'b':
      spec.sensing.n = 59;
      spec.model.r = 1.0;
      spec.model.d = 3;
      break;
    case 'c':
      spec.sensing.n = 59;
      spec.model.r = 2.0 / 3.0;
      spec.model.d = 3;
      break;
    case 'd':
      spec.sensing.n = 59;
      spec.model.r = 2.0 / 5.0;
      spec.model.d = 5;
      break;
    default:
      throw ConfigurationError(std::string("unknown panel '") + panel + "' (a, b, c, d)");
  }
  spec.name = std::string("figure3") + panel;
  for (Algorithm a : {Algorithm::kSimpleCS, Algorithm::kGaussCS, Algorithm::kModCS,
                      Algorithm::kModCSAddLSDel, Algorithm::kLSCS}) {
    spec.algorithms.push_back(DefaultRecoveryConfig(a, spec.sensing.c, spec.model.r));
  }
  return spec;
}

}  // namespace modcs
