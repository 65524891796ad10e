#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modcs/recovery.hpp"
#include "modcs/sensing.hpp"
#include "modcs/signal_model.hpp"

namespace modcs {

inline constexpr const char* kVersion = "1.0.0";

// How the solver's noise bound is derived from the noise level when not
// given explicitly.
enum class EpsilonRule {
  kNoiseBound,  // c sqrt(n): the worst-case norm of uniform(-c, c) noise
  kNoiseRms,    // c sqrt(n / 3): the root-mean-square noise norm
};

struct SensingSpec {
  int n = 59;
  std::optional<int> n0;
  bool noise = true;
  double c = 0.1266;
  EpsilonRule epsilon_rule = EpsilonRule::kNoiseRms;
  std::optional<double> epsilon;  // overrides the rule

  double SolverEpsilon() const;
};

struct ExperimentSpec {
  std::string name = "experiment";
  ModelParams model;
  SensingSpec sensing;
  std::vector<RecoveryConfig> algorithms;
  int horizon = 200;
  int trials = 100;
  int first_trial = 0;  // trial indices are first_trial .. first_trial + trials - 1
  std::uint64_t master_seed = 1;
  std::string output_dir;
  int threads = 0;  // 0 = hardware concurrency

  void Validate() const;
};

std::uint64_t MatrixSeed(std::uint64_t master_seed);
std::uint64_t TrialSeed(std::uint64_t master_seed, int trial);

// The sensing system an experiment uses: A depends only on master_seed.
SensingSystem BuildSensingSystem(const ExperimentSpec& spec);

struct StepRecord {
  int t = 0;
  StepDiagnostics diag;
  int truth_size = 0;
  bool converged = true;
  bool failed = false;
};

struct TrialRecord {
  int trial = 0;
  bool completed = true;
  std::string error;
  std::vector<StepRecord> steps;
};

// Per-t ratio-of-means metrics, one row per algorithm.
struct MetricSeries {
  std::vector<std::string> algorithms;
  std::vector<int> t;
  std::vector<std::vector<double>> nmse;
  std::vector<std::vector<double>> extras;
  std::vector<std::vector<double>> misses;
  std::vector<int> trials_used;  // completed trials per algorithm

  int AlgorithmIndex(const std::string& name) const;  // -1 if absent
  // Mean / max of a per-t series over t in [t_from, t_to].
  double MeanOver(const std::vector<double>& v, int t_from, int t_to) const;
  double MaxOver(const std::vector<double>& v, int t_from, int t_to) const;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<std::string> algorithm_names;
  // records[a] holds one TrialRecord per trial, sorted by trial index.
  std::vector<std::vector<TrialRecord>> records;
  MetricSeries metrics;
};

ExperimentResult RunExperiment(const ExperimentSpec& spec);

// Recomputes metrics from per-trial records (sorted by trial index).
MetricSeries Aggregate(const std::vector<std::string>& names,
                       const std::vector<std::vector<TrialRecord>>& records);

// Combines two runs of the same spec over disjoint trial ranges.
ExperimentResult MergeResults(const ExperimentResult& a, const ExperimentResult& b);

// Files written by WriteExperimentOutputs.
struct OutputFiles {
  std::string metrics;
  std::string diagnostics;
  std::string manifest;
  std::vector<std::string> plots;
};

std::string MetricsCsv(const MetricSeries& m);
std::string DiagnosticsCsv(const ExperimentResult& r);
std::string ManifestJson(const ExperimentResult& r, const OutputFiles& files);

// nmse.dat, extras.dat, misses.dat: column t then one column per algorithm.
std::vector<std::string> EmitPlotData(const MetricSeries& m, const std::string& output_dir);
OutputFiles WriteExperimentOutputs(const ExperimentResult& r, const std::string& output_dir);

// One record per t: "t,index:value;index:value;...".
void WriteTrajectoryCsv(const std::string& path,
                        const std::vector<std::pair<int, Eigen::VectorXd>>& trajectory);

// Presets for the four reproduction panels: 'a' (n=65, r=1, d=3),
// 'b' (n=59, r=1, d=3), 'c' (n=59, r=2/3, d=3), 'd' (n=59, r=2/5, d=5).
ExperimentSpec Figure3Preset(char panel);

// Default thresholds at noise level c and increment r.
RecoveryConfig DefaultRecoveryConfig(Algorithm a, double c, double r);

// key=value configuration text ('#' starts a comment).
std::map<std::string, std::string> ParseKeyValues(const std::string& text);
std::map<std::string, std::string> ReadKeyValueFile(const std::string& path);
// Builds a spec from keys; unknown keys throw ConfigurationError.
ExperimentSpec SpecFromKeyValues(const std::map<std::string, std::string>& kv);
std::vector<std::string> KnownConfigKeys();

}  // namespace modcs
