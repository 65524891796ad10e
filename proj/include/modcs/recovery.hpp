#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modcs/l1_solver.hpp"
#include "modcs/sensing.hpp"
#include "modcs/signal_model.hpp"
#include "modcs/support.hpp"

namespace modcs {

enum class Algorithm { kSimpleCS, kGaussCS, kModCS, kModCSAddLSDel, kLSCS };
enum class InitMode { kOracle, kSimpleCS };

std::string AlgorithmName(Algorithm a);
// Accepts the names produced by AlgorithmName (case-insensitive).
Algorithm ParseAlgorithm(const std::string& name);

struct RecoveryConfig {
  Algorithm algorithm = Algorithm::kModCS;
  double alpha = 0.0;      // single threshold: ModCS, GaussCS
  double alpha_add = 0.0;  // AddLSDel, LSCS
  double alpha_del = 0.0;  // AddLSDel, LSCS
  std::optional<double> epsilon;  // defaults to the sensing system's bound
  InitMode init_mode = InitMode::kOracle;
  // Oracle init: N_hat_0. When absent, the true N_0 minus its Sa rising
  // level-1 coordinates.
  std::optional<Support> initial_support;

  void Validate() const;
};

// Support error sizes against the true support; -1 marks "not applicable".
struct StepDiagnostics {
  int misses_pred = -1;   // |N_t \ T|
  int extras_pred = -1;   // |T \ N_t|
  int misses_add = -1;    // |N_t \ T_add|
  int extras_add = -1;    // |T_add \ N_t|
  int misses = -1;        // |N_t \ N_hat_t|
  int extras = -1;        // |N_hat_t \ N_t|
  double sq_error = 0.0;  // ||x_t - x_hat_t||^2
  double power = 0.0;     // ||x_t||^2
};

struct RecoveryStep {
  int t = 0;
  Eigen::VectorXd x_hat;      // final estimate
  Eigen::VectorXd x_hat_raw;  // modified-CS output, or CS-residual estimate for LSCS
  Eigen::VectorXd x_hat_add;  // LS on T_add (empty for ModCS / SimpleCS)
  Support t_prev;             // T used at this step
  Support n_hat;              // final support estimate
  Support t_add;              // empty for ModCS / SimpleCS
  bool converged = true;
  bool failed = false;
  bool ls_rank_deficient = false;
  bool add_truncated = false;
  int solver_iterations = 0;
  std::string error;
  StepDiagnostics diag;
};

// Single steps. `epsilon` is the bound for this measurement vector.
RecoveryStep ModCSStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                       const Support& t_prev, const RecoveryConfig& cfg, double epsilon);
RecoveryStep ModCSAddLSDelStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                               const Support& t_prev, const RecoveryConfig& cfg,
                               double epsilon);
RecoveryStep LSCSStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                      const Support& t_prev, const RecoveryConfig& cfg, double epsilon);
// Plain CS (T empty); GaussCS additionally thresholds at alpha and refits LS.
RecoveryStep SimpleCSStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                          const RecoveryConfig& cfg, double epsilon);
// Dispatches on cfg.algorithm.
RecoveryStep RecoverStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                         const Support& t_prev, const RecoveryConfig& cfg, double epsilon);

// Fills step.diag from the true signal.
void AttachDiagnostics(RecoveryStep& step, const SparseSignal& truth);

// Default oracle N_hat_0: N_0 without its Sa rising level-1 coordinates.
Support OracleInitialSupport(const SignalModelState& s0);

using StepVisitor = std::function<void(const RecoveryStep&, const SparseSignal&)>;

// Runs one trajectory: signal from model (seeded by trial_seed), measurements
// through the system, and feedback N_hat_{t-1} -> T_t. Under oracle init the
// steps are t = 1..horizon; under SimpleCS init t = 0 is included and uses A0.
// A step that throws keeps the previous support and is marked failed.
class SequenceRunner {
 public:
  explicit SequenceRunner(const SensingSystem& system, SolverOptions opts = {});

  void Run(const ModelParams& model, const RecoveryConfig& cfg, int horizon,
           std::uint64_t trial_seed, const StepVisitor& visit) const;
  std::vector<RecoveryStep> Run(const ModelParams& model, const RecoveryConfig& cfg,
                                int horizon, std::uint64_t trial_seed) const;

  const SensingSystem& system() const { return system_; }
  const PartialL1Solver& solver() const { return solver_; }

 private:
  SensingSystem system_;
  PartialL1Solver solver_;
  std::unique_ptr<PartialL1Solver> solver0_;
};

std::vector<RecoveryStep> RunSequence(const ModelParams& model, const SensingSystem& system,
                                      const RecoveryConfig& cfg, int horizon,
                                      std::uint64_t trial_seed);

}  // namespace modcs
