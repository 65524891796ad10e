#include "modcs/recovery.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "modcs/errors.hpp"

namespace modcs {

namespace {

struct NamedAlgorithm {
  Algorithm algorithm;
  const char* name;
};

constexpr NamedAlgorithm kAlgorithmNames[] = {
    {Algorithm::kSimpleCS, "SimpleCS"},
    {Algorithm::kGaussCS, "GaussCS"},
    {Algorithm::kModCS, "ModCS"},
    {Algorithm::kModCSAddLSDel, "ModCSAddLSDel"},
    {Algorithm::kLSCS, "LSCS"},
};

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Orders indices by decreasing |x_i| (ties by index) and keeps the first k.
Support LargestMagnitude(Support idx, const Eigen::VectorXd& x, std::size_t k) {
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(x[a]) > std::abs(x[b]); });
  if (idx.size() > k) idx.resize(k);
  return idx;
}

// Least squares that first trims the support to at most n columns by magnitude.
Eigen::VectorXd BoundedLeastSquares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                    Support& s, const Eigen::VectorXd& ranking,
                                    RecoveryStep& step) {
  if (static_cast<Eigen::Index>(s.size()) > a.rows()) {
    s = Normalize(LargestMagnitude(s, ranking, a.rows()));
    step.add_truncated = true;
  }
  LeastSquaresResult ls = LeastSquaresOnSupportEx(a, y, s);
  step.ls_rank_deficient = step.ls_rank_deficient || ls.rank_deficient;
  return std::move(ls.x);
}

// Shared add-LS-del stage: raw estimate and T -> T_add -> LS -> delete -> LS.
void AddLSDel(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Support& t_prev,
              const RecoveryConfig& cfg, RecoveryStep& step) {
  const int m = static_cast<int>(a.cols());
  const auto n = static_cast<std::size_t>(a.rows());
  Support candidates;
  for (int i : Complement(t_prev, m)) {
    if (std::abs(step.x_hat_raw[i]) > cfg.alpha_add) candidates.push_back(i);
  }
  if (t_prev.size() + candidates.size() > n) {
    // Keep T first, then the strongest candidates, up to n columns.
    Support kept = t_prev.size() > n ? LargestMagnitude(t_prev, step.x_hat_raw, n) : t_prev;
    const std::size_t room = n - kept.size();
    Support add = LargestMagnitude(candidates, step.x_hat_raw, room);
    step.t_add = Union(Normalize(kept), Normalize(add));
    step.add_truncated = true;
  } else {
    step.t_add = Union(t_prev, candidates);
  }
  LeastSquaresResult add = LeastSquaresOnSupportEx(a, y, step.t_add);
  step.ls_rank_deficient = add.rank_deficient;
  step.x_hat_add = std::move(add.x);

  Support kept;
  for (int i : step.t_add) {
    if (std::abs(step.x_hat_add[i]) > cfg.alpha_del) kept.push_back(i);
  }
  step.n_hat = std::move(kept);
  LeastSquaresResult fin = LeastSquaresOnSupportEx(a, y, step.n_hat);
  step.ls_rank_deficient = step.ls_rank_deficient || fin.rank_deficient;
  step.x_hat = std::move(fin.x);
}

void RecordSolve(const SolverResult& r, RecoveryStep& step) {
  step.converged = r.converged;
  step.solver_iterations += r.iterations;
}

int SetDiffSize(const Support& a, const Support& b) {
  return static_cast<int>(Difference(a, b).size());
}

}  // namespace

std::string AlgorithmName(Algorithm a) {
  for (const auto& e : kAlgorithmNames) {
    if (e.algorithm == a) return e.name;
  }
  throw std::logic_error("AlgorithmName: unknown algorithm");
}

Algorithm ParseAlgorithm(const std::string& name) {
  const std::string key = Lower(name);
  for (const auto& e : kAlgorithmNames) {
    if (Lower(e.name) == key) return e.algorithm;
  }
  throw ConfigurationError("unknown algorithm '" + name + "'");
}

void RecoveryConfig::Validate() const {
  if (alpha < 0.0 || alpha_add < 0.0 || alpha_del < 0.0) {
    throw ConfigurationError("RecoveryConfig: thresholds must be nonnegative");
  }
  if (epsilon && *epsilon < 0.0) {
    throw ConfigurationError("RecoveryConfig: epsilon must be nonnegative");
  }
  if (initial_support) {
    for (std::size_t i = 0; i < initial_support->size(); ++i) {
      if ((*initial_support)[i] < 0 ||
          (i > 0 && (*initial_support)[i] <= (*initial_support)[i - 1])) {
        throw ConfigurationError("RecoveryConfig: initial support must be sorted and unique");
      }
    }
  }
}

RecoveryStep ModCSStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                       const Support& t_prev, const RecoveryConfig& cfg, double epsilon) {
  RecoveryStep step;
  step.t_prev = t_prev;
  const SolverResult r = solver.Solve(y, t_prev, epsilon);
  RecordSolve(r, step);
  step.x_hat_raw = r.beta;
  step.n_hat = AboveThreshold(r.beta, cfg.alpha);
  step.x_hat = r.beta;
  return step;
}

RecoveryStep ModCSAddLSDelStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                               const Support& t_prev, const RecoveryConfig& cfg,
                               double epsilon) {
  RecoveryStep step;
  step.t_prev = t_prev;
  const SolverResult r = solver.Solve(y, t_prev, epsilon);
  RecordSolve(r, step);
  step.x_hat_raw = r.beta;
  AddLSDel(solver.matrix(), y, t_prev, cfg, step);
  return step;
}

RecoveryStep LSCSStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                      const Support& t_prev, const RecoveryConfig& cfg, double epsilon) {
  RecoveryStep step;
  step.t_prev = t_prev;
  const Eigen::MatrixXd& a = solver.matrix();
  Support t_ls = t_prev;
  const Eigen::VectorXd x_init =
      BoundedLeastSquares(a, y, t_ls, Eigen::VectorXd::Ones(a.cols()), step);
  const Eigen::VectorXd y_res = y - a * x_init;
  const SolverResult r = solver.Solve(y_res, {}, epsilon);
  RecordSolve(r, step);
  step.x_hat_raw = r.beta + x_init;
  AddLSDel(a, y, t_prev, cfg, step);
  return step;
}

RecoveryStep SimpleCSStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                          const RecoveryConfig& cfg, double epsilon) {
  RecoveryStep step;
  const SolverResult r = solver.Solve(y, {}, epsilon);
  RecordSolve(r, step);
  step.x_hat_raw = r.beta;
  step.n_hat = AboveThreshold(r.beta, cfg.alpha);
  if (cfg.algorithm == Algorithm::kGaussCS) {
    step.x_hat = BoundedLeastSquares(solver.matrix(), y, step.n_hat, r.beta, step);
  } else {
    step.x_hat = r.beta;
  }
  return step;
}

RecoveryStep RecoverStep(const PartialL1Solver& solver, const Eigen::VectorXd& y,
                         const Support& t_prev, const RecoveryConfig& cfg, double epsilon) {
  switch (cfg.algorithm) {
    case Algorithm::kSimpleCS:
    case Algorithm::kGaussCS:
      return SimpleCSStep(solver, y, cfg, epsilon);
    case Algorithm::kModCS:
      return ModCSStep(solver, y, t_prev, cfg, epsilon);
    case Algorithm::kModCSAddLSDel:
      return ModCSAddLSDelStep(solver, y, t_prev, cfg, epsilon);
    case Algorithm::kLSCS:
      return LSCSStep(solver, y, t_prev, cfg, epsilon);
  }
  throw std::logic_error("RecoverStep: unknown algorithm");
}

void AttachDiagnostics(RecoveryStep& step, const SparseSignal& truth) {
  const Support& n = truth.support;
  StepDiagnostics d;
  d.misses_pred = SetDiffSize(n, step.t_prev);
  d.extras_pred = SetDiffSize(step.t_prev, n);
  if (step.x_hat_add.size() != 0) {
    d.misses_add = SetDiffSize(n, step.t_add);
    d.extras_add = SetDiffSize(step.t_add, n);
  }
  d.misses = SetDiffSize(n, step.n_hat);
  d.extras = SetDiffSize(step.n_hat, n);
  d.sq_error = (truth.values - step.x_hat).squaredNorm();
  d.power = truth.values.squaredNorm();
  step.diag = d;
}

Support OracleInitialSupport(const SignalModelState& s0) {
  if (s0.increasing.size() < 2) return s0.support();
  return Difference(s0.support(), s0.increasing[1]);
}

SequenceRunner::SequenceRunner(const SensingSystem& system, SolverOptions opts)
    : system_(system), solver_(system.a, opts) {
  system_.Validate();
  if (system_.a0) solver0_ = std::make_unique<PartialL1Solver>(*system_.a0, opts);
}

void SequenceRunner::Run(const ModelParams& model, const RecoveryConfig& cfg, int horizon,
                         std::uint64_t trial_seed, const StepVisitor& visit) const {
  if (horizon < 1) throw ConfigurationError("Run: horizon must be >= 1");
  cfg.Validate();
  ModelParams params = model;
  params.seed = trial_seed;
  params.Validate();
  if (params.m != system_.a.cols()) {
    throw ConfigurationError("Run: model dimension does not match the sensing matrix");
  }

  const bool has_prediction =
      cfg.algorithm != Algorithm::kSimpleCS && cfg.algorithm != Algorithm::kGaussCS;
  SignalModelState state = InitState(params);
  Support n_hat;

  auto run_step = [&](const PartialL1Solver& solver, int t, const Support& t_prev) {
    const SparseSignal truth = SparseSignal::FromValues(state.Values(params.r));
    const Measurement meas = Measure(system_, truth.values, t, trial_seed);
    const double eps = cfg.epsilon.value_or(system_.EpsilonAt(t));
    RecoveryStep step;
    try {
      step = RecoverStep(solver, meas.y, t_prev, cfg, eps);
    } catch (const std::exception& e) {
      step = RecoveryStep{};
      step.t_prev = t_prev;
      step.n_hat = t_prev;
      step.x_hat = Eigen::VectorXd::Zero(params.m);
      step.x_hat_raw = step.x_hat;
      step.converged = false;
      step.failed = true;
      step.error = e.what();
    }
    step.t = t;
    AttachDiagnostics(step, truth);
    visit(step, truth);
    return step.n_hat;
  };

  if (cfg.init_mode == InitMode::kSimpleCS) {
    const PartialL1Solver& s0 = solver0_ ? *solver0_ : solver_;
    n_hat = run_step(s0, 0, {});
  } else {
    n_hat = cfg.initial_support ? *cfg.initial_support : OracleInitialSupport(state);
  }
  for (int t = 1; t <= horizon; ++t) {
    state = Step(state, params);
    n_hat = run_step(solver_, t, has_prediction ? n_hat : Support{});
  }
}

std::vector<RecoveryStep> SequenceRunner::Run(const ModelParams& model,
                                              const RecoveryConfig& cfg, int horizon,
                                              std::uint64_t trial_seed) const {
  std::vector<RecoveryStep> out;
  Run(model, cfg, horizon, trial_seed,
      [&](const RecoveryStep& s, const SparseSignal&) { out.push_back(s); });
  return out;
}

std::vector<RecoveryStep> RunSequence(const ModelParams& model, const SensingSystem& system,
                                      const RecoveryConfig& cfg, int horizon,
                                      std::uint64_t trial_seed) {
  return SequenceRunner(system).Run(model, cfg, horizon, trial_seed);
}

}  // namespace modcs
