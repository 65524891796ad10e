#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "modcs/recovery.hpp"
#include "modcs/sensing.hpp"
#include "modcs/signal_model.hpp"

namespace modcs {

// (sqrt(2) - 1) / 2: the RIC level used throughout the stability results.
inline const double kRipHalfGap = (std::sqrt(2.0) - 1.0) / 2.0;
// C1 evaluated at kRipHalfGap, rounded as in the stated error bound.
constexpr double kModCSErrorFactor = 8.79;

// C1(delta) = 4 sqrt(1 + delta) / (1 - (sqrt(2) + 1) delta).
// Throws BoundUndefinedError unless 0 <= delta < sqrt(2) - 1.
double C1(double delta);
// C2(delta) = 2 (1 + (sqrt(2) - 1) delta) / (1 - (sqrt(2) + 1) delta).
double C2(double delta);

struct BoundConstants {
  double delta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c_prime = 0.0;   // C1 + sqrt(2) C2 sqrt(|T| / |Delta|)
  double c_dprime = 0.0;  // 2 C2 sqrt(|T| / |Delta|)
};

// All four constants at a single RIC value. |Delta| = 0 gives C' = C1 and
// C'' = 0.
BoundConstants ComputeBoundConstants(double delta, int t_size, int delta_size);

// C1(delta) * eps. Requires delta < sqrt(2) - 1 and |Delta| <= |N| / 3.
double ModCSErrorBound(int n_size, int delta_size, int delta_e_size, double delta,
                       double epsilon);
// 4 sqrt(1 + delta) eps / (1 - delta - sqrt(2) theta), with delta at
// |T| + 2|Delta| and theta at (|T|, |Delta|). Requires delta + sqrt(2) theta < 1
// and 3|Delta| <= |N|.
double ModCSErrorBoundSharp(int n_size, int delta_size, int delta_e_size, double delta,
                            double theta, double epsilon);

// A value that is either exact or only a lower bound on the true quantity.
struct Bounded {
  double value = 0.0;
  bool exact = true;
};

// Source of RIC / ROC values for condition checks.
class ConstantProvider {
 public:
  virtual ~ConstantProvider() = default;
  virtual Bounded Delta(int s) const = 0;
  virtual Bounded Theta(int s1, int s2) const = 0;
};

// Computes constants from a matrix (exhaustive when within budget, sampled
// otherwise) and caches them. Thread-safe.
class MatrixConstantProvider : public ConstantProvider {
 public:
  MatrixConstantProvider(Eigen::MatrixXd a, RocOptions opts = {});
  Bounded Delta(int s) const override;
  Bounded Theta(int s1, int s2) const override;

 private:
  Eigen::MatrixXd a_;
  RocOptions opts_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, int>, Bounded> cache_;
};

// Constants given as functions, e.g. from a previous computation.
class FunctionConstantProvider : public ConstantProvider {
 public:
  FunctionConstantProvider(std::function<double(int)> delta,
                           std::function<double(int, int)> theta, bool exact = true);
  Bounded Delta(int s) const override;
  Bounded Theta(int s1, int s2) const override;

 private:
  std::function<double(int)> delta_;
  std::function<double(int, int)> theta_;
  bool exact_;
};

enum class Status { kHolds, kFails, kUndetermined };
std::string StatusName(Status s);

struct Condition {
  std::string id;           // stable identifier, e.g. "rip_support"
  std::string requirement;  // rendered inequality
  double lhs = 0.0;
  double rhs = 0.0;
  Status status = Status::kUndetermined;
  std::string note;
};

enum class ResultKind {
  kModCS,            // thresholded modified-CS
  kAddLSDel,         // add-LS-del, l_inf bounded by l_2
  kAddLSDelSpread,   // add-LS-del with spread-out LS error (zeta)
  kAddLSDelGeneral,  // add-LS-del, misses confined below d0 r
  kLSCS,             // LS-CS
};
std::string ResultName(ResultKind k);
ResultKind ParseResult(const std::string& name);

struct BoundInputs {
  int s0 = 20;
  int sa = 2;
  double r = 1.0;
  int d = 3;
  double epsilon = 0.0;
  double alpha_add = 0.0;
  int d0 = 2;
  std::optional<int> f;            // allowed false additions; defaults to Sa
  double zeta = 1.11;              // spread factor
  InitMode init_mode = InitMode::kOracle;
  std::optional<Bounded> delta_initial;  // delta_{2 S0}(A0) for SimpleCS init
  std::optional<int> measured_false_additions;  // pilot maximum per step
};

struct ConditionReport {
  ResultKind kind = ResultKind::kModCS;
  BoundInputs inputs;
  std::map<std::string, double> constants;
  std::vector<Condition> conditions;
  std::map<std::string, double> implied_bounds;

  bool AllHold() const;
  bool AnyFails() const;
  const Condition* Find(const std::string& id) const;
};

ConditionReport CheckModCS(const BoundInputs& in, const ConstantProvider& p);
ConditionReport CheckAddLSDel(const BoundInputs& in, const ConstantProvider& p);
ConditionReport CheckAddLSDelSpread(const BoundInputs& in, const ConstantProvider& p);
// Throws ArgumentError unless 1 <= d0 <= d.
ConditionReport CheckAddLSDelGeneral(const BoundInputs& in, const ConstantProvider& p);
ConditionReport CheckLSCS(const BoundInputs& in, const ConstantProvider& p);
ConditionReport CheckResult(ResultKind kind, const BoundInputs& in, const ConstantProvider& p);

std::string FormatReportText(const ConditionReport& r);
std::string FormatReportCsv(const ConditionReport& r);

// ||e||_inf sqrt(Sa) / ||e||; zero when e is zero.
double SpreadRatio(const Eigen::VectorXd& e, int sa);

struct ZetaParams {
  int m = 200;
  int s0 = 20;
  int sa = 2;
  double r = 1.0;
  int d = 3;
  int n = 0;  // 0 selects ceil(0.3861 S0 log2 m)
  double c = 0.1266;
  int trials = 500;
  int horizon = 100;
  std::uint64_t seed = 1;
  std::optional<double> epsilon;  // solver bound; default c sqrt(n / 3)
  int threads = 0;                // 0 = hardware concurrency
};

struct ZetaResult {
  double zeta = 0.0;
  int n = 0;
  std::uint64_t samples = 0;  // steps with a nonzero LS error on T_add
  int failed_steps = 0;
};

int ZetaDefaultMeasurements(int m, int s0);
// Max over time and trials of SpreadRatio on the add-step LS error.
ZetaResult EstimateZeta(const ZetaParams& p);

// Largest per-step number of false additions |(T_add \ T) \ N| seen over
// pilot trajectories.
int MeasureFalseAdditions(const SequenceRunner& runner, const ModelParams& model,
                          const RecoveryConfig& cfg, int trials, int horizon,
                          std::uint64_t seed);

struct LemmaContext {
  double epsilon = 0.0;
  double alpha = 0.0;      // ModCS threshold
  double alpha_add = 0.0;  // add-LS-del
  double alpha_del = 0.0;
  const ConstantProvider* provider = nullptr;  // required for RIC-based lemmas
};

struct LemmaCheck {
  std::string lemma;
  bool applicable = false;  // hypotheses held numerically
  bool satisfied = true;    // conclusion held (vacuous when not applicable)
  std::string detail;
};

struct LemmaRecord {
  std::vector<LemmaCheck> checks;
  bool AnyViolation() const;
};

// Checks the per-step detection / deletion lemmas whose hypotheses hold on
// this step against what the algorithm actually did.
LemmaRecord VerifyLemmaConditions(const RecoveryStep& step, const SparseSignal& truth,
                                  Algorithm algorithm, const LemmaContext& ctx);

}  // namespace modcs
