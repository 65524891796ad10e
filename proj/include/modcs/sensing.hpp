#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "modcs/signal_model.hpp"

namespace modcs {

struct NoiseSpec {
  enum class Kind { kNone, kUniform };
  Kind kind = Kind::kNone;
  double c = 0.0;  // half-width of uniform(-c, c)

  static NoiseSpec None() { return {}; }
  static NoiseSpec Uniform(double c) { return {Kind::kUniform, c}; }
};

// Observation model y_t = A x_t + w_t with ||w_t|| <= epsilon.
struct SensingSystem {
  Eigen::MatrixXd a;
  std::optional<Eigen::MatrixXd> a0;  // used at t = 0 when present
  NoiseSpec noise;
  double epsilon = 0.0;
  double epsilon0 = 0.0;  // bound for the n0-row measurements at t = 0

  const Eigen::MatrixXd& MatrixAt(int t) const {
    return (t == 0 && a0) ? *a0 : a;
  }
  double EpsilonAt(int t) const { return (t == 0 && a0) ? epsilon0 : epsilon; }
  void Validate() const;
};

// Deterministic noise bound c * sqrt(rows) for per-coordinate uniform noise.
double DefaultEpsilon(const NoiseSpec& noise, int rows);

// i.i.d. N(0, 1/n) entries; throws ConfigurationError unless 0 < n < m.
Eigen::MatrixXd GaussianMatrix(int n, int m, std::uint64_t seed);

// Builds a system with a Gaussian A (and optional A0 with n0 rows) and the
// default noise bound.
SensingSystem MakeGaussianSystem(int n, int m, std::optional<int> n0,
                                 NoiseSpec noise, std::uint64_t seed,
                                 std::optional<double> epsilon = std::nullopt);

struct Measurement {
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

// y = A x + w using A0 at t = 0 when configured. Noise is keyed by (seed, t).
Measurement Measure(const SensingSystem& system, const Eigen::VectorXd& x, int t,
                    std::uint64_t seed);

// Restricted isometry / orthogonality constant estimates.
struct RicRocEstimate {
  enum class Method { kExhaustive, kSampled };
  int s1 = 0;
  int s2 = 0;  // zero for RIC
  double value = 0.0;
  Method method = Method::kExhaustive;
  std::uint64_t subsets_examined = 0;

  // Sampled values are lower bounds on the true constant.
  bool IsExact() const { return method == Method::kExhaustive; }
};

constexpr std::uint64_t kDefaultSubsetBudget = 1'000'000;

// Number of k-subsets of an n-set, saturating at UINT64_MAX.
std::uint64_t BinomialSaturating(int n, int k);

// delta_S = max over |T| = S of max(sigma_max(A_T)^2 - 1, 1 - sigma_min(A_T)^2).
// Throws BudgetExceededError when C(m, S) exceeds the budget.
RicRocEstimate RicExhaustive(const Eigen::MatrixXd& a, int s,
                             std::uint64_t budget = kDefaultSubsetBudget);

// Maximum over random S-subsets; a lower bound on delta_S.
RicRocEstimate RicSampled(const Eigen::MatrixXd& a, int s, std::uint64_t num_samples,
                          std::uint64_t seed);

enum class EstimateMode { kExhaustive, kSampled, kAuto };

struct RocOptions {
  EstimateMode mode = EstimateMode::kAuto;
  std::uint64_t budget = kDefaultSubsetBudget;
  std::uint64_t num_samples = 100'000;
  std::uint64_t seed = 0;
};

// theta_{S1,S2} = max over disjoint |T1| = S1, |T2| = S2 of ||A_T1' A_T2||_2.
RicRocEstimate Roc(const Eigen::MatrixXd& a, int s1, int s2, const RocOptions& opts = {});

// RIC with the same exhaustive/sampled policy as Roc.
RicRocEstimate Ric(const Eigen::MatrixXd& a, int s, const RocOptions& opts = {});

// Row-major CSV with a first line "n,m,seed".
void SaveMatrixCsv(const std::string& path, const Eigen::MatrixXd& a,
                   std::uint64_t seed);
Eigen::MatrixXd LoadMatrixCsv(const std::string& path, std::uint64_t* seed = nullptr);

std::string FormatEstimate(const RicRocEstimate& e);

}  // namespace modcs
