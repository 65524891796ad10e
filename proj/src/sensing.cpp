#include "modcs/sensing.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "modcs/errors.hpp"
#include "modcs/random.hpp"

namespace modcs {

namespace {

// Visits every k-subset of {0..n-1} in lexicographic order; stops early if
// the visitor returns false.
template <typename Visitor>
void ForEachCombination(int n, int k, Visitor&& visit) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    if (!visit(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Eigen::MatrixXd SubGram(const Eigen::MatrixXd& gram, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = gram(rows[i], cols[j]);
  }
  return out;
}

double IsometryDefect(const Eigen::MatrixXd& gram, const std::vector<int>& cols) {
  if (cols.size() == 1) return std::abs(gram(cols[0], cols[0]) - 1.0);
  const Eigen::MatrixXd sub = SubGram(gram, cols, cols);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return std::max(ev[ev.size() - 1] - 1.0, 1.0 - ev[0]);
}

double CrossNorm(const Eigen::MatrixXd& gram, const std::vector<int>& t1,
                 const std::vector<int>& t2) {
  const Eigen::MatrixXd cross = SubGram(gram, t1, t2);
  if (cross.rows() == 1 || cross.cols() == 1) return cross.norm();
  const Eigen::MatrixXd sq = cross.rows() <= cross.cols()
                                 ? Eigen::MatrixXd(cross * cross.transpose())
                                 : Eigen::MatrixXd(cross.transpose() * cross);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sq, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues()[sq.rows() - 1]));
}

std::uint64_t RocPairCount(int m, int s1, int s2) {
  const std::uint64_t a = BinomialSaturating(m, s1);
  const std::uint64_t b = BinomialSaturating(m - s1, s2);
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

void RequireSize(const Eigen::MatrixXd& a, int s, const char* who) {
  if (s < 0 || s > a.cols()) {
    throw ArgumentError(std::string(who) + ": subset size out of range");
  }
}

}  // namespace

void SensingSystem::Validate() const {
  if (a.rows() <= 0 || a.rows() >= a.cols()) {
    throw ConfigurationError("SensingSystem: require 0 < n < m");
  }
  if (a0) {
    if (a0->cols() != a.cols() || a0->rows() < a.rows()) {
      throw ConfigurationError("SensingSystem: A0 must have m columns and n0 >= n rows");
    }
  }
  if (epsilon < 0.0 || epsilon0 < 0.0) {
    throw ConfigurationError("SensingSystem: epsilon must be nonnegative");
  }
  if (noise.kind == NoiseSpec::Kind::kUniform) {
    if (noise.c < 0.0) throw ConfigurationError("SensingSystem: noise c must be >= 0");
    if (epsilon < DefaultEpsilon(noise, static_cast<int>(a.rows())) * (1 - 1e-12)) {
      throw ConfigurationError("SensingSystem: epsilon below c*sqrt(n) noise bound");
    }
    if (a0 && epsilon0 < DefaultEpsilon(noise, static_cast<int>(a0->rows())) * (1 - 1e-12)) {
      throw ConfigurationError("SensingSystem: epsilon0 below c*sqrt(n0) noise bound");
    }
  }
}

double DefaultEpsilon(const NoiseSpec& noise, int rows) {
  if (noise.kind == NoiseSpec::Kind::kNone) return 0.0;
  return noise.c * std::sqrt(static_cast<double>(rows));
}

Eigen::MatrixXd GaussianMatrix(int n, int m, std::uint64_t seed) {
  if (n <= 0 || n >= m) {
    throw ConfigurationError("GaussianMatrix: require 0 < n < m");
  }
  CounterRng rng(seed, 0, StreamTag::kMatrix);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd a(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = scale * rng.StandardNormal();
  }
  return a;
}

SensingSystem MakeGaussianSystem(int n, int m, std::optional<int> n0, NoiseSpec noise,
                                 std::uint64_t seed, std::optional<double> epsilon) {
  SensingSystem sys;
  sys.a = GaussianMatrix(n, m, seed);
  if (n0) {
    if (*n0 < n || *n0 > m) {
      throw ConfigurationError("MakeGaussianSystem: require n <= n0 <= m");
    }
    // n0 == m is allowed at t = 0; generate directly to skip the n < m check.
    CounterRng rng(seed, 0, StreamTag::kInitialMatrix);
    const double scale = 1.0 / std::sqrt(static_cast<double>(*n0));
    Eigen::MatrixXd a0(*n0, m);
    for (int i = 0; i < *n0; ++i) {
      for (int j = 0; j < m; ++j) a0(i, j) = scale * rng.StandardNormal();
    }
    sys.a0 = std::move(a0);
  }
  sys.noise = noise;
  sys.epsilon = epsilon.value_or(DefaultEpsilon(noise, n));
  sys.epsilon0 = n0 ? std::max(sys.epsilon, DefaultEpsilon(noise, *n0)) : sys.epsilon;
  sys.Validate();
  return sys;
}

Measurement Measure(const SensingSystem& system, const Eigen::VectorXd& x, int t,
                    std::uint64_t seed) {
  const Eigen::MatrixXd& a = system.MatrixAt(t);
  if (x.size() != a.cols()) throw ArgumentError("Measure: signal length != m");
  Measurement out;
  out.w = Eigen::VectorXd::Zero(a.rows());
  if (system.noise.kind == NoiseSpec::Kind::kUniform) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t), StreamTag::kNoise);
    for (Eigen::Index i = 0; i < out.w.size(); ++i) {
      out.w[i] = system.noise.c * (2.0 * rng.Uniform01() - 1.0);
    }
  }
  if (out.w.norm() > system.EpsilonAt(t)) {
    throw std::logic_error("Measure: realized noise exceeds epsilon");
  }
  out.y = a * x + out.w;
  return out;
}

std::uint64_t BinomialSaturating(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (result > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(result);
}

RicRocEstimate RicExhaustive(const Eigen::MatrixXd& a, int s, std::uint64_t budget) {
  RequireSize(a, s, "RicExhaustive");
  const int m = static_cast<int>(a.cols());
  const std::uint64_t count = BinomialSaturating(m, s);
  if (count > budget) {
    throw BudgetExceededError("RicExhaustive: C(" + std::to_string(m) + "," +
                              std::to_string(s) + ") subsets exceed the budget; use RicSampled");
  }
  RicRocEstimate est;
  est.s1 = s;
  est.method = RicRocEstimate::Method::kExhaustive;
  if (s == 0) return est;
  const Eigen::MatrixXd gram = a.transpose() * a;
  double best = 0.0;
  ForEachCombination(m, s, [&](const std::vector<int>& cols) {
    best = std::max(best, IsometryDefect(gram, cols));
    ++est.subsets_examined;
    return true;
  });
  est.value = best;
  return est;
}

RicRocEstimate RicSampled(const Eigen::MatrixXd& a, int s, std::uint64_t num_samples,
                          std::uint64_t seed) {
  RequireSize(a, s, "RicSampled");
  const int m = static_cast<int>(a.cols());
  if (num_samples >= BinomialSaturating(m, s)) {
    // Sampling with deduplication would visit every subset.
    return RicExhaustive(a, s, std::numeric_limits<std::uint64_t>::max());
  }
  RicRocEstimate est;
  est.s1 = s;
  est.method = RicRocEstimate::Method::kSampled;
  if (s == 0) return est;
  const Eigen::MatrixXd gram = a.transpose() * a;
  CounterRng rng(seed, static_cast<std::uint64_t>(s), StreamTag::kSampling);
  std::vector<int> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> cols(s);
  double best = 0.0;
  for (std::uint64_t k = 0; k < num_samples; ++k) {
    for (int i = 0; i < s; ++i) {
      std::swap(pool[i], pool[i + rng.Below(m - i)]);
      cols[i] = pool[i];
    }
    best = std::max(best, IsometryDefect(gram, cols));
  }
  est.value = best;
  est.subsets_examined = num_samples;
  return est;
}

RicRocEstimate Ric(const Eigen::MatrixXd& a, int s, const RocOptions& opts) {
  const bool exhaustive =
      opts.mode == EstimateMode::kExhaustive ||
      (opts.mode == EstimateMode::kAuto &&
       BinomialSaturating(static_cast<int>(a.cols()), s) <= opts.budget);
  if (exhaustive) return RicExhaustive(a, s, opts.budget);
  return RicSampled(a, s, opts.num_samples, opts.seed);
}

RicRocEstimate Roc(const Eigen::MatrixXd& a, int s1, int s2, const RocOptions& opts) {
  const int m = static_cast<int>(a.cols());
  if (s1 < 0 || s2 < 0 || s1 + s2 > m) {
    throw ArgumentError("Roc: require S1 + S2 <= m");
  }
  RicRocEstimate est;
  est.s1 = s1;
  est.s2 = s2;
  if (s1 == 0 || s2 == 0) return est;

  const std::uint64_t count = RocPairCount(m, s1, s2);
  bool exhaustive = false;
  switch (opts.mode) {
    case EstimateMode::kExhaustive:
      if (count > opts.budget) {
        throw BudgetExceededError("Roc: disjoint pair count exceeds the budget");
      }
      exhaustive = true;
      break;
    case EstimateMode::kAuto:
      exhaustive = count <= opts.budget || count <= opts.num_samples;
      break;
    case EstimateMode::kSampled:
      exhaustive = count <= opts.num_samples;
      break;
  }

  const Eigen::MatrixXd gram = a.transpose() * a;
  double best = 0.0;
  if (exhaustive) {
    est.method = RicRocEstimate::Method::kExhaustive;
    std::vector<int> rest;
    std::vector<int> t2(s2);
    ForEachCombination(m, s1, [&](const std::vector<int>& t1) {
      rest = Complement(t1, m);
      ForEachCombination(static_cast<int>(rest.size()), s2,
                         [&](const std::vector<int>& pick) {
                           for (int i = 0; i < s2; ++i) t2[i] = rest[pick[i]];
                           best = std::max(best, CrossNorm(gram, t1, t2));
                           ++est.subsets_examined;
                           return true;
                         });
      return true;
    });
  } else {
    est.method = RicRocEstimate::Method::kSampled;
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(s1) * 1000003ULL + s2,
                   StreamTag::kSampling);
    std::vector<int> pool(m);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> t1(s1), t2(s2);
    for (std::uint64_t k = 0; k < opts.num_samples; ++k) {
      for (int i = 0; i < s1 + s2; ++i) {
        std::swap(pool[i], pool[i + rng.Below(m - i)]);
      }
      for (int i = 0; i < s1; ++i) t1[i] = pool[i];
      for (int i = 0; i < s2; ++i) t2[i] = pool[s1 + i];
      best = std::max(best, CrossNorm(gram, t1, t2));
    }
    est.subsets_examined = opts.num_samples;
  }
  est.value = best;
  return est;
}

void SaveMatrixCsv(const std::string& path, const Eigen::MatrixXd& a,
                   std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("SaveMatrixCsv: cannot open " + path);
  out << a.rows() << ',' << a.cols() << ',' << seed << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << a(i, j);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("SaveMatrixCsv: write failed for " + path);
}

Eigen::MatrixXd LoadMatrixCsv(const std::string& path, std::uint64_t* seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("LoadMatrixCsv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("LoadMatrixCsv: empty file");
  long long n = 0, m = 0;
  unsigned long long s = 0;
  char c1 = 0, c2 = 0;
  std::istringstream header(line);
  if (!(header >> n >> c1 >> m >> c2 >> s) || c1 != ',' || c2 != ',' || n <= 0 ||
      m <= 0) {
    throw ConfigurationError("LoadMatrixCsv: header must be 'n,m,seed'");
  }
  Eigen::MatrixXd a(n, m);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ConfigurationError("LoadMatrixCsv: missing rows");
    std::istringstream row(line);
    std::string cell;
    for (long long j = 0; j < m; ++j) {
      if (!std::getline(row, cell, ',')) {
        throw ConfigurationError("LoadMatrixCsv: short row " + std::to_string(i));
      }
      try {
        a(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigurationError("LoadMatrixCsv: bad number '" + cell + "'");
      }
    }
  }
  if (seed) *seed = s;
  return a;
}

std::string FormatEstimate(const RicRocEstimate& e) {
  std::ostringstream out;
  out << std::setprecision(10);
  if (e.s2 == 0) {
    out << "kind=ric\nS=" << e.s1 << '\n';
  } else {
    out << "kind=roc\nS1=" << e.s1 << "\nS2=" << e.s2 << '\n';
  }
  out << "value=" << e.value << '\n'
      << "method=" << (e.IsExact() ? "exhaustive" : "sampled") << '\n'
      << "bound=" << (e.IsExact() ? "exact" : "lower") << '\n'
      << "subsets_examined=" << e.subsets_examined << '\n';
  return out.str();
}

}  // namespace modcs
