#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <filesystem>

#include "modcs/errors.hpp"
#include "modcs/random.hpp"
#include "modcs/sensing.hpp"

using namespace modcs;

namespace {

// Direct definition: extreme eigenvalues of A_T' A_T over every S-subset.
double DirectRic(const Eigen::MatrixXd& a, int s) {
  const int m = static_cast<int>(a.cols());
  std::vector<int> idx(s);
  double best = 0.0;
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == s) {
      Eigen::MatrixXd sub(a.rows(), s);
      for (int i = 0; i < s; ++i) sub.col(i) = a.col(idx[i]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
      const auto sv = svd.singularValues();
      const double smin = sub.rows() < s ? 0.0 : sv(s - 1);
      best = std::max({best, sv(0) * sv(0) - 1.0, 1.0 - smin * smin});
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[k] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Largest ||A_T1' A_T2|| over disjoint pairs of the given sizes.
double DirectRoc(const Eigen::MatrixXd& a, int s1, int s2) {
  const int m = static_cast<int>(a.cols());
  double best = 0.0;
  for (unsigned mask1 = 0; mask1 < (1u << m); ++mask1) {
    if (__builtin_popcount(mask1) != s1) continue;
    for (unsigned mask2 = 0; mask2 < (1u << m); ++mask2) {
      if ((mask1 & mask2) || __builtin_popcount(mask2) != s2) continue;
      Eigen::MatrixXd a1(a.rows(), s1), a2(a.rows(), s2);
      int p = 0, q = 0;
      for (int i = 0; i < m; ++i) {
        if (mask1 >> i & 1) a1.col(p++) = a.col(i);
        if (mask2 >> i & 1) a2.col(q++) = a.col(i);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a1.transpose() * a2);
      best = std::max(best, svd.singularValues()(0));
    }
  }
  return best;
}

Eigen::MatrixXd OrthonormalColumns(int n, int m, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(GaussianMatrix(n, n + 1, seed).leftCols(n));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.leftCols(m);
}

}  // namespace

TEST(Sensing, GaussianMatrixColumnNorms) {
  const Eigen::MatrixXd a = GaussianMatrix(59, 200, 1);
  ASSERT_EQ(a.rows(), 59);
  ASSERT_EQ(a.cols(), 200);
  // n ||a_j||^2 is chi-squared with n degrees of freedom.
  const double mean_sq = a.colwise().squaredNorm().mean();
  const double sd_of_mean = std::sqrt(2.0 / 59.0 / 200.0);
  EXPECT_NEAR(mean_sq, 1.0, 3 * sd_of_mean);
  EXPECT_NEAR(a.mean(), 0.0, 3.0 / std::sqrt(59.0 * 59.0 * 200.0));
}

TEST(Sensing, GaussianMatrixDeterministicAndBounds) {
  EXPECT_EQ(GaussianMatrix(20, 30, 4), GaussianMatrix(20, 30, 4));
  EXPECT_NE(GaussianMatrix(20, 30, 4), GaussianMatrix(20, 30, 5));
  EXPECT_NO_THROW(GaussianMatrix(29, 30, 1));
  EXPECT_THROW(GaussianMatrix(30, 30, 1), ConfigurationError);
  EXPECT_THROW(GaussianMatrix(0, 30, 1), ConfigurationError);
}

TEST(Sensing, NoiseFreeMeasurementIsExact) {
  SensingSystem sys = MakeGaussianSystem(10, 20, std::nullopt, NoiseSpec::None(), 2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(20);
  x[3] = 1.5;
  x[11] = -2.0;
  const Measurement m = Measure(sys, x, 4, 9);
  EXPECT_EQ(m.w.norm(), 0.0);
  EXPECT_TRUE(m.y.isApprox(sys.a * x));
}

TEST(Sensing, UniformNoiseWithinBound) {
  const double c = 0.1266;
  SensingSystem sys = MakeGaussianSystem(59, 200, std::nullopt, NoiseSpec::Uniform(c), 1);
  EXPECT_NEAR(sys.epsilon, 0.9724, 1e-4);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(200);
  for (int t = 0; t < 200; ++t) {
    const Measurement m = Measure(sys, zero, t, 77);
    ASSERT_LE(m.w.norm(), sys.epsilon);
    ASSERT_LE(m.w.cwiseAbs().maxCoeff(), c);
    ASSERT_EQ(m.y, m.w);
  }
  EXPECT_EQ(Measure(sys, zero, 3, 77).w, Measure(sys, zero, 3, 77).w);
  EXPECT_NE(Measure(sys, zero, 3, 77).w, Measure(sys, zero, 4, 77).w);
}

TEST(Sensing, InitialMatrixUsedAtTimeZero) {
  SensingSystem sys = MakeGaussianSystem(20, 50, 40, NoiseSpec::Uniform(0.1), 3);
  ASSERT_TRUE(sys.a0.has_value());
  EXPECT_EQ(sys.MatrixAt(0).rows(), 40);
  EXPECT_EQ(sys.MatrixAt(1).rows(), 20);
  EXPECT_EQ(Measure(sys, Eigen::VectorXd::Zero(50), 0, 1).y.size(), 40);
  EXPECT_GE(sys.EpsilonAt(0), 0.1 * std::sqrt(40.0) - 1e-12);
}

TEST(Ric, OrthonormalColumnsGiveZero) {
  const Eigen::MatrixXd q = OrthonormalColumns(12, 8, 2);
  for (int s = 1; s <= 4; ++s) EXPECT_NEAR(RicExhaustive(q, s).value, 0.0, 1e-12);
  EXPECT_NEAR(Roc(q, 2, 2).value, 0.0, 1e-12);
  EXPECT_EQ(RicExhaustive(Eigen::MatrixXd::Identity(6, 6), 3).value, 0.0);
}

TEST(Ric, DuplicatedColumnGivesOne) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = a(0, 1) = 1.0;
  EXPECT_NEAR(RicExhaustive(a, 2).value, 1.0, 1e-12);
}

TEST(Ric, MatchesDirectSweep) {
  const Eigen::MatrixXd a = GaussianMatrix(10, 20, 8);
  const RicRocEstimate e = RicExhaustive(a, 3);
  EXPECT_EQ(e.subsets_examined, 1140u);
  EXPECT_TRUE(e.IsExact());
  EXPECT_NEAR(e.value, DirectRic(a, 3), 1e-10);
}

TEST(Roc, MatchesDirectPairEnumeration) {
  const Eigen::MatrixXd toy = GaussianMatrix(2, 4, 6);
  EXPECT_NEAR(Roc(toy, 1, 1).value, DirectRoc(toy, 1, 1), 1e-12);
  EXPECT_NEAR(Roc(toy, 1, 2).value, DirectRoc(toy, 1, 2), 1e-12);
  EXPECT_NEAR(Roc(toy, 2, 2).value, DirectRoc(toy, 2, 2), 1e-12);
  const Eigen::MatrixXd a = GaussianMatrix(6, 10, 12);
  EXPECT_NEAR(Roc(a, 2, 3).value, DirectRoc(a, 2, 3), 1e-10);
  EXPECT_NEAR(Roc(a, 3, 2).value, DirectRoc(a, 3, 2), 1e-10);
}

TEST(Ric, SampledIsLowerBoundAndFullSamplingIsExact) {
  const Eigen::MatrixXd a = GaussianMatrix(12, 24, 21);
  const double exact = RicExhaustive(a, 3).value;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RicRocEstimate s = RicSampled(a, 3, 200, seed);
    EXPECT_FALSE(s.IsExact());
    EXPECT_LE(s.value, exact + 1e-12);
  }
  EXPECT_NEAR(RicSampled(a, 3, BinomialSaturating(24, 3), 1).value, exact, 1e-12);
}

TEST(Ric, BudgetEnforced) {
  const Eigen::MatrixXd a = GaussianMatrix(30, 60, 1);
  EXPECT_THROW(RicExhaustive(a, 10, 1000), BudgetExceededError);
  RocOptions o;
  o.budget = 1000;
  o.num_samples = 200;
  EXPECT_FALSE(Ric(a, 10, o).IsExact());
  o.mode = EstimateMode::kExhaustive;
  EXPECT_THROW(Ric(a, 10, o), BudgetExceededError);
}

TEST(Ric, PropertiesOnRandomMatrices) {
  CounterRng rng(2024);
  for (int k = 0; k < 50; ++k) {
    const int m = 6 + static_cast<int>(rng.Below(19));  // up to 24
    const int n = 3 + static_cast<int>(rng.Below(std::min(10, m - 3)));  // up to 12
    const Eigen::MatrixXd a = GaussianMatrix(n, m, 1000 + k);
    double prev = 0.0;
    for (int s = 1; s <= 4; ++s) {
      const double ds = RicExhaustive(a, s).value;
      ASSERT_GE(ds, prev - 1e-12) << "k=" << k << " s=" << s;
      prev = ds;
    }
    for (int s1 = 1; s1 <= 2; ++s1) {
      for (int s2 = 1; s2 <= 2; ++s2) {
        ASSERT_LE(Roc(a, s1, s2).value, RicExhaustive(a, s1 + s2).value + 1e-12);
      }
    }
  }
}

TEST(Binomial, ExactAndSaturating) {
  EXPECT_EQ(BinomialSaturating(20, 3), 1140u);
  EXPECT_EQ(BinomialSaturating(5, 0), 1u);
  EXPECT_EQ(BinomialSaturating(5, 6), 0u);
  EXPECT_EQ(BinomialSaturating(60, 30), 118264581564861424ull);
  EXPECT_EQ(BinomialSaturating(200, 100), std::numeric_limits<std::uint64_t>::max());
}

TEST(Sensing, MatrixCsvRoundTrip) {
  const Eigen::MatrixXd a = GaussianMatrix(7, 13, 31);
  const auto path = std::filesystem::temp_directory_path() / "modcs_matrix_roundtrip.csv";
  SaveMatrixCsv(path.string(), a, 31);
  std::uint64_t seed = 0;
  const Eigen::MatrixXd b = LoadMatrixCsv(path.string(), &seed);
  EXPECT_EQ(seed, 31u);
  EXPECT_EQ(a, b);
  std::filesystem::remove(path);
}

TEST(Sensing, EstimateFormatting) {
  const RicRocEstimate e = RicExhaustive(GaussianMatrix(5, 8, 1), 2);
  const std::string s = FormatEstimate(e);
  EXPECT_NE(s.find("bound=exact"), std::string::npos);
  EXPECT_NE(FormatEstimate(RicSampled(GaussianMatrix(5, 8, 1), 2, 3, 1)).find("bound=lower"),
            std::string::npos);
}
