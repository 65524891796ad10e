#include <gtest/gtest.h>

#include <fstream>

#include "json.hpp"
#include "modcs/errors.hpp"
#include "modcs/l1_solver.hpp"
#include "modcs/random.hpp"
#include "modcs/sensing.hpp"
#include "oracles.hpp"

using namespace modcs;

namespace {

double OffSupportL1(const Eigen::VectorXd& b, const Support& t) {
  double s = 0.0;
  for (int i = 0; i < b.size(); ++i) {
    if (!Contains(t, i)) s += std::abs(b[i]);
  }
  return s;
}

Eigen::VectorXd RandomSparse(int m, int k, CounterRng& rng) {
  std::vector<int> all(m);
  for (int i = 0; i < m; ++i) all[i] = i;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (int i : SampleWithoutReplacement(all, k, rng)) {
    x[i] = (rng.Uniform01() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.Uniform01());
  }
  return x;
}

}  // namespace

TEST(PartialL1, MatchesConicReferenceSolutions) {
  std::ifstream in(MODCS_FIXTURE_DIR "/l1_reference.json");
  ASSERT_TRUE(in) << "missing fixture";
  const auto doc = nlohmann::json::parse(in);
  int count = 0;
  for (const auto& c : doc["cases"]) {
    const int n = c["n"], m = c["m"];
    const std::vector<double> av = c["a"];
    const Eigen::MatrixXd a =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            av.data(), n, m);
    const std::vector<double> yv = c["y"];
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), n);
    const Support t = c["t"].get<std::vector<int>>();
    const double eps = c["eps"];
    const double ref = c["objective"];
    const SolverResult r = SolvePartialL1(a, y, t, eps);
    EXPECT_TRUE(r.converged) << "case " << count;
    EXPECT_NEAR(r.objective, ref, 1e-5 * std::max(1.0, ref)) << "case " << count;
    EXPECT_LE(r.residual_norm, eps * (1 + 1e-6) + 1e-9) << "case " << count;
    EXPECT_NEAR(OffSupportL1(r.beta, t), r.objective, 1e-12);
    ++count;
  }
  EXPECT_EQ(count, 12);
}

TEST(PartialL1, OracleSupportNoiseFreeIsExact) {
  CounterRng rng(4);
  const Eigen::MatrixXd a = GaussianMatrix(30, 80, 3);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = RandomSparse(80, 12, rng);
    const SolverResult r = SolvePartialL1(a, a * x, NonzeroSupport(x), 0.0);
    EXPECT_NEAR(r.objective, 0.0, 1e-12);
    EXPECT_LT((r.beta - x).norm(), 1e-8 * x.norm());
  }
}

TEST(PartialL1, RecoversSparsestOnTinyInstances) {
  CounterRng rng(8);
  int agreed = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const Eigen::MatrixXd a = GaussianMatrix(5, 8, 500 + rep);
    const Eigen::VectorXd x = RandomSparse(8, 2, rng);
    const Eigen::VectorXd y = a * x;
    const Eigen::VectorXd sparsest = oracle::SparsestFit(a, y, 2);
    ASSERT_EQ(sparsest.size(), 8);
    const oracle::VertexMinimum v = oracle::L1ByVertexEnumeration(a, y);
    const SolverResult r = SolvePartialL1(a, y, {}, 0.0);
    EXPECT_NEAR(r.objective, v.objective, 1e-6 * std::max(1.0, v.objective));
    // Whenever l1 picks out the sparsest vector, the solver returns it.
    if (v.unique && (v.x - sparsest).norm() < 1e-8) {
      EXPECT_LT((r.beta - sparsest).norm(), 1e-6);
      ++agreed;
    }
  }
  EXPECT_GT(agreed, 10);
}

TEST(PartialL1, ObjectiveNonIncreasingInKnownPart) {
  CounterRng rng(15);
  const Eigen::MatrixXd a = GaussianMatrix(25, 60, 9);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = RandomSparse(60, 10, rng);
    Eigen::VectorXd y = a * x;
    for (int i = 0; i < 25; ++i) y[i] += 0.02 * (rng.Uniform01() - 0.5);
    const double eps = 0.1;
    Support t;
    double prev = SolvePartialL1(a, y, t, eps).objective;
    for (int i : NonzeroSupport(x)) {
      t = Union(t, {i});
      const double obj = SolvePartialL1(a, y, t, eps).objective;
      EXPECT_LE(obj, prev + 1e-6);
      prev = obj;
    }
  }
}

TEST(PartialL1, SolverReusableAndDeterministic) {
  const Eigen::MatrixXd a = GaussianMatrix(20, 50, 2);
  CounterRng rng(6);
  const Eigen::VectorXd x = RandomSparse(50, 5, rng);
  const PartialL1Solver solver(a);
  const SolverResult r1 = solver.Solve(a * x, {}, 0.05);
  const SolverResult r2 = solver.Solve(a * x, {}, 0.05);
  EXPECT_EQ(r1.beta, r2.beta);
  EXPECT_TRUE(r1.certified);
}

TEST(PartialL1, LargeEpsilonGivesZero) {
  const Eigen::MatrixXd a = GaussianMatrix(10, 20, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
  const SolverResult r = SolvePartialL1(a, y, {}, y.norm() * 1.01);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.beta.norm(), 0.0);
}

TEST(PartialL1, RejectsBadArguments) {
  const Eigen::MatrixXd a = GaussianMatrix(10, 20, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
  EXPECT_THROW(SolvePartialL1(a, y, {3, 1}, 0.1), ArgumentError);
  EXPECT_THROW(SolvePartialL1(a, y, {25}, 0.1), ArgumentError);
  EXPECT_THROW(SolvePartialL1(a, y, {}, -1.0), ArgumentError);
  EXPECT_THROW(SolvePartialL1(a, Eigen::VectorXd::Ones(9), {}, 0.1), ArgumentError);
  SolverOptions bad;
  bad.relaxation = 2.5;
  EXPECT_THROW(bad.Validate(), ConfigurationError);
}

TEST(LeastSquares, EmptySupportGivesZero) {
  const Eigen::MatrixXd a = GaussianMatrix(6, 10, 1);
  EXPECT_EQ(LeastSquaresOnSupport(a, Eigen::VectorXd::Ones(6), {}).norm(), 0.0);
}

TEST(LeastSquares, ConsistentSystemExact) {
  const Eigen::MatrixXd a = GaussianMatrix(12, 30, 3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(30);
  x[2] = 1.0;
  x[7] = -3.0;
  x[20] = 0.25;
  const Eigen::VectorXd ls = LeastSquaresOnSupport(a, a * x, {2, 7, 20});
  EXPECT_LT((ls - x).norm(), 1e-12);
}

TEST(LeastSquares, MatchesNormalEquationsInLongDouble) {
  CounterRng rng(33);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd a = GaussianMatrix(15, 40, 100 + rep);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) y[i] = rng.StandardNormal();
    std::vector<int> all(40);
    for (int i = 0; i < 40; ++i) all[i] = i;
    const Support t = SampleWithoutReplacement(all, 1 + static_cast<int>(rng.Below(12)), rng);
    const int k = static_cast<int>(t.size());
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    MatL at(15, k);
    for (int j = 0; j < k; ++j) at.col(j) = a.col(t[j]).cast<long double>();
    const MatL g = at.transpose() * at;
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> rhs = at.transpose() * y.cast<long double>();
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> c = g.ldlt().solve(rhs);
    const Eigen::VectorXd ls = LeastSquaresOnSupport(a, y, t);
    for (int j = 0; j < k; ++j) EXPECT_NEAR(ls[t[j]], static_cast<double>(c[j]), 1e-9);
    EXPECT_EQ(OffSupportL1(ls, t), 0.0);
    // Residual orthogonal to the chosen columns.
    const Eigen::VectorXd res = y - a * ls;
    for (int j : t) EXPECT_NEAR(a.col(j).dot(res), 0.0, 1e-10);
  }
}

TEST(LeastSquares, RankHandling) {
  Eigen::MatrixXd a = GaussianMatrix(5, 10, 2);
  a.col(4) = a.col(3);
  const LeastSquaresResult r = LeastSquaresOnSupportEx(a, Eigen::VectorXd::Ones(5), {3, 4});
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.rank, 1);
  EXPECT_NEAR(r.x[3], r.x[4], 1e-10);  // minimum-norm split
  EXPECT_THROW(LeastSquaresOnSupportEx(a, Eigen::VectorXd::Ones(5), {0, 1, 2, 3, 5, 6}),
               RankDeficiencyError);
}
