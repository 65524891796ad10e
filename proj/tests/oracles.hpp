// Brute-force reference computations shared by the unit and acceptance tests.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "modcs/random.hpp"

namespace oracle {

inline void ForEachSubset(int m, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> idx(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      f(idx);
      return;
    }
    for (int i = start; i <= m - (k - depth); ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

struct VertexMinimum {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
  bool unique = false;
};

// min ||b||_1 s.t. A b = y over all basic solutions: every square nonsingular
// A_S of size rank(A). An LP optimum is attained at one of them.
inline VertexMinimum L1ByVertexEnumeration(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(a.rows()), m = static_cast<int>(a.cols());
  struct Candidate {
    double obj;
    Eigen::VectorXd x;
  };
  std::vector<Candidate> found;
  ForEachSubset(m, n, [&](const std::vector<int>& s) {
    Eigen::MatrixXd sub(n, n);
    for (int i = 0; i < n; ++i) sub.col(i) = a.col(s[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() < n) return;
    const Eigen::VectorXd c = lu.solve(y);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) x[s[i]] = c[i];
    found.push_back({x.lpNorm<1>(), x});
  });
  VertexMinimum best;
  for (const auto& c : found) {
    if (c.obj < best.objective) {
      best.objective = c.obj;
      best.x = c.x;
    }
  }
  const double tol = 1e-9 * std::max(1.0, best.objective);
  best.unique = true;
  for (const auto& c : found) {
    if (c.obj <= best.objective + tol && (c.x - best.x).norm() > 1e-7) best.unique = false;
  }
  return best;
}

// Sparsest exact fit A b = y over supports of size at most kmax.
inline Eigen::VectorXd SparsestFit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                   int kmax) {
  const int m = static_cast<int>(a.cols());
  for (int k = 0; k <= kmax; ++k) {
    Eigen::VectorXd best;
    ForEachSubset(m, k, [&](const std::vector<int>& s) {
      if (best.size()) return;
      Eigen::MatrixXd sub(a.rows(), k);
      for (int i = 0; i < k; ++i) sub.col(i) = a.col(s[i]);
      const Eigen::VectorXd c = k ? Eigen::VectorXd(sub.colPivHouseholderQr().solve(y))
                                  : Eigen::VectorXd();
      const Eigen::VectorXd r = k ? Eigen::VectorXd(y - sub * c) : y;
      if (r.norm() <= 1e-9 * std::max(1.0, y.norm())) {
        best = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < k; ++i) best[s[i]] = c[i];
      }
    });
    if (best.size()) return best;
  }
  return {};
}

// delta_S straight from the definition.
inline double RicByDefinition(const Eigen::MatrixXd& a, int s) {
  double best = 0.0;
  ForEachSubset(static_cast<int>(a.cols()), s, [&](const std::vector<int>& idx) {
    Eigen::MatrixXd sub(a.rows(), s);
    for (int i = 0; i < s; ++i) sub.col(i) = a.col(idx[i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.transpose() * sub);
    best = std::max({best, es.eigenvalues().maxCoeff() - 1.0, 1.0 - es.eigenvalues().minCoeff()});
  });
  return best;
}

// 15 x 16 unit-norm tight frame: a 16-point Hadamard basis with its constant
// row removed, then a random rotation of the rows, random column signs and a
// random column order. Every S columns have delta_S = max(1/15, (S-1)/15).
inline Eigen::MatrixXd HadamardFrame(modcs::CounterRng& rng) {
  Eigen::MatrixXd h(16, 16);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) h(i, j) = (__builtin_popcount(i & j) % 2) ? -0.25 : 0.25;
  }
  Eigen::MatrixXd a = h.bottomRows(15) * std::sqrt(16.0 / 15.0);
  Eigen::MatrixXd g(15, 15);
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) g(i, j) = rng.StandardNormal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  a = q * a;
  std::vector<int> order(16);
  for (int i = 0; i < 16; ++i) order[i] = i;
  for (int i = 15; i > 0; --i) std::swap(order[i], order[rng.Below(i + 1)]);
  Eigen::MatrixXd out(15, 16);
  for (int j = 0; j < 16; ++j) out.col(j) = a.col(order[j]) * ((rng() >> 63) ? 1.0 : -1.0);
  return out;
}

}  // namespace oracle
