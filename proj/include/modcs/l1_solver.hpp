#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include "modcs/support.hpp"

namespace modcs {

struct SolverOptions {
  double feas_tol = 1e-6;  // relative slack on ||y - A b|| <= eps
  double opt_tol = 1e-6;   // relative tolerance on optimality
  int max_iters = 20000;
  double rho = 1.0;         // initial ADMM penalty
  double relaxation = 1.6;  // over-relaxation factor in (0, 2)
  bool polish = true;       // support-restricted exact refinement

  void Validate() const;
};

struct SolverResult {
  Eigen::VectorXd beta;
  double objective = 0.0;      // ||beta_{T^c}||_1
  double residual_norm = 0.0;  // ||y - A beta||
  int iterations = 0;
  bool converged = false;
  bool certified = false;  // optimality verified by a dual certificate
};

// min ||b_{T^c}||_1 subject to ||y - A b|| <= eps.
// Holds a factorization of A so repeated solves with the same matrix are cheap.
// Thread-safe for concurrent Solve calls.
class PartialL1Solver {
 public:
  explicit PartialL1Solver(const Eigen::MatrixXd& a, SolverOptions opts = {});

  SolverResult Solve(const Eigen::VectorXd& y, const Support& t, double epsilon) const;

  const Eigen::MatrixXd& matrix() const { return a_; }
  const SolverOptions& options() const { return opts_; }

 private:
  struct Projection;
  Projection PrepareProjection(const Eigen::VectorXd& y, double epsilon) const;
  void Project(const Projection& proj, const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
  bool Polish(const Eigen::VectorXd& y, const Support& t, double epsilon,
              const Eigen::VectorXd& z, SolverResult& result) const;
  void Finalize(const Eigen::VectorXd& y, const Support& t, SolverResult& r) const;

  Eigen::MatrixXd a_;
  SolverOptions opts_;
  Eigen::MatrixXd u_;  // n x k
  Eigen::VectorXd s_;  // k singular values above tolerance
  Eigen::MatrixXd v_;  // m x k
};

// One-shot convenience wrapper.
SolverResult SolvePartialL1(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                            const Support& t, double epsilon,
                            const SolverOptions& opts = {});

struct LeastSquaresResult {
  Eigen::VectorXd x;  // length m, zero outside the support
  int rank = 0;
  bool rank_deficient = false;
};

// Relative singular value cutoff used to decide numerical rank.
constexpr double kLeastSquaresRankTol = 1e-10;

// Minimum-norm least squares restricted to columns t. Throws
// RankDeficiencyError when |t| exceeds the number of rows.
LeastSquaresResult LeastSquaresOnSupportEx(const Eigen::MatrixXd& a,
                                           const Eigen::VectorXd& y, const Support& t);
Eigen::VectorXd LeastSquaresOnSupport(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                      const Support& t);

}  // namespace modcs
