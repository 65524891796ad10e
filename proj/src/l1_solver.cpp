#include "modcs/l1_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <string>

#include "modcs/errors.hpp"

namespace modcs {

namespace {

constexpr int kPolishRounds = 60;
constexpr int kPolishEvery = 25;
constexpr double kLooseRelTol = 1e-3;

void CheckSupport(const Support& t, int m) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0 || t[i] >= m || (i > 0 && t[i] <= t[i - 1])) {
      throw ArgumentError("support must be sorted, unique and within [0, m)");
    }
  }
}

double Shrink(double v, double k) {
  if (v > k) return v - k;
  if (v < -k) return v + k;
  return 0.0;
}

double OffSupportL1(const Eigen::VectorXd& x, const std::vector<char>& in_t) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!in_t[i]) s += std::abs(x[i]);
  }
  return s;
}

}  // namespace

void SolverOptions::Validate() const {
  if (!(feas_tol > 0.0) || !(opt_tol > 0.0)) {
    throw ConfigurationError("SolverOptions: tolerances must be positive");
  }
  if (max_iters < 1) throw ConfigurationError("SolverOptions: max_iters must be >= 1");
  if (!(rho > 0.0)) throw ConfigurationError("SolverOptions: rho must be positive");
  if (!(relaxation > 0.0 && relaxation < 2.0)) {
    throw ConfigurationError("SolverOptions: relaxation must lie in (0, 2)");
  }
}

struct PartialL1Solver::Projection {
  Eigen::VectorXd b;  // U' y
  double eps_eff = 0.0;
};

PartialL1Solver::PartialL1Solver(const Eigen::MatrixXd& a, SolverOptions opts)
    : a_(a), opts_(opts) {
  opts_.Validate();
  if (a.rows() == 0 || a.cols() == 0) throw ConfigurationError("PartialL1Solver: empty A");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? sv[0] * 1e-12 * std::max(a.rows(), a.cols()) : 0.0;
  Eigen::Index k = 0;
  while (k < sv.size() && sv[k] > cutoff) ++k;
  u_ = svd.matrixU().leftCols(k);
  s_ = sv.head(k);
  v_ = svd.matrixV().leftCols(k);
}

PartialL1Solver::Projection PartialL1Solver::PrepareProjection(const Eigen::VectorXd& y,
                                                               double epsilon) const {
  Projection p;
  p.b = u_.transpose() * y;
  // Component of y outside range(A); exactly zero when A has full row rank.
  const double r0sq =
      u_.cols() == u_.rows() ? 0.0 : (y - u_ * p.b).squaredNorm();
  const double slack = epsilon * opts_.feas_tol + 1e-10 * y.norm();
  if (std::sqrt(r0sq) > epsilon + slack) {
    throw InfeasibleError("no b satisfies ||y - A b|| <= eps (residual outside range(A) is " +
                          std::to_string(std::sqrt(r0sq)) + ")");
  }
  p.eps_eff = std::sqrt(std::max(0.0, epsilon * epsilon - r0sq));
  return p;
}

void PartialL1Solver::Project(const Projection& proj, const Eigen::VectorXd& v,
                              Eigen::VectorXd& out) const {
  const Eigen::VectorXd p = v_.transpose() * v;
  const Eigen::VectorXd g = s_.cwiseProduct(p) - proj.b;
  const double gn = g.norm();
  if (gn <= proj.eps_eff) {
    out = v;
    return;
  }
  Eigen::VectorXd c(g.size());
  if (proj.eps_eff == 0.0) {
    c = -g.cwiseQuotient(s_);
  } else {
    // Newton on 1/||r(lambda)|| - 1/eps, r_i = g_i / (1 + lambda s_i^2).
    const Eigen::VectorXd s2 = s_.cwiseAbs2();
    const Eigen::VectorXd g2 = g.cwiseAbs2();
    double lambda = 0.0;
    for (int it = 0; it < 100; ++it) {
      double rsq = 0.0, drsq = 0.0;
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double q = 1.0 + lambda * s2[i];
        rsq += g2[i] / (q * q);
        drsq += g2[i] * s2[i] / (q * q * q);
      }
      const double rn = std::sqrt(rsq);
      if (std::abs(rn - proj.eps_eff) <= 1e-13 * proj.eps_eff) break;
      const double phi = 1.0 / rn - 1.0 / proj.eps_eff;
      const double dphi = drsq / (rsq * rn);
      const double step = phi / dphi;
      lambda = std::max(lambda - step, 0.5 * lambda);
      if (std::abs(step) <= 1e-15 * lambda) break;
    }
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      c[i] = -lambda * s_[i] * g[i] / (1.0 + lambda * s_[i] * s_[i]);
    }
  }
  out = v + v_ * c;
}

void PartialL1Solver::Finalize(const Eigen::VectorXd& y, const Support& t,
                               SolverResult& r) const {
  std::vector<char> in_t(a_.cols(), 0);
  for (int i : t) in_t[i] = 1;
  r.objective = OffSupportL1(r.beta, in_t);
  r.residual_norm = (y - a_ * r.beta).norm();
}

bool PartialL1Solver::Polish(const Eigen::VectorXd& y, const Support& t, double epsilon,
                             const Eigen::VectorXd& z, SolverResult& result) const {
  const int m = static_cast<int>(a_.cols());
  const int n = static_cast<int>(a_.rows());
  std::vector<char> in_t(m, 0);
  for (int i : t) in_t[i] = 1;

  // Candidate support J = T plus off-T entries of z, with signs c (0 on T).
  std::vector<int> extra;
  std::vector<double> extra_sign;
  for (int i = 0; i < m; ++i) {
    if (!in_t[i] && z[i] != 0.0) {
      extra.push_back(i);
      extra_sign.push_back(z[i] > 0 ? 1.0 : -1.0);
    }
  }

  for (int round = 0; round < kPolishRounds; ++round) {
    Support j = t;
    j.insert(j.end(), extra.begin(), extra.end());
    const int nj = static_cast<int>(j.size());
    if (nj > n || extra.empty()) return false;
    const Eigen::MatrixXd aj = SelectColumns(a_, j);
    const Eigen::MatrixXd gram = aj.transpose() * aj;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) return false;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nj);
    for (std::size_t k = 0; k < extra.size(); ++k) c[t.size() + k] = extra_sign[k];

    const Eigen::VectorXd beta_ls = llt.solve(aj.transpose() * y);
    const Eigen::VectorXd r_ls = y - aj * beta_ls;
    const Eigen::VectorXd h = llt.solve(c);
    const double q = c.dot(h);
    if (!(q > 0.0)) return false;

    Eigen::VectorXd beta_j;
    Eigen::VectorXd dual;
    const double rho_sq = epsilon * epsilon - r_ls.squaredNorm();
    const bool fits = epsilon > 0.0 ? rho_sq > 0.0 : r_ls.norm() <= 1e-10 * (1.0 + y.norm());
    if (!fits) {
      // Support too small to reach the constraint: add the column most
      // correlated with the LS residual.
      const Eigen::VectorXd corr = a_.transpose() * r_ls;
      int best = -1;
      double best_val = 0.0;
      for (int i = 0; i < m; ++i) {
        if (in_t[i] || std::find(extra.begin(), extra.end(), i) != extra.end()) continue;
        if (std::abs(corr[i]) > best_val) {
          best_val = std::abs(corr[i]);
          best = i;
        }
      }
      if (best < 0) return false;
      extra.push_back(best);
      extra_sign.push_back(corr[best] > 0 ? 1.0 : -1.0);
      continue;
    }
    if (epsilon > 0.0) {
      const double rho = std::sqrt(rho_sq);
      beta_j = beta_ls - (rho / std::sqrt(q)) * h;
      dual = (std::sqrt(q) / rho) * (y - aj * beta_j);
    } else {
      beta_j = beta_ls;
      dual = aj * h;
    }

    // Drop entries whose sign disagrees with the assumed pattern.
    std::vector<int> keep_idx;
    std::vector<double> keep_sign;
    for (std::size_t k = 0; k < extra.size(); ++k) {
      if (beta_j[t.size() + k] * extra_sign[k] > 0.0) {
        keep_idx.push_back(extra[k]);
        keep_sign.push_back(extra_sign[k]);
      }
    }
    if (keep_idx.size() != extra.size()) {
      extra = std::move(keep_idx);
      extra_sign = std::move(keep_sign);
      continue;
    }

    const Eigen::VectorXd corr = a_.transpose() * dual;
    std::vector<char> in_j(m, 0);
    for (int i : j) in_j[i] = 1;
    int worst = -1;
    double worst_val = 1.0 + opts_.opt_tol;
    for (int i = 0; i < m; ++i) {
      if (!in_j[i] && std::abs(corr[i]) > worst_val) {
        worst_val = std::abs(corr[i]);
        worst = i;
      }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < nj; ++k) beta[j[k]] = beta_j[k];
    if (worst < 0) {
      result.beta = std::move(beta);
      result.certified = true;
      result.converged = true;
      Finalize(y, t, result);
      return true;
    }
    // Not certified yet; keep the candidate if it improves on the current one.
    const double obj = OffSupportL1(beta, in_t);
    if (result.beta.size() == 0 || obj < result.objective) {
      result.beta = beta;
      Finalize(y, t, result);
    }
    extra.push_back(worst);
    extra_sign.push_back(corr[worst] > 0 ? 1.0 : -1.0);
  }
  return false;
}

SolverResult PartialL1Solver::Solve(const Eigen::VectorXd& y, const Support& t,
                                    double epsilon) const {
  const int m = static_cast<int>(a_.cols());
  const int n = static_cast<int>(a_.rows());
  if (y.size() != n) throw ArgumentError("Solve: y length does not match A");
  if (!(epsilon >= 0.0)) throw ArgumentError("Solve: epsilon must be nonnegative");
  CheckSupport(t, m);

  const Projection proj = PrepareProjection(y, epsilon);
  SolverResult result;

  // Zero objective is attainable when least squares on T meets the constraint.
  if (static_cast<int>(t.size()) <= n) {
    Eigen::VectorXd ls = LeastSquaresOnSupport(a_, y, t);
    const double res = (y - a_ * ls).norm();
    if (res <= epsilon * (1.0 + opts_.feas_tol) + 1e-10 * y.norm()) {
      result.beta = std::move(ls);
      result.converged = true;
      result.certified = true;
      Finalize(y, t, result);
      return result;
    }
  }

  std::vector<char> in_t(m, 0);
  for (int i : t) in_t[i] = 1;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z_old(m), beta_hat(m), v(m);
  double rho = opts_.rho;
  const double alpha = opts_.relaxation;
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const double eps_abs = 1e-9 * std::max(1.0, y.norm());
  Support last_polish_support;
  bool admm_converged = false;

  auto admm = [&](double eps_rel, int iter_cap) {
    while (result.iterations < iter_cap) {
      ++result.iterations;
      v = z - u;
      Project(proj, v, beta);
      beta_hat = alpha * beta + (1.0 - alpha) * z;
      z_old = z;
      const double k = 1.0 / rho;
      for (int i = 0; i < m; ++i) {
        const double w = beta_hat[i] + u[i];
        z[i] = in_t[i] ? w : Shrink(w, k);
      }
      u += beta_hat - z;

      const double r_pri = (beta - z).norm();
      const double r_dual = rho * (z - z_old).norm();
      const double eps_pri = sqrt_m * eps_abs + eps_rel * std::max(beta.norm(), z.norm());
      const double eps_dual = sqrt_m * eps_abs + eps_rel * rho * u.norm();
      if (r_pri <= eps_pri && r_dual <= eps_dual) return true;

      if (result.iterations % 10 == 0) {
        if (r_pri > 10.0 * r_dual) {
          rho *= 2.0;
          u *= 0.5;
        } else if (r_dual > 10.0 * r_pri) {
          rho *= 0.5;
          u *= 2.0;
        }
      }
      if (opts_.polish && result.iterations % kPolishEvery == 0) {
        Support supp = NonzeroSupport(z);
        if (supp == last_polish_support) {
          SolverResult trial;
          trial.iterations = result.iterations;
          if (Polish(y, t, epsilon, z, trial)) {
            result = std::move(trial);
            return true;
          }
        }
        last_polish_support = std::move(supp);
      }
    }
    return false;
  };

  const double loose = std::max(opts_.opt_tol, kLooseRelTol);
  admm_converged = admm(loose, opts_.max_iters);
  if (result.certified) return result;
  if (opts_.polish) {
    SolverResult trial;
    trial.iterations = result.iterations;
    if (Polish(y, t, epsilon, z, trial)) return trial;
  }
  if (loose > opts_.opt_tol) {
    admm_converged = admm(opts_.opt_tol, opts_.max_iters);
    if (result.certified) return result;
  }

  result.beta = beta;
  result.converged = admm_converged;
  Finalize(y, t, result);
  if (opts_.polish) {
    SolverResult trial;
    trial.iterations = result.iterations;
    if (Polish(y, t, epsilon, z, trial)) return trial;
    if (trial.beta.size() && trial.objective <= result.objective &&
        trial.residual_norm <= epsilon * (1.0 + opts_.feas_tol) + 1e-10 * y.norm()) {
      trial.converged = admm_converged;
      return trial;
    }
  }
  return result;
}

SolverResult SolvePartialL1(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                            const Support& t, double epsilon, const SolverOptions& opts) {
  return PartialL1Solver(a, opts).Solve(y, t, epsilon);
}

LeastSquaresResult LeastSquaresOnSupportEx(const Eigen::MatrixXd& a,
                                           const Eigen::VectorXd& y, const Support& t) {
  if (y.size() != a.rows()) throw ArgumentError("LeastSquaresOnSupport: y length mismatch");
  CheckSupport(t, static_cast<int>(a.cols()));
  if (static_cast<Eigen::Index>(t.size()) > a.rows()) {
    throw RankDeficiencyError("LeastSquaresOnSupport: |T| = " + std::to_string(t.size()) +
                              " exceeds n = " + std::to_string(a.rows()));
  }
  LeastSquaresResult out;
  out.x = Eigen::VectorXd::Zero(a.cols());
  if (t.empty()) return out;
  const Eigen::MatrixXd at = SelectColumns(a, t);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kLeastSquaresRankTol);
  cod.compute(at);
  const Eigen::VectorXd sol = cod.solve(y);
  for (std::size_t k = 0; k < t.size(); ++k) out.x[t[k]] = sol[k];
  out.rank = static_cast<int>(cod.rank());
  out.rank_deficient = out.rank < static_cast<int>(t.size());
  return out;
}

Eigen::VectorXd LeastSquaresOnSupport(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                      const Support& t) {
  return LeastSquaresOnSupportEx(a, y, t).x;
}

}  // namespace modcs
