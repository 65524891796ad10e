#include "modcs/support.hpp"

#include <algorithm>
#include <iterator>

namespace modcs {

Support Normalize(Support s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

Support Union(const Support& a, const Support& b) {
  Support out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Support Difference(const Support& a, const Support& b) {
  Support out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

Support Intersection(const Support& a, const Support& b) {
  Support out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

bool IsSubset(const Support& sub, const Support& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool Contains(const Support& s, int i) {
  return std::binary_search(s.begin(), s.end(), i);
}

Support Complement(const Support& s, int m) {
  Support out;
  out.reserve(m - static_cast<int>(s.size()));
  auto it = s.begin();
  for (int i = 0; i < m; ++i) {
    if (it != s.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

Support NonzeroSupport(const Eigen::VectorXd& x) {
  Support out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

Support AboveThreshold(const Eigen::VectorXd& x, double threshold) {
  Support out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

Eigen::MatrixXd SelectColumns(const Eigen::MatrixXd& a, const Support& cols) {
  Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = a.col(cols[k]);
  return out;
}

Eigen::VectorXd SelectEntries(const Eigen::VectorXd& x, const Support& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = x[idx[k]];
  return out;
}

}  // namespace modcs
