#pragma once

#include <Eigen/Core>
#include <vector>

namespace modcs {

// Sorted, duplicate-free list of 0-based coordinate indices.
using Support = std::vector<int>;

Support Normalize(Support s);
Support Union(const Support& a, const Support& b);
Support Difference(const Support& a, const Support& b);
Support Intersection(const Support& a, const Support& b);
bool IsSubset(const Support& sub, const Support& super);
bool Contains(const Support& s, int i);

// Indices in [0, m) that are not in s.
Support Complement(const Support& s, int m);

// Indices with nonzero value.
Support NonzeroSupport(const Eigen::VectorXd& x);

// Indices with |x_i| > threshold (strict).
Support AboveThreshold(const Eigen::VectorXd& x, double threshold);

Eigen::MatrixXd SelectColumns(const Eigen::MatrixXd& a, const Support& cols);
Eigen::VectorXd SelectEntries(const Eigen::VectorXd& x, const Support& idx);

}  // namespace modcs
