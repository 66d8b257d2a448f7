#pragma once

#include "rbiga/splines.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

/// Random open knot vector on [0,1] with interior multiplicities <= degree.
inline rbiga::KnotVector random_knots(std::mt19937_64& rng, int degree, int max_interior = 5) {
  std::uniform_int_distribution<int> count(0, max_interior);
  std::uniform_int_distribution<int> mult(1, std::max(1, degree));
  std::uniform_real_distribution<double> pos(0.05, 0.95);
  std::vector<double> interior;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double v = std::round(pos(rng) * 1000.0) / 1000.0;
    bool dup = false;
    for (double w : interior)
      dup = dup || w == v;
    if (dup)
      continue;
    const int m = degree == 0 ? 1 : mult(rng);
    for (int k = 0; k < m; ++k)
      interior.push_back(v);
  }
  std::sort(interior.begin(), interior.end());
  std::vector<double> values(static_cast<std::size_t>(degree + 1), 0.0);
  values.insert(values.end(), interior.begin(), interior.end());
  values.insert(values.end(), static_cast<std::size_t>(degree + 1), 1.0);
  return rbiga::KnotVector(values, degree);
}

/// Textbook recursive Cox-de Boor with 0/0 = 0; x = 1 is folded into the last span.
inline double cox_de_boor(const std::vector<double>& xi, int i, int p, double x) {
  if (p == 0) {
    const double last = xi.back();
    if (x == last) {
      // the last nonzero span owns the right endpoint
      std::size_t k = xi.size() - 1;
      while (k > 0 && xi[k - 1] == last)
        --k;
      return static_cast<std::size_t>(i) == k - 1 ? 1.0 : 0.0;
    }
    return (xi[static_cast<std::size_t>(i)] <= x && x < xi[static_cast<std::size_t>(i) + 1]) ? 1.0 : 0.0;
  }
  double a = 0.0, b = 0.0;
  const double d1 = xi[static_cast<std::size_t>(i + p)] - xi[static_cast<std::size_t>(i)];
  const double d2 = xi[static_cast<std::size_t>(i + p + 1)] - xi[static_cast<std::size_t>(i + 1)];
  if (d1 != 0.0)
    a = (x - xi[static_cast<std::size_t>(i)]) / d1 * cox_de_boor(xi, i, p - 1, x);
  if (d2 != 0.0)
    b = (xi[static_cast<std::size_t>(i + p + 1)] - x) / d2 * cox_de_boor(xi, i + 1, p - 1, x);
  return a + b;
}

inline std::vector<double> knots_of(const rbiga::KnotVector& kv) {
  return {kv.values().begin(), kv.values().end()};
}

/// All n basis values at x from the recursive oracle.
inline Eigen::VectorXd oracle_basis(const rbiga::KnotVector& kv, double x) {
  const auto xi = knots_of(kv);
  Eigen::VectorXd v(kv.size());
  for (int i = 0; i < kv.size(); ++i)
    v(i) = cox_de_boor(xi, i, kv.degree(), x);
  return v;
}

/// Dense basis vector from the library's span evaluation.
inline Eigen::VectorXd dense_basis(const rbiga::KnotVector& kv, double x, int row = 0) {
  const rbiga::BasisSpan b = rbiga::eval_basis_derivatives(kv, x, std::max(row, 0));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kv.size());
  for (int j = 0; j <= kv.degree(); ++j)
    v(b.first_index(kv.degree()) + j) = b.ders(row, j);
  return v;
}

inline Eigen::MatrixXd random_points(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j)
      m(i, j) = u(rng);
  return m;
}

} // namespace testing_support
