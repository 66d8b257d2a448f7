#include "rbiga/lanczos.hpp"

#include "rbiga/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace rbiga {

EigenEstimate generalized_eigenpair(const SparseMatrix& a, const SparseMatrix& x,
                                    const SpdSolver& x_solver, Spectrum which, double tol,
                                    int max_iterations) {
  const Eigen::Index n = a.rows();
  if (n == 0 || x.rows() != n)
    throw DomainError("eigenproblem: empty or mismatched matrices");
  SpdSolver a_solver;
  if (which == Spectrum::Smallest) {
    a_solver.compute(a);
    if (!a_solver.factorized())
      throw SolverError("eigenproblem: shift-invert needs a positive definite operator");
  }
  auto apply = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
    if (which == Spectrum::Smallest)
      return a_solver.solve(x * q);
    return x_solver.solve(a * q);
  };

  const int m_max = static_cast<int>(std::min<Eigen::Index>(max_iterations, n));
  Eigen::MatrixXd q(n, m_max + 1), xq(n, m_max + 1);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = nd(rng);
  Eigen::VectorXd xv = x * v;
  double nv = std::sqrt(v.dot(xv));
  q.col(0) = v / nv;
  xq.col(0) = xv / nv;

  std::vector<double> alpha, beta;
  EigenEstimate out;
  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXd w = apply(q.col(j));
    alpha.push_back(w.dot(xq.col(j)));
    // two passes of full reorthogonalization in the X inner product
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i)
        w -= w.dot(xq.col(i)) * q.col(i);
    const Eigen::VectorXd xw = x * w;
    const double b = std::sqrt(std::max(0.0, w.dot(xw)));

    const int k = j + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k)
        t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    // shift-invert maps the smallest lambda to the largest Ritz value
    const Eigen::Index pick = k - 1;
    const double theta = es.eigenvalues()(pick);
    const Eigen::VectorXd s = es.eigenvectors().col(pick);
    const double estimate = b * std::abs(s(k - 1));
    const bool exhausted = b <= 1e-14 * std::max(1.0, std::abs(theta)) || k == n;
    if (estimate <= tol * std::abs(theta) || exhausted || k == m_max) {
      Eigen::VectorXd y = q.leftCols(k) * s;
      const double ny = std::sqrt(y.dot(x * y));
      y /= ny;
      const double lambda = which == Spectrum::Smallest ? 1.0 / theta : theta;
      const Eigen::VectorXd ay = a * y;
      out.value = lambda;
      out.vector = std::move(y);
      out.residual = (ay - lambda * (x * out.vector)).norm() / std::max(ay.norm(), 1e-300);
      out.iterations = k;
      if (!(estimate <= tol * std::abs(theta) || exhausted)) {
        std::ostringstream os;
        os << "eigenproblem: Lanczos did not converge in " << k << " iterations (residual estimate "
           << estimate / std::abs(theta) << ")";
        throw SolverError(os.str());
      }
      return out;
    }
    beta.push_back(b);
    q.col(k) = w / b;
    xq.col(k) = xw / b;
  }
  throw SolverError("eigenproblem: Lanczos stopped without a result");
}

EigenEstimate exact_coercivity_smallscale(const AffineFormDecomposition& constrained,
                                          const SparseMatrix& x_gram, const SpdSolver& x_solver,
                                          std::span<const double> mu) {
  return generalized_eigenpair(constrained.matrix(mu), x_gram, x_solver, Spectrum::Smallest);
}

} // namespace rbiga
