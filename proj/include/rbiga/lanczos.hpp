#pragma once

#include "rbiga/assembly.hpp"

#include <Eigen/Dense>

#include <span>

namespace rbiga {

enum class Spectrum { Smallest, Largest };

struct EigenEstimate {
  double value = 0.0;
  Eigen::VectorXd vector; ///< X-normalized eigenvector
  double residual = 0.0;  ///< |A y - value X y| / |A y|
  int iterations = 0;
};

/// Extreme eigenpair of A y = lambda X y by Lanczos in the X inner product
/// with full reorthogonalization. `Smallest` runs shift-invert on A^{-1} X and
/// needs A positive definite; `Largest` runs on X^{-1} A.
EigenEstimate generalized_eigenpair(const SparseMatrix& a, const SparseMatrix& x,
                                    const SpdSolver& x_solver, Spectrum which,
                                    double tol = 1e-13, int max_iterations = 300);

/// alpha(mu) = inf_v a(v, v; mu) / |v|_X^2 on the free DOFs.
EigenEstimate exact_coercivity_smallscale(const AffineFormDecomposition& constrained,
                                          const SparseMatrix& x_gram, const SpdSolver& x_solver,
                                          std::span<const double> mu);

} // namespace rbiga
