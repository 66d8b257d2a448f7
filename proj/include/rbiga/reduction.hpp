#pragma once

#include "rbiga/assembly.hpp"
#include "rbiga/certification.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rbiga {

/// Lagrange reduced space on the free DOFs; columns of z are X-orthonormal.
struct RBSpace {
  Eigen::MatrixXd z;
  Eigen::MatrixXd xz; ///< X_gram * z
  std::vector<std::vector<double>> samples;

  int n() const { return static_cast<int>(z.cols()); }
};

/// Modified Gram-Schmidt in the X inner product with one reorthogonalization
/// pass. Returns false and leaves the space unchanged when the remainder is
/// below 1e-10 of the snapshot's X-norm.
bool gram_schmidt_append(RBSpace& space, const Eigen::VectorXd& snapshot, const SparseMatrix& x_gram,
                         const std::vector<double>& mu);

/// u_N = Z u, with u possibly shorter than the basis.
Eigen::VectorXd reconstruct(const RBSpace& space, const Eigen::VectorXd& u);

/// Everything the online stage needs; sizes depend on N, Q, Q_f and P only.
struct OnlineModel {
  ParameterDomain parameters;
  std::vector<ScalarExpression> theta_a;
  std::vector<ScalarExpression> theta_f;
  std::vector<Eigen::MatrixXd> a_n; ///< Z^T A^q Z
  std::vector<Eigen::VectorXd> f_n; ///< Z^T f^p
  ResidualData residual;
  CoercivityModel coercivity;

  int n() const { return a_n.empty() ? 0 : static_cast<int>(a_n.front().rows()); }
  int q() const { return static_cast<int>(theta_a.size()); }
  int q_f() const { return static_cast<int>(theta_f.size()); }
  Eigen::VectorXd thetas(std::span<const double> mu) const;
  Eigen::VectorXd rhs_thetas(std::span<const double> mu) const;
  /// Model of the space spanned by the first `basis_count` vectors.
  OnlineModel truncated(int basis_count) const;
};

/// Dense N x N Galerkin solve. Throws DomainError outside the parameter box.
Eigen::VectorXd online_solve(const OnlineModel& model, std::span<const double> mu);

/// s_N = f_N(mu)^T u.
double online_output(const OnlineModel& model, std::span<const double> mu, const Eigen::VectorXd& u);

struct OnlineResult {
  Eigen::VectorXd u;
  double output = 0.0;
  double residual = 0.0;
  double alpha_lb = 0.0;
  double delta_energy = 0.0;
  double delta_x = 0.0;
  double delta_output = 0.0;

  double delta(Estimator e) const {
    return e == Estimator::Energy ? delta_energy : e == Estimator::XNorm ? delta_x : delta_output;
  }
};

/// Solve, output, residual dual norm, coercivity bound and every estimator.
OnlineResult online_query(const OnlineModel& model, std::span<const double> mu);

/// Offline side of the reduced model: keeps the truth-sized data needed to
/// extend the space one snapshot at a time.
class OfflineBuilder {
public:
  OfflineBuilder(const TruthProblem& truth, CoercivityModel coercivity);

  /// Orthonormalizes and appends the snapshot, updating the projected
  /// operators and the residual data incrementally. False when collinear.
  bool append(const Eigen::VectorXd& snapshot, const std::vector<double>& mu);

  const RBSpace& space() const { return space_; }
  const OnlineModel& model() const { return model_; }

private:
  void add_representer(const Eigen::VectorXd& g);

  const TruthProblem* truth_;
  RBSpace space_;
  OnlineModel model_;
  Eigen::MatrixXd reps_;  ///< Riesz representers X^{-1} g
  Eigen::MatrixXd g_;     ///< the functionals g (f^p or A^q zeta_n)
  Eigen::MatrixXd w_;     ///< X-orthonormalized representers
  Eigen::MatrixXd xw_;    ///< X_gram * w_
};

} // namespace rbiga
