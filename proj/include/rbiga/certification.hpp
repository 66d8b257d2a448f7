#pragma once

#include "rbiga/assembly.hpp"
#include "rbiga/expression.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rbiga {

/// X-inner products of the Riesz representers of f^p and A^q zeta_n, ordered
/// [f^1 .. f^Qf, (n=1: A^1 .. A^Q), (n=2: ...), ...]. Appending a basis
/// vector appends a trailing block, so any leading block describes a smaller space.
struct ResidualData {
  int q_f = 0;
  int q_a = 0;
  int n = 0;
  Eigen::MatrixXd gram;   ///< size() x size()
  Eigen::MatrixXd factor; ///< upper triangular R with R^T R = gram

  int size() const { return q_f + q_a * n; }
  int index_a(int basis, int term) const { return q_f + basis * q_a + term; }
  Eigen::MatrixXd c_ff() const { return gram.topLeftCorner(q_f, q_f); }
  Eigen::MatrixXd c_fa() const { return gram.topRightCorner(q_f, q_a * n); }
  Eigen::MatrixXd c_aa() const { return gram.bottomRightCorner(q_a * n, q_a * n); }
  /// Data of the space spanned by the first `basis_count` vectors.
  ResidualData truncated(int basis_count) const;
};

/// c = [Theta_f ; -Theta_a(q) u_n] in the representer ordering.
Eigen::VectorXd residual_coefficients(const ResidualData& data, const Eigen::VectorXd& theta_a,
                                      const Eigen::VectorXd& theta_f, const Eigen::VectorXd& u);

/// |r(.; mu)|_{X'} = |R c|_2, free of the cancellation in c^T G c.
double residual_dual_norm(const ResidualData& data, const Eigen::VectorXd& theta_a,
                          const Eigen::VectorXd& theta_f, const Eigen::VectorXd& u);

/// sqrt(max(0, c^T G c)) from the Gram blocks; kept for comparison.
double residual_dual_norm_gram(const ResidualData& data, const Eigen::VectorXd& theta_a,
                               const Eigen::VectorXd& theta_f, const Eigen::VectorXd& u);

/// min c^T x subject to A x >= b and lower <= x <= upper.
struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double value = 0.0;
};

/// Dense two-phase simplex with Bland's rule; meant for a handful of variables.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

enum class CoercivityStrategy { MinTheta, Scm };

struct ScmSample {
  std::vector<double> mu;
  double alpha = 0.0;  ///< exact coercivity constant at mu
  Eigen::VectorXd theta; ///< y^T A^q y of the minimizing eigenvector
};

/// Parametric coercivity lower bound; only Q-, P- and sample-sized data.
struct CoercivityModel {
  CoercivityStrategy strategy = CoercivityStrategy::MinTheta;
  std::vector<ScalarExpression> thetas;
  Eigen::VectorXd theta_ref;

  std::vector<ScmSample> samples;
  Eigen::VectorXd box_lower;
  Eigen::VectorXd box_upper;
  std::vector<double> distance_scale; ///< per parameter, for nearest-sample search
  int neighbors = 4;
  double epsilon = 0.75;
  bool converged = true;

  Eigen::VectorXd theta_values(std::span<const double> mu) const;
  double lower_bound(std::span<const double> mu) const;
  /// SCM only: min over stored samples of sum theta_q Theta^q(mu).
  double upper_bound(std::span<const double> mu) const;
};

/// alpha_LB(mu) = min_q Theta^q(mu) / Theta^q(mu_ref). Throws StrategyError when
/// a Theta^q is not positive at `checks` or a term is not positive semi-definite.
CoercivityModel min_theta_model(const TruthProblem& truth,
                                std::span<const std::vector<double>> checks);

struct ScmOptions {
  double epsilon = 0.75;
  int neighbors = 4;
  int max_samples = 60;
};

/// Greedy-on-gap successive constraint method over the training set.
CoercivityModel scm_train(const TruthProblem& truth, std::span<const std::vector<double>> training,
                          const ScmOptions& options = {});

enum class Estimator { Energy, XNorm, Output };

/// Energy variant |r| / sqrt(alpha_LB) bounds |e|_mu; X variant |r| / alpha_LB bounds |e|_X;
/// output variant |r|^2 / alpha_LB bounds s - s_N = |e|_mu^2 in the compliant case.
double error_estimator(double residual_norm, double alpha_lb, Estimator which);

std::string to_string(Estimator e);
std::string to_string(CoercivityStrategy s);

} // namespace rbiga
