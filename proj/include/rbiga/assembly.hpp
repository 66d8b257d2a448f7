#pragma once

#include "rbiga/geometry.hpp"
#include "rbiga/problem.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rbiga {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Pulled-back data of one patch: A^k = J G A_o G^T with G = diag(D, 1), and
/// the volume source factor f^k = J f_o^k.
struct ParametricCoefficient {
  std::vector<ScalarExpression> matrix; ///< (d+1)^2, row-major
  ScalarExpression source;
  ScalarExpression jacobian;
  std::vector<ScalarExpression> inverse; ///< D = G^{-1}, d x d row-major
};

ParametricCoefficient build_parametric_coefficient(const AffineParamMap& map,
                                                   const ProblemDefinition& problem, int patch);

struct AffineTerm {
  ScalarExpression theta;
  SparseMatrix matrix;
  std::string label;
  /// Sum of diagonal-entry Gram matrices, hence positive semi-definite.
  bool structurally_psd = true;
};

struct RhsTerm {
  ScalarExpression theta;
  Eigen::VectorXd vector;
  std::string label;
};

/// a(u, v; mu) = sum_q Theta^q(mu) a^q(u, v) and f(v; mu) = sum_q Theta_f^q(mu) f^q(v).
struct AffineFormDecomposition {
  std::vector<AffineTerm> terms;
  std::vector<RhsTerm> rhs_terms;

  int q() const { return static_cast<int>(terms.size()); }
  int q_f() const { return static_cast<int>(rhs_terms.size()); }
  int size() const { return terms.empty() ? 0 : static_cast<int>(terms.front().matrix.rows()); }

  Eigen::VectorXd thetas(std::span<const double> mu) const;
  Eigen::VectorXd rhs_thetas(std::span<const double> mu) const;
  SparseMatrix matrix(std::span<const double> mu) const;
  Eigen::VectorXd rhs(std::span<const double> mu) const;
};

/// Assembles every parameter-independent block on the reference domain.
/// Blocks whose coefficient functions agree at 16 pseudo-random parameters
/// (1e-12 relative) are summed into one term.
AffineFormDecomposition assemble_affine_decomposition(const MultipatchDomain& domain,
                                                      const AffineParamMap& map,
                                                      const ProblemDefinition& problem,
                                                      const ParameterDomain& params);

/// Independent route: deform the control points with T(.; mu) and assemble
/// the original form numerically on the deformed geometry.
SparseMatrix assemble_direct_matrix(const MultipatchDomain& domain, const AffineParamMap& map,
                                    const ProblemDefinition& problem, std::span<const double> mu);
Eigen::VectorXd assemble_direct_rhs(const MultipatchDomain& domain, const AffineParamMap& map,
                                    const ProblemDefinition& problem, std::span<const double> mu);

/// Control-variable space with homogeneous Dirichlet constraints.
struct TruthSpace {
  int dof_count = 0;
  std::vector<char> dirichlet_mask;
  std::vector<int> free_dofs;  ///< free index -> global index
  std::vector<int> free_index; ///< global index -> free index or -1

  static TruthSpace build(const MultipatchDomain& domain, const ProblemDefinition& problem);
  int free_count() const { return static_cast<int>(free_dofs.size()); }
  Eigen::VectorXd expand(const Eigen::VectorXd& free) const;
  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
};

/// Removes constrained rows and columns. Throws UnsupportedError for nonzero Dirichlet data.
AffineFormDecomposition apply_dirichlet(const TruthSpace& space,
                                        const AffineFormDecomposition& decomposition,
                                        const ProblemDefinition& problem);

/// Sparse symmetric positive definite solver: Cholesky, CG fallback.
class SpdSolver {
public:
  SpdSolver() = default;
  explicit SpdSolver(const SparseMatrix& a) { compute(a); }
  void compute(const SparseMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  bool factorized() const { return factorized_; }

private:
  SparseMatrix a_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
  bool factorized_ = false;
};

/// Solves sum Theta^q(mu) A^q u = sum Theta_f^q(mu) f^q on the free DOFs.
Eigen::VectorXd truth_solve(const AffineFormDecomposition& constrained, std::span<const double> mu);

/// Compliant output s = f(mu)^T u.
double evaluate_output(const AffineFormDecomposition& constrained, std::span<const double> mu,
                       const Eigen::VectorXd& u);

/// X-inner product matrix sum Theta^q(mu_ref) A^q. Throws SolverError when not SPD.
SparseMatrix build_x_gram(const AffineFormDecomposition& constrained,
                          std::span<const double> mu_ref);

/// u(x) = sum_i u_i R_i(x) on one patch; `u` holds all global control variables.
double evaluate_field(const MultipatchDomain& domain, const Eigen::VectorXd& u, int patch,
                      std::span<const double> x);

/// Everything the offline stage needs about one parametrized truth problem.
struct TruthProblem {
  MultipatchDomain domain;
  AffineParamMap map;
  ProblemDefinition problem;
  ParameterDomain parameters;
  AffineFormDecomposition full;
  TruthSpace space;
  AffineFormDecomposition constrained;
  SparseMatrix x_gram;
  std::shared_ptr<SpdSolver> x_solver;

  static TruthProblem build(MultipatchDomain domain, AffineParamMap map, ProblemDefinition problem,
                            ParameterDomain parameters);
  int free_count() const { return space.free_count(); }
  /// Energy norm sqrt(v^T A(mu) v) of a free-DOF vector.
  double energy_norm(const Eigen::VectorXd& v, std::span<const double> mu) const;
};

} // namespace rbiga
