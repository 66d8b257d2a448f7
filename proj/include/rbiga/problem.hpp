#pragma once

#include "rbiga/expression.hpp"
#include "rbiga/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rbiga {

/// Indicator of a ball in reference coordinates.
struct BallRegion {
  Eigen::VectorXd center;
  double radius = 0.0;
  bool contains(const Eigen::VectorXd& x) const { return (x - center).norm() <= radius; }
};

/// Material data of one patch on the original (deformed) domain.
struct PatchProblem {
  /// (d+1) x (d+1) symmetric coefficient A_o^k, row-major: diffusion block
  /// followed by the reaction entry.
  std::vector<ScalarExpression> coefficient;
  /// Volume source f_o^k.
  ScalarExpression source;
  std::optional<BallRegion> source_region;

  const ScalarExpression& a(int r, int c, int dim) const {
    return coefficient[static_cast<std::size_t>(r * (dim + 1) + c)];
  }
  /// Laplace operator scaled by `conductivity`, zero source.
  static PatchProblem diffusion(int dim, const ScalarExpression& conductivity);
};

struct BoundaryCondition {
  enum class Kind { Dirichlet, Neumann };
  Kind kind = Kind::Neumann;
  double value = 0.0;
};

/// Second-order elliptic problem on a multipatch domain:
///   -div(A grad u) + c u = f,  u = g on Gamma_D,  A du/dn = h on Gamma_N.
struct ProblemDefinition {
  std::vector<PatchProblem> patches;
  /// Boundary tag -> condition. Untagged boundary is homogeneous Neumann.
  std::map<std::string, BoundaryCondition> boundary;
  /// Optional extra factor on the volume source, evaluated at reference
  /// physical coordinates (used for manufactured solutions).
  std::function<double(const Eigen::VectorXd&)> spatial_source;

  /// Structural checks plus symmetry and positive semi-definiteness of A_o at `samples`.
  void validate(const MultipatchDomain& domain, const ParameterDomain& params,
                std::span<const std::vector<double>> samples) const;
};

} // namespace rbiga
