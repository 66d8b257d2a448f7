#pragma once

#include "rbiga/expression.hpp"
#include "rbiga/nurbs.hpp"

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace rbiga {

/// Box D = [a_1,b_1] x ... x [a_P,b_P] with a reference parameter mu_ref.
struct ParameterDomain {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> mu_ref;

  ParameterDomain() = default;
  ParameterDomain(std::vector<double> lower, std::vector<double> upper, std::vector<double> mu_ref);

  int size() const { return static_cast<int>(lower.size()); }
  bool contains(std::span<const double> mu) const;
  /// Throws DomainError naming the offending component.
  void check(std::span<const double> mu) const;
  std::vector<double> centroid() const;
};

/// One patch face: parametric direction and side (0 -> x_dir = 0, 1 -> x_dir = 1).
struct FaceRef {
  int patch = 0;
  int direction = 0;
  int side = 0;

  /// Parses labels u0/u1/v0/v1/w0/w1.
  static FaceRef parse(int patch, const std::string& label);
  std::string label() const;
  friend bool operator==(const FaceRef&, const FaceRef&) = default;
};

/// Lattice indices of the control points lying on a face of the patch.
std::vector<int> face_local_indices(const NurbsPatch& patch, int direction, int side);

/// Conforming multipatch domain: patches plus the C0 global numbering of their
/// control points.
struct MultipatchDomain {
  std::vector<NurbsPatch> patches;
  /// glue[k][i]: global index of local control point i of patch k.
  std::vector<std::vector<int>> glue;
  int dof_count = 0;
  std::map<std::string, std::vector<FaceRef>> boundary_tags;
  double tolerance = 1e-10;

  int dim() const { return patches.empty() ? 0 : patches.front().dim(); }
  /// Lowest patch index whose closure contains the global control point.
  int owning_patch(int global_index) const;
  /// Global indices on all faces carrying `tag` (sorted, unique).
  std::vector<int> tagged_dofs(const std::string& tag) const;
};

/// Numbers control points globally, merging points of different patches that
/// coincide within `tol`. Throws StructuralError on nonconforming interfaces.
MultipatchDomain glue_patches(std::vector<NurbsPatch> patches, double tol = 1e-10);

/// Per-patch affine maps T^k(x; mu) = C^k(mu) + G^k(mu) x.
struct PatchMap {
  std::vector<ScalarExpression> offset; ///< C^k, length d
  std::vector<ScalarExpression> linear; ///< G^k, row-major d x d

  static PatchMap identity(int dim);
  int dim() const { return static_cast<int>(offset.size()); }
  const ScalarExpression& g(int r, int c) const {
    return linear[static_cast<std::size_t>(r * dim() + c)];
  }
};

struct AffineParamMap {
  std::vector<PatchMap> patches;

  static AffineParamMap identity(int patch_count, int dim);
  int max_parameter_index() const;
};

/// Numeric map data at one parameter value.
struct MapValues {
  Eigen::VectorXd offset; ///< C
  Eigen::MatrixXd linear; ///< G
  double jacobian = 0.0;  ///< J = |det G|
  Eigen::MatrixXd inverse; ///< D = G^{-1}
};

MapValues evaluate_map(const AffineParamMap& map, int patch, std::span<const double> mu);

/// Deformed domain T(Omega; mu): control points mapped patch by patch, weights kept.
MultipatchDomain transform_control_points(const MultipatchDomain& domain, const AffineParamMap& map,
                                          std::span<const double> mu);

struct ContinuityViolation {
  int patch_a = 0;
  int patch_b = 0;
  int global_index = 0;
  int sample = 0;
  double deviation = 0.0;
};

struct ContinuityReport {
  std::vector<ContinuityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks T^k(B; mu) = T^l(B; mu) for every control point shared by patches k, l.
ContinuityReport check_interface_continuity(const MultipatchDomain& domain,
                                            const AffineParamMap& map,
                                            std::span<const std::vector<double>> mu_samples,
                                            double tol = 1e-10);

} // namespace rbiga
