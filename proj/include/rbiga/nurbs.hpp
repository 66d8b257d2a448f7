#pragma once

#include "rbiga/splines.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace rbiga {

/// Tensor-product NURBS patch (curve, surface or solid) embedded in R^dim.
///
/// Control data are kept in projective form: row r of `projective()` is
/// (w B_r, w) in R^{dim+1}. Lattice rows are ordered with the first
/// parametric direction running fastest.
class NurbsPatch {
public:
  NurbsPatch() = default;
  NurbsPatch(int dim, std::vector<KnotVector> knots, Eigen::MatrixXd projective);

  /// Builds the projective lattice from Cartesian points and weights.
  static NurbsPatch from_points(std::vector<KnotVector> knots, const Eigen::MatrixXd& points,
                                const Eigen::VectorXd& weights);

  int dim() const { return dim_; }
  int param_dim() const { return static_cast<int>(knots_.size()); }
  const std::vector<KnotVector>& knots() const { return knots_; }
  const KnotVector& knots(int direction) const { return knots_[static_cast<std::size_t>(direction)]; }
  const Eigen::MatrixXd& projective() const { return projective_; }

  /// Basis function count per direction; unused directions report 1.
  std::array<int, 3> shape() const { return shape_; }
  int size() const { return static_cast<int>(projective_.rows()); }
  int lattice_index(int i, int j = 0, int k = 0) const {
    return i + shape_[0] * (j + shape_[1] * k);
  }
  std::array<int, 3> lattice_coords(int index) const;

  Eigen::VectorXd weights() const { return projective_.col(dim_); }
  Eigen::MatrixXd points() const;

  friend bool operator==(const NurbsPatch&, const NurbsPatch&) = default;

private:
  int dim_ = 0;
  std::vector<KnotVector> knots_;
  Eigen::MatrixXd projective_;
  std::array<int, 3> shape_{1, 1, 1};
};

struct PointsAndWeights {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
};

/// B_i = (B^w_i)_{1..d} / w_i with w_i the last projective coordinate.
PointsAndWeights weights_and_points_from_projective(const NurbsPatch& patch);

/// Nonzero rational basis functions at one parametric point.
struct NurbsBasisValues {
  std::vector<int> indices;     ///< lattice indices of the nonzero functions
  Eigen::VectorXd values;       ///< R_i
  Eigen::MatrixXd gradients;    ///< dR_i/dx_j, one row per function (empty if not requested)
};

NurbsBasisValues eval_nurbs_basis(const NurbsPatch& patch, std::span<const double> x,
                                  bool with_gradients = false);

/// Tensor combination of precomputed univariate spans (one per direction, with
/// at least first derivatives when gradients are requested).
NurbsBasisValues combine_tensor_basis(const NurbsPatch& patch, std::span<const BasisSpan> spans,
                                      bool with_gradients);

/// F(x) = sum_i R_i(x) B_i.
Eigen::VectorXd eval_geometry(const NurbsPatch& patch, std::span<const double> x);

struct GeometryJacobian {
  Eigen::MatrixXd matrix; ///< dF_i/dx_j, dim x param_dim
  double det = 0.0;       ///< determinant when param_dim == dim, else 0
};

/// Analytic Jacobian of the geometry map. Throws SingularMapError when
/// |det| < 1e-14 for a full-dimensional patch.
GeometryJacobian eval_geometry_jacobian(const NurbsPatch& patch, std::span<const double> x);

/// Refinement in one parametric direction: degree raise first, then insertion.
struct PatchRefinement {
  int direction = 0;
  int raise_by = 0;
  std::vector<double> new_knots;
};

/// Applies the refinement to the projective control lattice; the geometry is unchanged.
NurbsPatch refine_patch(const NurbsPatch& patch, const PatchRefinement& request);

/// Applies x -> C + G x to every control point; weights are untouched.
NurbsPatch apply_affine(const NurbsPatch& patch, const Eigen::VectorXd& offset,
                        const Eigen::MatrixXd& linear);

} // namespace rbiga
