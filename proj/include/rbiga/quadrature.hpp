#pragma once

#include "rbiga/nurbs.hpp"

#include <array>
#include <vector>

namespace rbiga {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Tensor rule on one element (nonzero knot span box) of a patch.
struct ElementQuadrature {
  std::array<double, 3> lower{0, 0, 0};
  std::array<double, 3> upper{1, 1, 1};
  std::vector<std::array<double, 3>> points; ///< parametric coordinates
  std::vector<double> weights;               ///< scaled by the element measure
};

/// p_dir + 1 + extra points per direction on every element, elements in
/// lexicographic order (first direction fastest).
std::vector<ElementQuadrature> build_quadrature(const NurbsPatch& patch, int extra_points = 0);

} // namespace rbiga
