#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rbiga {

/// Open, normalized knot vector {xi_0 .. xi_{n+p}} of a degree-p B-spline basis.
///
/// The first and last knots are 0 and 1 with multiplicity p+1. Knot values are
/// compared bitwise when counting multiplicities, so repeated knots must be
/// given literally.
class KnotVector {
public:
  KnotVector() = default;
  KnotVector(std::vector<double> values, int degree);

  /// Uniform open knot vector with `spans` equal intervals.
  static KnotVector uniform(int degree, int spans);

  int degree() const { return degree_; }
  /// Number of basis functions n.
  int size() const { return static_cast<int>(values_.size()) - degree_ - 1; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Number of stored knots equal to `value`.
  int multiplicity(double value) const;
  /// Distinct knot values in increasing order, end points included.
  std::vector<double> breakpoints() const;
  /// Number of nonzero knot spans (elements).
  int span_count() const { return static_cast<int>(breakpoints().size()) - 1; }

  friend bool operator==(const KnotVector&, const KnotVector&) = default;

private:
  std::vector<double> values_;
  int degree_ = 0;
};

/// The p+1 basis functions that may be nonzero at a point, with derivatives.
struct BasisSpan {
  /// 0-based span index i with xi_i <= x < xi_{i+1} (xi_i < xi_{i+1}).
  int span = 0;
  /// ders(k, j) is the k-th derivative of N_{span-p+j}. Row 0 holds the values.
  Eigen::MatrixXd ders;

  int first_index(int degree) const { return span - degree; }
  Eigen::VectorXd values() const { return ders.row(0).transpose(); }
};

/// 0-based index of the knot span containing x; x = 1 maps to the last nonzero span.
int find_span(const KnotVector& kv, double x);

/// Cox-de Boor evaluation of the nonzero basis functions at x.
BasisSpan eval_basis(const KnotVector& kv, double x);

/// Basis values and derivatives up to `order`; rows beyond the degree are zero.
BasisSpan eval_basis_derivatives(const KnotVector& kv, double x, int order);

/// Control points (one per row) together with the knot vector they refer to.
struct SplineCurve {
  KnotVector knots;
  Eigen::MatrixXd points;
};

/// Point of the B-spline curve sum_i N_i(x) P_i.
Eigen::VectorXd eval_curve(const SplineCurve& curve, double x);

/// Blending factors alpha_1..alpha_{n+1} (returned 0-based) of a single knot insertion.
std::vector<double> insertion_factors(const KnotVector& kv, double xi_bar);

/// Inserts xi_bar once. Throws RefinementError when the multiplicity would exceed p.
SplineCurve insert_knot(const SplineCurve& curve, double xi_bar);

/// Inserts every value of `new_knots` in order.
SplineCurve insert_knots(const SplineCurve& curve, std::span<const double> new_knots);

/// Raises the degree by `raise_by` keeping the geometry and the continuity at every knot.
SplineCurve elevate_order(const SplineCurve& curve, int raise_by);

/// Elevates to `target_degree`, then inserts `new_knots`.
SplineCurve k_refine(const SplineCurve& curve, int target_degree,
                     std::span<const double> new_knots);

/// Knots splitting every nonzero span of `kv` into `parts` equal pieces.
std::vector<double> subdivision_knots(const KnotVector& kv, int parts);

} // namespace rbiga
