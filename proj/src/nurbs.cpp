#include "rbiga/nurbs.hpp"

#include "rbiga/errors.hpp"

#include <cmath>
#include <sstream>

namespace rbiga {

NurbsPatch::NurbsPatch(int dim, std::vector<KnotVector> knots, Eigen::MatrixXd projective)
    : dim_(dim), knots_(std::move(knots)), projective_(std::move(projective)) {
  if (dim_ < 1 || dim_ > 3)
    throw ConstructionError("nurbs patch: spatial dimension must be 1, 2 or 3");
  if (knots_.empty() || knots_.size() > 3)
    throw ConstructionError("nurbs patch: parametric dimension must be 1, 2 or 3");
  if (projective_.cols() != dim_ + 1)
    throw ConstructionError("nurbs patch: projective points must have dim+1 coordinates");
  int expected = 1;
  for (std::size_t d = 0; d < knots_.size(); ++d) {
    shape_[d] = knots_[d].size();
    expected *= shape_[d];
  }
  if (projective_.rows() != expected) {
    std::ostringstream os;
    os << "nurbs patch: lattice has " << projective_.rows() << " points, knot vectors require "
       << expected;
    throw ConstructionError(os.str());
  }
  for (Eigen::Index r = 0; r < projective_.rows(); ++r) {
    if (!(projective_(r, dim_) > 0.0)) {
      std::ostringstream os;
      os << "nurbs patch: weight of control point " << r << " is not strictly positive";
      throw ConstructionError(os.str());
    }
  }
}

NurbsPatch NurbsPatch::from_points(std::vector<KnotVector> knots, const Eigen::MatrixXd& points,
                                   const Eigen::VectorXd& weights) {
  if (points.rows() != weights.size())
    throw ConstructionError("nurbs patch: point and weight counts differ");
  const auto dim = points.cols();
  Eigen::MatrixXd proj(points.rows(), dim + 1);
  proj.leftCols(dim) = points.array().colwise() * weights.array();
  proj.col(dim) = weights;
  return NurbsPatch(static_cast<int>(dim), std::move(knots), std::move(proj));
}

std::array<int, 3> NurbsPatch::lattice_coords(int index) const {
  const int i = index % shape_[0];
  const int rest = index / shape_[0];
  return {i, rest % shape_[1], rest / shape_[1]};
}

Eigen::MatrixXd NurbsPatch::points() const {
  return weights_and_points_from_projective(*this).points;
}

PointsAndWeights weights_and_points_from_projective(const NurbsPatch& patch) {
  const Eigen::MatrixXd& proj = patch.projective();
  const int d = patch.dim();
  PointsAndWeights out;
  out.weights = proj.col(d);
  out.points = proj.leftCols(d).array().colwise() / out.weights.array();
  return out;
}

NurbsBasisValues combine_tensor_basis(const NurbsPatch& patch, std::span<const BasisSpan> spans,
                                      bool with_gradients) {
  const int pd = patch.param_dim();
  const int d = patch.dim();
  std::array<int, 3> count{1, 1, 1};
  std::array<int, 3> first{0, 0, 0};
  for (int k = 0; k < pd; ++k) {
    const int p = patch.knots(k).degree();
    count[k] = p + 1;
    first[k] = spans[k].first_index(p);
  }
  const int total = count[0] * count[1] * count[2];

  NurbsBasisValues out;
  out.indices.resize(static_cast<std::size_t>(total));
  out.values.resize(total);
  Eigen::MatrixXd dN;
  if (with_gradients)
    dN.resize(total, pd);

  double W = 0.0;
  Eigen::RowVectorXd dW = Eigen::RowVectorXd::Zero(pd);
  int r = 0;
  for (int c = 0; c < count[2]; ++c) {
    for (int b = 0; b < count[1]; ++b) {
      for (int a = 0; a < count[0]; ++a, ++r) {
        const std::array<int, 3> loc{a, b, c};
        double n = 1.0;
        for (int k = 0; k < pd; ++k)
          n *= spans[k].ders(0, loc[k]);
        const int idx = patch.lattice_index(first[0] + a, first[1] + b, first[2] + c);
        const double w = patch.projective()(idx, d);
        out.indices[static_cast<std::size_t>(r)] = idx;
        out.values[r] = n * w;
        W += n * w;
        if (with_gradients) {
          for (int k = 0; k < pd; ++k) {
            double g = 1.0;
            for (int l = 0; l < pd; ++l)
              g *= (l == k) ? spans[l].ders(1, loc[l]) : spans[l].ders(0, loc[l]);
            dN(r, k) = g * w;
          }
          dW += dN.row(r);
        }
      }
    }
  }
  if (with_gradients) {
    out.gradients.resize(total, pd);
    for (int i = 0; i < total; ++i)
      out.gradients.row(i) = (dN.row(i) * W - out.values[i] * dW) / (W * W);
  }
  out.values /= W;
  return out;
}

namespace {

std::vector<BasisSpan> univariate_spans(const NurbsPatch& patch, std::span<const double> x,
                                        int order) {
  if (static_cast<int>(x.size()) != patch.param_dim())
    throw DomainError("nurbs patch: parametric point has the wrong dimension");
  std::vector<BasisSpan> spans;
  spans.reserve(x.size());
  for (int k = 0; k < patch.param_dim(); ++k)
    spans.push_back(eval_basis_derivatives(patch.knots(k), x[static_cast<std::size_t>(k)], order));
  return spans;
}

} // namespace

NurbsBasisValues eval_nurbs_basis(const NurbsPatch& patch, std::span<const double> x,
                                  bool with_gradients) {
  const auto spans = univariate_spans(patch, x, with_gradients ? 1 : 0);
  return combine_tensor_basis(patch, spans, with_gradients);
}

Eigen::VectorXd eval_geometry(const NurbsPatch& patch, std::span<const double> x) {
  const NurbsBasisValues b = eval_nurbs_basis(patch, x, false);
  const PointsAndWeights pw = weights_and_points_from_projective(patch);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(patch.dim());
  for (std::size_t i = 0; i < b.indices.size(); ++i)
    out += b.values[static_cast<Eigen::Index>(i)] * pw.points.row(b.indices[i]).transpose();
  return out;
}

GeometryJacobian eval_geometry_jacobian(const NurbsPatch& patch, std::span<const double> x) {
  const NurbsBasisValues b = eval_nurbs_basis(patch, x, true);
  const PointsAndWeights pw = weights_and_points_from_projective(patch);
  GeometryJacobian jac;
  jac.matrix = Eigen::MatrixXd::Zero(patch.dim(), patch.param_dim());
  for (std::size_t i = 0; i < b.indices.size(); ++i)
    jac.matrix += pw.points.row(b.indices[i]).transpose() *
                  b.gradients.row(static_cast<Eigen::Index>(i));
  if (patch.dim() == patch.param_dim()) {
    jac.det = jac.matrix.determinant();
    if (std::abs(jac.det) < 1e-14) {
      std::ostringstream os;
      os << "geometry map is singular at (";
      for (std::size_t k = 0; k < x.size(); ++k)
        os << (k ? ", " : "") << x[k];
      os << "), det = " << jac.det;
      throw SingularMapError(os.str());
    }
  }
  return jac;
}

NurbsPatch refine_patch(const NurbsPatch& patch, const PatchRefinement& request) {
  const int dir = request.direction;
  if (dir < 0 || dir >= patch.param_dim())
    throw DomainError("refine_patch: invalid direction");
  if (request.raise_by == 0 && request.new_knots.empty())
    return patch;

  const auto shape = patch.shape();
  const int cols = patch.dim() + 1;
  // Iterate over all lattice lines running along `dir`.
  std::array<int, 3> other{};
  int o = 0;
  for (int k = 0; k < 3; ++k)
    if (k != dir)
      other[o++] = k;

  KnotVector new_kv;
  std::vector<Eigen::MatrixXd> lines;
  for (int b = 0; b < shape[other[1]]; ++b) {
    for (int a = 0; a < shape[other[0]]; ++a) {
      Eigen::MatrixXd line(shape[dir], cols);
      for (int t = 0; t < shape[dir]; ++t) {
        std::array<int, 3> ijk{};
        ijk[dir] = t;
        ijk[other[0]] = a;
        ijk[other[1]] = b;
        line.row(t) = patch.projective().row(patch.lattice_index(ijk[0], ijk[1], ijk[2]));
      }
      const int target = patch.knots(dir).degree() + request.raise_by;
      SplineCurve refined = k_refine({patch.knots(dir), line}, target, request.new_knots);
      new_kv = refined.knots;
      lines.push_back(std::move(refined.points));
    }
  }

  std::vector<KnotVector> knots = patch.knots();
  knots[static_cast<std::size_t>(dir)] = new_kv;
  std::array<int, 3> new_shape = shape;
  new_shape[dir] = new_kv.size();
  Eigen::MatrixXd proj(new_shape[0] * new_shape[1] * new_shape[2], cols);
  std::size_t line_id = 0;
  for (int b = 0; b < shape[other[1]]; ++b) {
    for (int a = 0; a < shape[other[0]]; ++a, ++line_id) {
      for (int t = 0; t < new_shape[dir]; ++t) {
        std::array<int, 3> ijk{};
        ijk[dir] = t;
        ijk[other[0]] = a;
        ijk[other[1]] = b;
        const int idx = ijk[0] + new_shape[0] * (ijk[1] + new_shape[1] * ijk[2]);
        proj.row(idx) = lines[line_id].row(t);
      }
    }
  }
  return NurbsPatch(patch.dim(), std::move(knots), std::move(proj));
}

NurbsPatch apply_affine(const NurbsPatch& patch, const Eigen::VectorXd& offset,
                        const Eigen::MatrixXd& linear) {
  const int d = patch.dim();
  Eigen::MatrixXd proj = patch.projective();
  const Eigen::VectorXd w = proj.col(d);
  // w (C + G B) = w C + G (w B)
  Eigen::MatrixXd wb = proj.leftCols(d);
  proj.leftCols(d) = wb * linear.transpose() + w * offset.transpose();
  return NurbsPatch(d, patch.knots(), std::move(proj));
}

} // namespace rbiga
