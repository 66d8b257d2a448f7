#include "rbiga/splines.hpp"

#include "rbiga/errors.hpp"

#include <algorithm>
#include <sstream>

namespace rbiga {

KnotVector::KnotVector(std::vector<double> values, int degree)
    : values_(std::move(values)), degree_(degree) {
  if (degree_ < 0)
    throw ConstructionError("knot vector: negative degree");
  const auto p = static_cast<std::size_t>(degree_);
  if (values_.size() < 2 * (p + 1))
    throw ConstructionError("knot vector: needs at least 2(p+1) knots");
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] < values_[i - 1]) {
      std::ostringstream os;
      os << "knot vector: knots must be non-decreasing (position " << i << ")";
      throw ConstructionError(os.str());
    }
  }
  if (values_.front() != 0.0 || values_.back() != 1.0)
    throw ConstructionError("knot vector: must start at 0 and end at 1");
  for (std::size_t i = 0; i <= p; ++i) {
    if (values_[i] != 0.0 || values_[values_.size() - 1 - i] != 1.0)
      throw ConstructionError("knot vector: end knots must be repeated p+1 times (open)");
  }
  if (values_[p + 1] == 0.0 || values_[values_.size() - p - 2] == 1.0)
    throw ConstructionError("knot vector: end knot multiplicity exceeds p+1");
}

KnotVector KnotVector::uniform(int degree, int spans) {
  std::vector<double> v(static_cast<std::size_t>(degree + 1), 0.0);
  for (int i = 1; i < spans; ++i)
    v.push_back(static_cast<double>(i) / spans);
  v.insert(v.end(), static_cast<std::size_t>(degree + 1), 1.0);
  return KnotVector(std::move(v), degree);
}

int KnotVector::multiplicity(double value) const {
  return static_cast<int>(std::count(values_.begin(), values_.end(), value));
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> b;
  for (double v : values_)
    if (b.empty() || b.back() != v)
      b.push_back(v);
  return b;
}

int find_span(const KnotVector& kv, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << "find_span: x = " << x << " outside [0, 1]";
    throw DomainError(os.str());
  }
  const int n = kv.size();
  const auto t = kv.values();
  if (x >= t[static_cast<std::size_t>(n)])
    return n - 1;
  // Last index i in [p, n-1] with t_i <= x.
  const auto first = t.begin() + kv.degree();
  const auto last = t.begin() + n;
  const auto it = std::upper_bound(first, last, x);
  return static_cast<int>(it - t.begin()) - 1;
}

BasisSpan eval_basis(const KnotVector& kv, double x) {
  return eval_basis_derivatives(kv, x, 0);
}

BasisSpan eval_basis_derivatives(const KnotVector& kv, double x, int order) {
  const int p = kv.degree();
  const int span = find_span(kv, x);
  const auto t = kv.values();
  auto knot = [&](int i) { return t[static_cast<std::size_t>(i)]; };

  // ndu(j, r): basis values of degree j in the upper triangle, knot differences below.
  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knot(span + 1 - j);
    right[j] = knot(span + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(j, r) == 0.0 ? 0.0 : ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  BasisSpan out;
  out.span = span;
  out.ders = Eigen::MatrixXd::Zero(std::max(order, 0) + 1, p + 1);
  for (int j = 0; j <= p; ++j)
    out.ders(0, j) = ndu(j, p);

  const int top = std::min(order, p);
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a.setZero();
    a(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = ndu(pk + 1, rk) == 0.0 ? 0.0 : a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        const double den = ndu(pk + 1, rk + j);
        a(s2, j) = den == 0.0 ? 0.0 : (a(s1, j) - a(s1, j - 1)) / den;
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        const double den = ndu(pk + 1, r);
        a(s2, k) = den == 0.0 ? 0.0 : -a(s1, k - 1) / den;
        d += a(s2, k) * ndu(r, pk);
      }
      out.ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= top; ++k) {
    out.ders.row(k) *= factor;
    factor *= (p - k);
  }
  return out;
}

Eigen::VectorXd eval_curve(const SplineCurve& curve, double x) {
  const int p = curve.knots.degree();
  const BasisSpan b = eval_basis(curve.knots, x);
  Eigen::VectorXd pt = Eigen::VectorXd::Zero(curve.points.cols());
  for (int j = 0; j <= p; ++j)
    pt += b.ders(0, j) * curve.points.row(b.first_index(p) + j).transpose();
  return pt;
}

std::vector<double> insertion_factors(const KnotVector& kv, double xi_bar) {
  if (!(xi_bar > 0.0 && xi_bar < 1.0)) {
    std::ostringstream os;
    os << "insert_knot: value " << xi_bar << " must lie strictly inside (0, 1)";
    throw DomainError(os.str());
  }
  const int p = kv.degree();
  const int n = kv.size();
  // 1-based span index k with xi_k <= xi_bar < xi_{k+1}.
  const int k = find_span(kv, xi_bar) + 1;
  auto xi = [&](int i) { return kv[static_cast<std::size_t>(i - 1)]; };
  std::vector<double> alpha(static_cast<std::size_t>(n + 1));
  for (int i = 1; i <= n + 1; ++i) {
    double a;
    if (i <= k - p)
      a = 1.0;
    else if (i <= k)
      a = (xi_bar - xi(i)) / (xi(i + p) - xi(i));
    else
      a = 0.0;
    alpha[static_cast<std::size_t>(i - 1)] = a;
  }
  return alpha;
}

SplineCurve insert_knot(const SplineCurve& curve, double xi_bar) {
  const KnotVector& kv = curve.knots;
  const int p = kv.degree();
  const int n = kv.size();
  if (curve.points.rows() != n)
    throw ConstructionError("insert_knot: control point count does not match the knot vector");
  if (kv.multiplicity(xi_bar) + 1 > p) {
    std::ostringstream os;
    os << "insert_knot: multiplicity of " << xi_bar << " would exceed the degree " << p
       << " (basis would become discontinuous)";
    throw RefinementError(os.str());
  }
  const std::vector<double> alpha = insertion_factors(kv, xi_bar);

  Eigen::MatrixXd pts(n + 1, curve.points.cols());
  for (int i = 0; i <= n; ++i) {
    const double a = alpha[static_cast<std::size_t>(i)];
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(curve.points.cols());
    if (a != 0.0)
      row += a * curve.points.row(i);
    if (a != 1.0)
      row += (1.0 - a) * curve.points.row(i - 1);
    pts.row(i) = row;
  }

  std::vector<double> knots(kv.values().begin(), kv.values().end());
  const auto pos = std::upper_bound(knots.begin(), knots.end(), xi_bar);
  knots.insert(pos, xi_bar);
  return {KnotVector(std::move(knots), p), std::move(pts)};
}

SplineCurve insert_knots(const SplineCurve& curve, std::span<const double> new_knots) {
  SplineCurve out = curve;
  for (double v : new_knots)
    out = insert_knot(out, v);
  return out;
}

namespace {

// Raises every interior knot to multiplicity p, giving the C0 Bezier form.
SplineCurve to_bezier_form(const SplineCurve& curve) {
  const int p = curve.knots.degree();
  SplineCurve out = curve;
  const auto bps = curve.knots.breakpoints();
  for (std::size_t b = 1; b + 1 < bps.size(); ++b)
    for (int m = curve.knots.multiplicity(bps[b]); m < p; ++m)
      out = insert_knot(out, bps[b]);
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || k > n)
    return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

} // namespace

SplineCurve elevate_order(const SplineCurve& curve, int raise_by) {
  if (raise_by < 1)
    throw DomainError("elevate_order: raise_by must be >= 1");
  const KnotVector& kv = curve.knots;
  const int p = kv.degree();
  const int q = p + raise_by;
  const auto bps = kv.breakpoints();
  const int spans = static_cast<int>(bps.size()) - 1;
  const auto dim = curve.points.cols();

  // Bezier extraction of the input, then per-span degree elevation.
  const SplineCurve bez = to_bezier_form(curve);
  Eigen::MatrixXd elevated(spans * q + 1, dim);
  for (int e = 0; e < spans; ++e) {
    const auto seg = bez.points.middleRows(e * p, p + 1);
    for (int i = 0; i <= q; ++i) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
      for (int j = std::max(0, i - raise_by); j <= std::min(p, i); ++j)
        row += binomial(p, j) * binomial(raise_by, i - j) / binomial(q, i) * seg.row(j);
      elevated.row(e * q + i) = row;
    }
  }

  // Target space: every interior knot gains raise_by extra repetitions.
  std::vector<double> knots(static_cast<std::size_t>(q + 1), 0.0);
  for (std::size_t b = 1; b + 1 < bps.size(); ++b)
    knots.insert(knots.end(), static_cast<std::size_t>(kv.multiplicity(bps[b]) + raise_by), bps[b]);
  knots.insert(knots.end(), static_cast<std::size_t>(q + 1), 1.0);
  KnotVector target(std::move(knots), q);

  // Extraction operator of the target space applied to the identity; the
  // elevated Bezier points are consistent with it, so least squares is exact.
  const int n_new = target.size();
  const SplineCurve extraction =
      to_bezier_form({target, Eigen::MatrixXd::Identity(n_new, n_new)});
  const Eigen::MatrixXd pts = extraction.points.householderQr().solve(elevated);
  return {std::move(target), pts};
}

SplineCurve k_refine(const SplineCurve& curve, int target_degree,
                     std::span<const double> new_knots) {
  const int p = curve.knots.degree();
  if (target_degree < p)
    throw DomainError("k_refine: target degree below current degree");
  SplineCurve out = target_degree > p ? elevate_order(curve, target_degree - p) : curve;
  return insert_knots(out, new_knots);
}

std::vector<double> subdivision_knots(const KnotVector& kv, int parts) {
  std::vector<double> out;
  if (parts <= 1)
    return out;
  const auto bps = kv.breakpoints();
  for (std::size_t b = 0; b + 1 < bps.size(); ++b)
    for (int i = 1; i < parts; ++i)
      out.push_back(bps[b] + (bps[b + 1] - bps[b]) * i / parts);
  return out;
}

} // namespace rbiga
