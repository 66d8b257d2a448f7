#include "doctest.h"
#include "support.hpp"

#include "rbiga/errors.hpp"
#include "rbiga/nurbs.hpp"

#include <numbers>

using namespace rbiga;
using testing_support::oracle_basis;
using testing_support::random_knots;

namespace {

NurbsPatch quarter_circle() {
  Eigen::MatrixXd pts(3, 2);
  pts << 1, 0, 1, 1, 0, 1;
  Eigen::VectorXd w(3);
  w << 1, std::sqrt(2.0) / 2, 1;
  return NurbsPatch::from_points({KnotVector({0, 0, 0, 1, 1, 1}, 2)}, pts, w);
}

/// Random full-dimensional patch in R^dim with positive weights.
NurbsPatch random_patch(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<int> deg(1, 3);
  std::uniform_real_distribution<double> wd(0.5, 2.0);
  std::uniform_real_distribution<double> jitter(-0.08, 0.08);
  std::vector<KnotVector> knots;
  for (int i = 0; i < dim; ++i)
    knots.push_back(random_knots(rng, deg(rng), 2));
  std::array<int, 3> n{1, 1, 1};
  for (int i = 0; i < dim; ++i)
    n[static_cast<std::size_t>(i)] = knots[static_cast<std::size_t>(i)].size();
  const int total = n[0] * n[1] * n[2];
  Eigen::MatrixXd pts(total, dim);
  Eigen::VectorXd w(total);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const int r = i + n[0] * (j + n[1] * k);
        const int idx[3] = {i, j, k};
        for (int c = 0; c < dim; ++c) {
          // Greville abscissae keep the map close to the identity
          const KnotVector& kv = knots[static_cast<std::size_t>(c)];
          double g = 0.0;
          for (int t = 1; t <= kv.degree(); ++t)
            g += kv[static_cast<std::size_t>(idx[c] + t)];
          g = kv.degree() > 0 ? g / kv.degree() : 0.5;
          pts(r, c) = g + jitter(rng) / std::max(2, n[static_cast<std::size_t>(c)]);
        }
        w(r) = wd(rng);
      }
  return NurbsPatch::from_points(knots, pts, w);
}

/// Dense rational basis from the recursive B-spline oracle.
Eigen::VectorXd oracle_rational(const NurbsPatch& p, std::span<const double> x) {
  const int pd = p.param_dim();
  std::vector<Eigen::VectorXd> uni;
  for (int d = 0; d < pd; ++d)
    uni.push_back(oracle_basis(p.knots(d), x[static_cast<std::size_t>(d)]));
  Eigen::VectorXd r(p.size());
  const Eigen::VectorXd w = p.weights();
  for (int i = 0; i < p.size(); ++i) {
    const auto c = p.lattice_coords(i);
    double v = 1.0;
    for (int d = 0; d < pd; ++d)
      v *= uni[static_cast<std::size_t>(d)](c[static_cast<std::size_t>(d)]);
    r(i) = v * w(i);
  }
  return r / r.sum();
}

Eigen::VectorXd dense(const NurbsPatch& p, const NurbsBasisValues& b) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p.size());
  for (std::size_t a = 0; a < b.indices.size(); ++a)
    v(b.indices[a]) = b.values(static_cast<Eigen::Index>(a));
  return v;
}

std::vector<double> random_point(std::mt19937_64& rng, int pd) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(pd));
  for (auto& v : x)
    v = u(rng);
  return x;
}

} // namespace

TEST_CASE("projective round trip") {
  Eigen::MatrixXd proj(2, 3);
  proj << 2, 0, 2, 1, 1, 1;
  const NurbsPatch p(2, {KnotVector({0, 0, 1, 1}, 1)}, proj);
  const PointsAndWeights pw = weights_and_points_from_projective(p);
  CHECK(pw.points(0, 0) == 1.0);
  CHECK(pw.points(0, 1) == 0.0);
  CHECK(pw.weights(0) == 2.0);

  const NurbsPatch q = quarter_circle();
  const PointsAndWeights qw = weights_and_points_from_projective(q);
  CHECK((qw.weights - Eigen::Vector3d(1, std::sqrt(2.0) / 2, 1)).norm() < 1e-16);
  CHECK((qw.points.row(1) - Eigen::RowVector2d(1, 1)).norm() < 1e-15);

  Eigen::MatrixXd bad = proj;
  bad(1, 2) = 0.0;
  CHECK_THROWS_AS(NurbsPatch(2, {KnotVector({0, 0, 1, 1}, 1)}, bad), ConstructionError);
  CHECK_THROWS_AS(NurbsPatch(2, {KnotVector({0, 0, 0, 1, 1, 1}, 2)}, proj), ConstructionError);
}

TEST_CASE("quarter circle is exact") {
  const NurbsPatch q = quarter_circle();
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    const Eigen::VectorXd f = eval_geometry(q, std::span<const double>(&x, 1));
    CHECK(std::abs(f.norm() - 1.0) < 1e-12);
  }
  // rational values at 0.5 from the direct formula
  const double x = 0.5;
  const NurbsBasisValues b = eval_nurbs_basis(q, std::span<const double>(&x, 1));
  const double w = std::sqrt(2.0) / 2;
  const double den = 0.25 + 0.5 * w + 0.25;
  CHECK(std::abs(b.values(0) - 0.25 / den) < 1e-15);
  CHECK(std::abs(b.values(1) - 0.5 * w / den) < 1e-15);

  PatchRefinement r;
  r.new_knots = {0.5};
  const NurbsPatch qr = refine_patch(q, r);
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    CHECK(std::abs(eval_geometry(qr, std::span<const double>(&t, 1)).norm() - 1.0) < 1e-12);
  }
  CHECK(refine_patch(q, PatchRefinement{}) == q);
}

TEST_CASE("equal weights reduce to B-splines") {
  std::mt19937_64 rng(2);
  for (int inst = 0; inst < 20; ++inst) {
    NurbsPatch p = random_patch(rng, 2);
    const NurbsPatch eq = NurbsPatch::from_points(p.knots(), p.points(),
                                                  Eigen::VectorXd::Constant(p.size(), 3.0));
    const auto x = random_point(rng, 2);
    const Eigen::VectorXd v = dense(eq, eval_nurbs_basis(eq, x));
    const Eigen::VectorXd u0 = oracle_basis(eq.knots(0), x[0]);
    const Eigen::VectorXd u1 = oracle_basis(eq.knots(1), x[1]);
    for (int i = 0; i < eq.size(); ++i) {
      const auto c = eq.lattice_coords(i);
      CHECK(std::abs(v(i) - u0(c[0]) * u1(c[1])) < 1e-14);
    }
  }
}

TEST_CASE("property: rational basis against the direct formula") {
  std::mt19937_64 rng(17);
  for (int inst = 0; inst < 200; ++inst) {
    const int dim = 2 + inst % 2;
    const NurbsPatch p = random_patch(rng, dim);
    for (int s = 0; s < 3; ++s) {
      const auto x = random_point(rng, dim);
      const Eigen::VectorXd v = dense(p, eval_nurbs_basis(p, x));
      CHECK(std::abs(v.sum() - 1.0) < 1e-12);
      CHECK(v.minCoeff() >= -1e-14);
      CHECK((v - oracle_rational(p, x)).cwiseAbs().maxCoeff() < 1e-12);
      // tensor support: nonzero only where every univariate factor is
      for (int i = 0; i < p.size(); ++i) {
        const auto c = p.lattice_coords(i);
        bool inside = true;
        for (int d = 0; d < dim; ++d) {
          const KnotVector& kv = p.knots(d);
          const double xd = x[static_cast<std::size_t>(d)];
          inside = inside && xd >= kv[static_cast<std::size_t>(c[static_cast<std::size_t>(d)])] &&
                   xd <= kv[static_cast<std::size_t>(c[static_cast<std::size_t>(d)] + kv.degree() + 1)];
        }
        if (!inside)
          CHECK(v(i) == 0.0);
      }
    }
  }
}

TEST_CASE("interpolation at knots of multiplicity equal to the degree") {
  std::mt19937_64 rng(4);
  const KnotVector fig1({0, 0, 0, 0, .25, .25, .25, .5, .75, .75, 1, 1, 1, 1}, 3);
  for (int inst = 0; inst < 200; ++inst) {
    Eigen::VectorXd w(fig1.size());
    std::uniform_real_distribution<double> wd(0.3, 3.0);
    for (int i = 0; i < w.size(); ++i)
      w(i) = wd(rng);
    const Eigen::MatrixXd pts = testing_support::random_points(rng, fig1.size(), 2);
    const NurbsPatch c = NurbsPatch::from_points({fig1}, pts, w);
    const double x = 0.25;
    const Eigen::VectorXd f = eval_geometry(c, std::span<const double>(&x, 1));
    // the knot 0.25 with multiplicity 3 = p interpolates control point 3
    CHECK((f - pts.row(3).transpose()).norm() < 1e-12);
    for (double e : {0.0, 1.0}) {
      const Eigen::VectorXd g = eval_geometry(c, std::span<const double>(&e, 1));
      CHECK((g - pts.row(e == 0.0 ? 0 : fig1.size() - 1).transpose()).norm() < 1e-12);
    }
  }
}

TEST_CASE("jacobian") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 0, 0, 1, 1, 1;
  const std::vector<KnotVector> kv{KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)};
  const NurbsPatch id = NurbsPatch::from_points(kv, pts, Eigen::VectorXd::Ones(4));
  const std::vector<double> x{0.3, 0.8};
  CHECK((eval_geometry(id, x) - Eigen::Vector2d(0.3, 0.8)).norm() < 1e-15);
  CHECK((eval_geometry_jacobian(id, x).matrix - Eigen::Matrix2d::Identity()).norm() < 1e-14);
  const NurbsPatch twice = NurbsPatch::from_points(kv, 2 * pts, Eigen::VectorXd::Ones(4));
  const GeometryJacobian j2 = eval_geometry_jacobian(twice, x);
  CHECK((j2.matrix - 2 * Eigen::Matrix2d::Identity()).norm() < 1e-14);
  CHECK(std::abs(j2.det - 4.0) < 1e-14);

  Eigen::MatrixXd flat = pts;
  flat.col(1).setZero();
  const NurbsPatch degenerate = NurbsPatch::from_points(kv, flat, Eigen::VectorXd::Ones(4));
  CHECK_THROWS_AS(eval_geometry_jacobian(degenerate, x), SingularMapError);

  std::mt19937_64 rng(8);
  for (int inst = 0; inst < 100; ++inst) {
    const int dim = 2 + inst % 2;
    const NurbsPatch p = random_patch(rng, dim);
    std::vector<double> y = random_point(rng, dim);
    for (auto& v : y)
      v = 0.05 + 0.9 * v;
    const GeometryJacobian j = eval_geometry_jacobian(p, y);
    const double h = 1e-6;
    for (int c = 0; c < dim; ++c) {
      std::vector<double> a = y, b = y;
      a[static_cast<std::size_t>(c)] += h;
      b[static_cast<std::size_t>(c)] -= h;
      // keep both stencil points in one span
      const KnotVector& kv = p.knots(c);
      if (find_span(kv, a[static_cast<std::size_t>(c)]) != find_span(kv, b[static_cast<std::size_t>(c)]))
        continue;
      const Eigen::VectorXd fd = (eval_geometry(p, a) - eval_geometry(p, b)) / (2 * h);
      CHECK((fd - j.matrix.col(c)).norm() < 1e-6 * std::max(1.0, j.matrix.col(c).norm()));
    }
    CHECK(std::abs(j.det - j.matrix.determinant()) < 1e-12 * std::max(1.0, std::abs(j.det)));
  }
}

TEST_CASE("property: affine covariance") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int inst = 0; inst < 200; ++inst) {
    const int dim = 2 + inst % 2;
    const NurbsPatch p = random_patch(rng, dim);
    Eigen::VectorXd c(dim);
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i) {
      c(i) = u(rng);
      for (int j = 0; j < dim; ++j)
        g(i, j) = u(rng);
    }
    const NurbsPatch t = apply_affine(p, c, g);
    CHECK(t.weights() == p.weights());
    for (int s = 0; s < 5; ++s) {
      const auto x = random_point(rng, dim);
      const Eigen::VectorXd expect = c + g * eval_geometry(p, x);
      CHECK((eval_geometry(t, x) - expect).cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, expect.norm()));
    }
  }
}

TEST_CASE("property: patch refinement keeps the geometry") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ux(0.01, 0.99);
  std::uniform_int_distribution<int> raise(0, 1);
  for (int inst = 0; inst < 200; ++inst) {
    const int dim = 2 + inst % 2;
    const NurbsPatch p = random_patch(rng, dim);
    NurbsPatch r = p;
    for (int d = 0; d < dim; ++d) {
      PatchRefinement req;
      req.direction = d;
      req.raise_by = raise(rng);
      const double k = std::round(ux(rng) * 1024.0) / 1024.0;
      if (r.knots(d).multiplicity(k) == 0)
        req.new_knots = {k};
      r = refine_patch(r, req);
    }
    for (int s = 0; s < 5; ++s) {
      const auto x = random_point(rng, dim);
      CHECK((eval_geometry(p, x) - eval_geometry(r, x)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("dyadic refinement count") {
  const NurbsPatch q = quarter_circle();
  NurbsPatch r = q;
  for (int level = 0; level < 3; ++level) {
    PatchRefinement req;
    req.new_knots = subdivision_knots(r.knots(0), 2);
    r = refine_patch(r, req);
  }
  CHECK(r.size() == q.size() + 7);
  for (int i = 0; i <= 50; ++i) {
    const double t = i / 50.0;
    CHECK(std::abs(eval_geometry(r, std::span<const double>(&t, 1)).norm() - 1.0) < 1e-12);
  }
}
