#include "doctest.h"

#include "rbiga/errors.hpp"
#include "rbiga/geometry.hpp"

#include <random>

using namespace rbiga;

namespace {

NurbsPatch box2d(double x0, double x1, double y0, double y1, int degree = 1) {
  std::vector<KnotVector> kv;
  for (int d = 0; d < 2; ++d) {
    std::vector<double> v(static_cast<std::size_t>(degree + 1), 0.0);
    v.insert(v.end(), static_cast<std::size_t>(degree + 1), 1.0);
    kv.emplace_back(v, degree);
  }
  const int n = degree + 1;
  Eigen::MatrixXd pts(n * n, 2);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      pts(i + n * j, 0) = x0 + (x1 - x0) * i / degree;
      pts(i + n * j, 1) = y0 + (y1 - y0) * j / degree;
    }
  return NurbsPatch::from_points(kv, pts, Eigen::VectorXd::Ones(n * n));
}

PatchMap diag_map(const std::string& a, const std::string& b, const std::string& cx = "0",
                  const std::string& cy = "0") {
  PatchMap m = PatchMap::identity(2);
  m.linear[0] = ScalarExpression::parse(a);
  m.linear[3] = ScalarExpression::parse(b);
  m.offset[0] = ScalarExpression::parse(cx);
  m.offset[1] = ScalarExpression::parse(cy);
  return m;
}

} // namespace

TEST_CASE("parameter domain") {
  const ParameterDomain d({1, 1}, {5, 3}, {1, 2});
  CHECK(d.contains(std::vector<double>{2, 2}));
  CHECK_FALSE(d.contains(std::vector<double>{6, 2}));
  CHECK_THROWS_WITH_AS(d.check(std::vector<double>{2, 4}), doctest::Contains("mu2"), DomainError);
  CHECK(d.centroid() == std::vector<double>{3, 2});
  CHECK_THROWS_AS(ParameterDomain({1}, {0}, {0.5}), ConstructionError);
  CHECK_THROWS_AS(ParameterDomain({1}, {2}, {3}), ConstructionError);
}

TEST_CASE("face labels") {
  const FaceRef f = FaceRef::parse(2, "v1");
  CHECK(f.patch == 2);
  CHECK(f.direction == 1);
  CHECK(f.side == 1);
  CHECK(f.label() == "v1");
  CHECK_THROWS_AS(FaceRef::parse(0, "x0"), ConstructionError);
}

TEST_CASE("gluing") {
  const MultipatchDomain one = glue_patches({box2d(0, 1, 0, 1)});
  CHECK(one.dof_count == 4);
  CHECK(one.glue[0] == std::vector<int>{0, 1, 2, 3});

  const MultipatchDomain two = glue_patches({box2d(0, 1, 0, 1), box2d(1, 2, 0, 1)});
  CHECK(two.dof_count == 6);
  CHECK(two.glue[1][0] == two.glue[0][1]);
  CHECK(two.glue[1][2] == two.glue[0][3]);
  CHECK(two.owning_patch(two.glue[1][0]) == 0);
  CHECK(two.owning_patch(two.glue[1][1]) == 1);

  // idempotent
  const MultipatchDomain again = glue_patches(two.patches);
  CHECK(again.glue == two.glue);
  CHECK(again.dof_count == two.dof_count);

  // a vertex contact is a complete boundary entity
  const MultipatchDomain corner = glue_patches({box2d(0, 1, 0, 1), box2d(1, 2, 1, 2)});
  CHECK(corner.dof_count == 7);

  // hanging interface: half an edge
  CHECK_THROWS_WITH_AS(glue_patches({box2d(0, 1, 0, 2, 2), box2d(1, 2, 0, 1, 2)}),
                       doctest::Contains("patches 0 and 1"), StructuralError);

  // different weights on shared points
  NurbsPatch a = box2d(0, 1, 0, 1);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  w(0) = 2.0;
  const NurbsPatch b = NurbsPatch::from_points(box2d(1, 2, 0, 1).knots(), box2d(1, 2, 0, 1).points(), w);
  CHECK_THROWS_AS(glue_patches({a, b}), StructuralError);
}

TEST_CASE("tagged dofs") {
  MultipatchDomain d = glue_patches({box2d(0, 1, 0, 1, 2), box2d(1, 2, 0, 1, 2)});
  CHECK(d.dof_count == 15);
  d.boundary_tags["left"] = {FaceRef::parse(0, "u0")};
  d.boundary_tags["bottom"] = {FaceRef::parse(0, "v0"), FaceRef::parse(1, "v0")};
  CHECK(d.tagged_dofs("left").size() == 3);
  CHECK(d.tagged_dofs("bottom").size() == 5);
  CHECK_THROWS_AS(d.tagged_dofs("nope"), ConstructionError);
  CHECK(face_local_indices(d.patches[0], 0, 1) == std::vector<int>{2, 5, 8});
}

TEST_CASE("evaluate_map") {
  AffineParamMap m;
  PatchMap p = PatchMap::identity(3);
  p.linear[0] = ScalarExpression::parameter(0);
  m.patches.push_back(p);
  const MapValues v = evaluate_map(m, 0, std::vector<double>{1.5});
  CHECK(v.jacobian == 1.5);
  CHECK(std::abs(v.inverse(0, 0) - 2.0 / 3.0) < 1e-15);
  CHECK(v.inverse(1, 1) == 1.0);

  const AffineParamMap id = AffineParamMap::identity(1, 2);
  const MapValues iv = evaluate_map(id, 0, std::vector<double>{});
  CHECK(iv.offset.isZero());
  CHECK(iv.linear.isIdentity());
  CHECK(iv.jacobian == 1.0);

  AffineParamMap cyl;
  PatchMap c = PatchMap::identity(3);
  c.linear[4] = ScalarExpression::parameter(0);
  c.linear[8] = ScalarExpression::parameter(2);
  cyl.patches.push_back(c);
  CHECK(evaluate_map(cyl, 0, std::vector<double>{4, 2, 1}).jacobian == 4.0);

  AffineParamMap sing;
  PatchMap s = PatchMap::identity(2);
  s.linear[0] = ScalarExpression::parse("mu1 - 1");
  sing.patches.push_back(s);
  CHECK_THROWS_AS(evaluate_map(sing, 0, std::vector<double>{1.0}), SingularMapError);
}

TEST_CASE("property: G D = I and J = |det G| for random maps") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int inst = 0; inst < 100; ++inst) {
    const int d = 2 + inst % 2;
    PatchMap p = PatchMap::identity(d);
    for (auto& e : p.linear)
      e = ScalarExpression(u(rng)) * ScalarExpression::parameter(0) + ScalarExpression(u(rng));
    AffineParamMap m;
    m.patches.push_back(p);
    const std::vector<double> mu{u(rng)};
    MapValues v;
    try {
      v = evaluate_map(m, 0, mu);
    } catch (const SingularMapError&) {
      continue;
    }
    CHECK((v.linear * v.inverse - Eigen::MatrixXd::Identity(d, d)).norm() <
          1e-12 * std::max(1.0, v.linear.norm() * v.inverse.norm()));
    CHECK(std::abs(v.jacobian - std::abs(v.linear.determinant())) < 1e-12 * std::max(1.0, v.jacobian));
  }
}

TEST_CASE("transform_control_points and continuity") {
  MultipatchDomain d = glue_patches({box2d(0, 1, 0, 1, 2), box2d(1, 2, 0, 1, 2)});
  AffineParamMap good;
  good.patches = {diag_map("1", "mu1"), diag_map("mu2", "mu1", "1 - mu2")};
  const std::vector<std::vector<double>> samples{{1.5, 2.0}, {0.5, 3.0}, {2.0, 0.25}};
  CHECK(check_interface_continuity(d, good, samples).ok());
  const MultipatchDomain t = transform_control_points(d, good, samples[0]);
  const std::vector<double> x{1.0, 1.0};
  CHECK((eval_geometry(t.patches[1], x) - Eigen::Vector2d(3.0, 1.5)).norm() < 1e-14);
  CHECK(t.patches[1].weights() == d.patches[1].weights());

  AffineParamMap bad = good;
  bad.patches[1] = diag_map("mu2", "mu1 * 1.01", "1 - mu2");
  const ContinuityReport r = check_interface_continuity(d, bad, samples);
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations.front().patch_a == 0);
  CHECK(r.violations.front().patch_b == 1);

  const AffineParamMap id = AffineParamMap::identity(2, 2);
  const MultipatchDomain same = transform_control_points(d, id, std::vector<double>{});
  CHECK(same.patches == d.patches);

  const MultipatchDomain single = glue_patches({box2d(0, 1, 0, 1)});
  CHECK(check_interface_continuity(single, AffineParamMap::identity(1, 2), samples).ok());
}
