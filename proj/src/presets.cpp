#include "rbiga/presets.hpp"

#include "rbiga/errors.hpp"

#include <cmath>

namespace rbiga {

namespace {

using E = ScalarExpression;

const double half_sqrt2 = std::sqrt(0.5);

/// Exact (cos, sin) of quarter turns.
Eigen::Vector2d quarter(int q) {
  switch (((q % 4) + 4) % 4) {
  case 0:
    return {1.0, 0.0};
  case 1:
    return {0.0, 1.0};
  case 2:
    return {-1.0, 0.0};
  default:
    return {0.0, -1.0};
  }
}

KnotVector linear_knots() { return KnotVector({0, 0, 1, 1}, 1); }
KnotVector quadratic_knots() { return KnotVector({0, 0, 0, 1, 1, 1}, 2); }

/// Trilinear box o + s a_u + t a_v + r a_w.
NurbsPatch box(const Eigen::Vector3d& o, const Eigen::Vector3d& au, const Eigen::Vector3d& av,
               const Eigen::Vector3d& aw) {
  Eigen::MatrixXd pts(8, 3);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        pts.row(i + 2 * j + 4 * k) = (o + i * au + j * av + k * aw).transpose();
  return NurbsPatch::from_points({linear_knots(), linear_knots(), linear_knots()}, pts,
                                 Eigen::VectorXd::Ones(8));
}

/// Quarter bend around `center` from quarter turn q0 to q1 = q0 +- 1; radius
/// rho0 at v = 0, rho1 at v = 1; extruded over z in [0, height].
NurbsPatch bend(const Eigen::Vector2d& center, int q0, int q1, double rho0, double rho1, double height) {
  Eigen::MatrixXd pts(12, 3);
  Eigen::VectorXd w(12);
  const Eigen::Vector2d a = quarter(q0), b = quarter(q1);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) {
      const double rho = j == 0 ? rho0 : rho1;
      const Eigen::Vector2d ctrl[3] = {center + rho * a, center + rho * (a + b), center + rho * b};
      for (int i = 0; i < 3; ++i) {
        const int r = i + 3 * j + 6 * k;
        pts.row(r) << ctrl[i].x(), ctrl[i].y(), k * height;
        w(r) = i == 1 ? half_sqrt2 : 1.0;
      }
    }
  return NurbsPatch::from_points({quadratic_knots(), linear_knots(), linear_knots()}, pts, w);
}

PatchMap diagonal_map(const std::vector<E>& diag) {
  PatchMap m = PatchMap::identity(static_cast<int>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i)
    m.linear[i * diag.size() + i] = diag[i];
  return m;
}

} // namespace

CaseConfig pipeline_preset() {
  CaseConfig c;
  c.name = "pipeline";
  GeometryConfig& g = c.geometry;
  g.patches = {
      box({0, -0.5, 0}, {4, 0, 0}, {0, 1, 0}, {0, 0, 1}),
      bend({4, 1}, -1, 0, 1.5, 0.5, 1.0),
      box({5.5, 1, 0}, {0, 4, 0}, {-1, 0, 0}, {0, 0, 1}),
      bend({6, 5}, 2, 1, 0.5, 1.5, 1.0),
      box({6, 5.5, 0}, {4, 0, 0}, {0, 1, 0}, {0, 0, 1}),
  };
  for (int k = 0; k < 5; ++k)
    g.mesh.push_back({{2, 2, 2}, {k % 2 == 0 ? 12 : 8, 6, 3}});
  g.boundary_tags["inlet"] = {FaceRef::parse(0, "u0")};
  g.boundary_tags["outlet"] = {FaceRef::parse(4, "u1")};
  g.boundary_tags["curve"] = {FaceRef::parse(1, "v0"), FaceRef::parse(1, "v1"), FaceRef::parse(3, "v0"),
                              FaceRef::parse(3, "v1")};
  g.map = AffineParamMap::identity(5, 3);
  g.parameters = ParameterDomain({1, 1, 1}, {5, 5, 5}, {1, 1, 1});

  const E conductivity[5] = {E::parameter(0), E(1.0), E::parameter(1), E(1.0), E::parameter(2)};
  for (const E& k : conductivity)
    c.problem.patches.push_back(PatchProblem::diffusion(3, k));
  c.problem.boundary["inlet"] = {BoundaryCondition::Kind::Dirichlet, 0.0};
  c.problem.boundary["outlet"] = {BoundaryCondition::Kind::Neumann, 1.0};
  c.greedy.estimator = Estimator::Output;
  c.output = "out/pipeline";
  return c;
}

CaseConfig cylinder_preset() {
  CaseConfig c;
  c.name = "cylinder";
  GeometryConfig& g = c.geometry;
  for (int q = 0; q < 4; ++q) {
    Eigen::MatrixXd pts(12, 3);
    Eigen::VectorXd w(12);
    const Eigen::Vector2d a = quarter(q), b = quarter(q + 1);
    const Eigen::Vector2d arc[3] = {cylinder_radius * a, cylinder_radius * (a + b), cylinder_radius * b};
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 2; ++i) {
          const int r = i + 2 * j + 6 * k;
          const Eigen::Vector2d xy = i == 0 ? Eigen::Vector2d::Zero() : arc[j];
          pts.row(r) << xy.x(), xy.y(), k * cylinder_height;
          w(r) = i == 1 && j == 1 ? half_sqrt2 : 1.0;
        }
    g.patches.push_back(
        NurbsPatch::from_points({linear_knots(), quadratic_knots(), linear_knots()}, pts, w));
    g.mesh.push_back({{2, 2, 2}, {8, 6, 4}});
    g.boundary_tags["wall"].push_back(FaceRef::parse(q, "u1"));
    g.boundary_tags["bottom"].push_back(FaceRef::parse(q, "w0"));
    g.boundary_tags["top"].push_back(FaceRef::parse(q, "w1"));
    g.map.patches.push_back(diagonal_map({E(1.0), E::parameter(q < 2 ? 0 : 1), E::parameter(2)}));
  }
  g.parameters = ParameterDomain({1, 1, 1}, {5, 5, 5}, {1, 1, 1});

  for (int q = 0; q < 4; ++q) {
    PatchProblem p = PatchProblem::diffusion(3, E(1.0));
    p.source = E(10.0);
    p.source_region = BallRegion{Eigen::Vector3d(0, 0, 0.5), 0.2};
    c.problem.patches.push_back(p);
  }
  c.problem.boundary["wall"] = {BoundaryCondition::Kind::Dirichlet, 0.0};
  c.problem.boundary["top"] = {BoundaryCondition::Kind::Neumann, 1.0};
  c.problem.boundary["bottom"] = {BoundaryCondition::Kind::Neumann, 1.0};
  c.greedy.estimator = Estimator::Output;
  c.output = "out/cylinder";
  return c;
}

CaseConfig torus_preset() {
  CaseConfig c;
  c.name = "torus";
  GeometryConfig& g = c.geometry;
  // Disk cross-section in the (rho, z) half-plane from a 3x3 net.
  const double a = torus_minor_radius * half_sqrt2;
  const double section[3][3][2] = {{{-a, -a}, {0, -2 * a}, {a, -a}},
                                   {{-2 * a, 0}, {0, 0}, {2 * a, 0}},
                                   {{-a, a}, {0, 2 * a}, {a, a}}};
  const double wq[3] = {1.0, half_sqrt2, 1.0};
  for (int q = 0; q < 4; ++q) {
    Eigen::MatrixXd pts(27, 3);
    Eigen::VectorXd w(27);
    const Eigen::Vector2d dirs[3] = {quarter(q), quarter(q) + quarter(q + 1), quarter(q + 1)};
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
          const int r = i + 3 * j + 9 * k;
          const double rho = torus_major_radius + section[j][i][0];
          pts.row(r) << rho * dirs[k].x(), rho * dirs[k].y(), section[j][i][1];
          w(r) = wq[i] * wq[j] * wq[k];
        }
    g.patches.push_back(
        NurbsPatch::from_points({quadratic_knots(), quadratic_knots(), quadratic_knots()}, pts, w));
    g.mesh.push_back({{2, 2, 2}, {2, 2, 4}});
    for (const char* f : {"u0", "u1", "v0", "v1"})
      g.boundary_tags["surface"].push_back(FaceRef::parse(q, f));
    g.map.patches.push_back(diagonal_map({E::parameter(0), E(1.0), E(1.0)}));
  }
  g.parameters = ParameterDomain({1}, {2}, {1});

  for (int q = 0; q < 4; ++q) {
    PatchProblem p = PatchProblem::diffusion(3, E(1.0));
    p.source = E(1.0);
    c.problem.patches.push_back(p);
  }
  c.problem.boundary["surface"] = {BoundaryCondition::Kind::Dirichlet, 0.0};
  c.greedy.training = "lattice=21";
  c.output = "out/torus";
  return c;
}

std::vector<std::string> preset_names() { return {"pipeline", "cylinder", "torus"}; }

CaseConfig make_preset(const std::string& name) {
  if (name == "pipeline")
    return pipeline_preset();
  if (name == "cylinder")
    return cylinder_preset();
  if (name == "torus")
    return torus_preset();
  throw ConstructionError("unknown preset '" + name + "' (pipeline, cylinder, torus)");
}

} // namespace rbiga
