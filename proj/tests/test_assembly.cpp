#include "doctest.h"

#include "rbiga/assembly.hpp"
#include "rbiga/errors.hpp"
#include "rbiga/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>
#include <random>

using namespace rbiga;
using E = ScalarExpression;

namespace {

/// [x0,x1] x [y0,y1] with degree p and `elements` uniform spans per direction.
NurbsPatch square(double x0, double x1, double y0, double y1, int p, int elements) {
  Eigen::MatrixXd pts(4, 2);
  pts << x0, y0, x1, y0, x0, y1, x1, y1;
  NurbsPatch patch = NurbsPatch::from_points({KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)},
                                             pts, Eigen::VectorXd::Ones(4));
  for (int d = 0; d < 2; ++d) {
    PatchRefinement r;
    r.direction = d;
    r.raise_by = p - 1;
    for (int e = 1; e < elements; ++e)
      r.new_knots.push_back(static_cast<double>(e) / elements);
    patch = refine_patch(patch, r);
  }
  return patch;
}

std::vector<std::vector<double>> random_mus(const ParameterDomain& d, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out;
  for (int s = 0; s < n; ++s) {
    std::vector<double> mu;
    for (int i = 0; i < d.size(); ++i)
      mu.push_back(std::uniform_real_distribution<double>(d.lower[i], d.upper[i])(rng));
    out.push_back(mu);
  }
  return out;
}

double rel_frobenius(const SparseMatrix& a, const SparseMatrix& b) {
  return SparseMatrix(a - b).norm() / b.norm();
}

/// Two stacked squares, the upper one stretched by mu1 in y and shifted, with
/// conductivities mu2 and 1, a ball source and a Neumann flux on top.
struct TwoPatchCase {
  MultipatchDomain domain;
  AffineParamMap map;
  ProblemDefinition problem;
  ParameterDomain params{{0.5, 1.0}, {2.0, 3.0}, {1.0, 1.0}};

  TwoPatchCase() {
    domain = glue_patches({square(0, 1, 0, 1, 2, 3), square(0, 1, 1, 2, 2, 3)});
    domain.boundary_tags["bottom"] = {FaceRef::parse(0, "v0")};
    domain.boundary_tags["top"] = {FaceRef::parse(1, "v1")};
    map.patches.resize(2, PatchMap::identity(2));
    map.patches[1].linear[3] = E::parameter(0);
    map.patches[1].offset[1] = E(1.0) - E::parameter(0);
    problem.patches.push_back(PatchProblem::diffusion(2, E::parameter(1)));
    problem.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
    problem.patches[1].coefficient[8] = E(0.5);
    problem.patches[1].source = E(3.0);
    problem.patches[1].source_region = BallRegion{Eigen::Vector2d(0.5, 1.5), 0.3};
    problem.patches[0].source = E(1.0);
    problem.boundary["bottom"] = {BoundaryCondition::Kind::Dirichlet, 0.0};
    problem.boundary["top"] = {BoundaryCondition::Kind::Neumann, 2.0};
  }
};

/// Gram matrix of the basis, used to measure L2 errors.
double l2_error(const MultipatchDomain& d, const Eigen::VectorXd& u,
                const std::function<double(double, double)>& exact) {
  double err = 0.0;
  const NurbsPatch& p = d.patches[0];
  for (const auto& el : build_quadrature(p, 2))
    for (std::size_t q = 0; q < el.points.size(); ++q) {
      const std::vector<double> xi{el.points[q][0], el.points[q][1]};
      const Eigen::VectorXd x = eval_geometry(p, xi);
      const double det = std::abs(eval_geometry_jacobian(p, xi).det);
      const double e = evaluate_field(d, u, 0, xi) - exact(x(0), x(1));
      err += el.weights[q] * det * e * e;
    }
  return std::sqrt(err);
}

} // namespace

TEST_CASE("pull-back coefficient") {
  AffineParamMap m;
  PatchMap p = PatchMap::identity(2);
  p.linear[0] = E(2.0);
  m.patches.push_back(p);
  ProblemDefinition prob;
  prob.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
  prob.patches[0].source = E(4.0);
  const ParametricCoefficient c = build_parametric_coefficient(m, prob, 0);
  const std::vector<double> mu{};
  const double expect[9] = {0.5, 0, 0, 0, 2, 0, 0, 0, 0};
  for (int i = 0; i < 9; ++i)
    CHECK(c.matrix[i].evaluate(mu) == doctest::Approx(expect[i]).epsilon(1e-15));
  CHECK(c.jacobian.evaluate(mu) == 2.0);
  CHECK(c.source.evaluate(mu) == 8.0);

  const AffineParamMap id = AffineParamMap::identity(1, 3);
  ProblemDefinition p3;
  p3.patches.push_back(PatchProblem::diffusion(3, E::parameter(0)));
  const ParametricCoefficient c3 = build_parametric_coefficient(id, p3, 0);
  for (int i = 0; i < 16; ++i)
    CHECK(c3.matrix[i].to_string() == p3.patches[0].coefficient[i].to_string());

  // a general 3D map against the numeric product J D^T... form
  AffineParamMap g;
  PatchMap q = PatchMap::identity(3);
  const char* entries[9] = {"mu1", "0.3", "0", "0.1*mu2", "2", "0.2", "0", "mu1 - mu2", "1.5"};
  for (int i = 0; i < 9; ++i)
    q.linear[i] = E::parse(entries[i]);
  g.patches.push_back(q);
  ProblemDefinition pg;
  pg.patches.push_back(PatchProblem::diffusion(3, E(1.0)));
  pg.patches[0].coefficient[1] = pg.patches[0].coefficient[4] = E(0.25);
  pg.patches[0].coefficient[15] = E(0.7);
  const ParametricCoefficient cg = build_parametric_coefficient(g, pg, 0);
  const std::vector<double> mu2{1.7, 0.4};
  const MapValues mv = evaluate_map(g, 0, mu2);
  Eigen::MatrixXd ao(4, 4), gb = Eigen::MatrixXd::Identity(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      ao(r, s) = pg.patches[0].a(r, s, 3).evaluate(mu2);
  gb.topLeftCorner(3, 3) = mv.inverse;
  const Eigen::MatrixXd expect_m = mv.jacobian * gb * ao * gb.transpose();
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      CHECK(std::abs(cg.matrix[r * 4 + s].evaluate(mu2) - expect_m(r, s)) < 1e-13);
}

TEST_CASE("single patch Laplace has one term") {
  MultipatchDomain d = glue_patches({square(0, 1, 0, 1, 2, 2)});
  ProblemDefinition prob;
  prob.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
  const ParameterDomain params({0.0}, {1.0}, {0.5});
  const auto dec = assemble_affine_decomposition(d, AffineParamMap::identity(1, 2), prob, params);
  CHECK(dec.q() == 1);
  CHECK(dec.terms[0].theta.to_string() == "1");
  CHECK(dec.terms[0].structurally_psd);
  CHECK(dec.q_f() == 0);
}

TEST_CASE("affine decomposition reproduces direct assembly") {
  TwoPatchCase c;
  const auto dec = assemble_affine_decomposition(c.domain, c.map, c.problem, c.params);
  // patch 0: mu2 (x and y); patch 1: 1/mu1 (x), mu1 (x... ) merged per coefficient function
  for (const auto& t : dec.terms) {
    const SparseMatrix sym = t.matrix.transpose();
    CHECK(SparseMatrix(t.matrix - sym).norm() <= 1e-14 * t.matrix.norm());
  }
  for (const auto& mu : random_mus(c.params, 20, 5)) {
    const SparseMatrix direct = assemble_direct_matrix(c.domain, c.map, c.problem, mu);
    CHECK(rel_frobenius(dec.matrix(mu), direct) < 1e-12);
    const Eigen::VectorXd fd = assemble_direct_rhs(c.domain, c.map, c.problem, mu);
    CHECK((dec.rhs(mu) - fd).norm() < 1e-12 * fd.norm());
  }
}

TEST_CASE("terms with equal coefficient functions merge") {
  TwoPatchCase c;
  // both patches get conductivity mu2 and no stretch
  c.map = AffineParamMap::identity(2, 2);
  c.problem.patches[1] = PatchProblem::diffusion(2, E::parameter(1));
  const auto dec = assemble_affine_decomposition(c.domain, c.map, c.problem, c.params);
  CHECK(dec.q() == 1);
  CHECK(dec.terms[0].theta.to_string() == "mu2");
}

TEST_CASE("boundary conditions") {
  TwoPatchCase c;
  const auto full = assemble_affine_decomposition(c.domain, c.map, c.problem, c.params);
  const TruthSpace space = TruthSpace::build(c.domain, c.problem);
  CHECK(space.free_count() == c.domain.dof_count - 5);
  const auto con = apply_dirichlet(space, full, c.problem);
  CHECK(con.size() == space.free_count());
  CHECK((space.restrict(space.expand(Eigen::VectorXd::Ones(space.free_count()))) -
         Eigen::VectorXd::Ones(space.free_count())).norm() == 0.0);

  ProblemDefinition nonzero = c.problem;
  nonzero.boundary["bottom"].value = 1.0;
  CHECK_THROWS_AS(apply_dirichlet(space, full, nonzero), UnsupportedError);

  ProblemDefinition no_dirichlet = c.problem;
  no_dirichlet.boundary.erase("bottom");
  no_dirichlet.patches[1].coefficient[8] = E(0.0);
  const auto dec = assemble_affine_decomposition(c.domain, c.map, no_dirichlet, c.params);
  const auto unc = apply_dirichlet(TruthSpace::build(c.domain, no_dirichlet), dec, no_dirichlet);
  CHECK(unc.size() == c.domain.dof_count);
  CHECK_THROWS_AS(truth_solve(unc, c.params.mu_ref), SolverError);

  ProblemDefinition both = c.problem;
  c.domain.boundary_tags["bottom2"] = {FaceRef::parse(0, "v0")};
  both.boundary["bottom2"] = {BoundaryCondition::Kind::Neumann, 1.0};
  const std::vector<std::vector<double>> none;
  CHECK_THROWS_AS(both.validate(c.domain, c.params, none), ConstructionError);
}

TEST_CASE("curved Neumann face under a stretching map is rejected") {
  Eigen::MatrixXd pts(6, 2);
  const double w = std::sqrt(0.5);
  pts << 1, 0, 2, 0, 1, 1, 2, 2, 0, 1, 0, 2;
  Eigen::VectorXd wt(6);
  wt << 1, 1, w, w, 1, 1;
  const NurbsPatch ring = NurbsPatch::from_points(
      {KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 0, 1, 1, 1}, 2)}, pts, wt);
  MultipatchDomain d = glue_patches({ring});
  d.boundary_tags["arc"] = {FaceRef::parse(0, "u1")};
  d.boundary_tags["end"] = {FaceRef::parse(0, "v0")};
  AffineParamMap m = AffineParamMap::identity(1, 2);
  m.patches[0].linear[0] = E::parameter(0);
  ProblemDefinition prob;
  prob.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
  prob.boundary["arc"] = {BoundaryCondition::Kind::Neumann, 1.0};
  const ParameterDomain params({1.0}, {2.0}, {1.0});
  CHECK_THROWS_AS(assemble_affine_decomposition(d, m, prob, params), UnsupportedError);
  // a straight face is fine and matches the direct route
  prob.boundary.clear();
  prob.boundary["end"] = {BoundaryCondition::Kind::Neumann, 1.5};
  const auto dec = assemble_affine_decomposition(d, m, prob, params);
  const std::vector<double> mu{1.6};
  const Eigen::VectorXd fd = assemble_direct_rhs(d, m, prob, mu);
  CHECK((dec.rhs(mu) - fd).norm() < 1e-13 * fd.norm());
  CHECK(rel_frobenius(dec.matrix(mu), assemble_direct_matrix(d, m, prob, mu)) < 1e-12);
}

TEST_CASE("truth solve basics") {
  TwoPatchCase c;
  ProblemDefinition zero = c.problem;
  zero.patches[0].source = E(0.0);
  zero.patches[1].source = E(0.0);
  zero.boundary["top"].value = 0.0;
  const TruthProblem tz = TruthProblem::build(c.domain, c.map, zero, c.params);
  const Eigen::VectorXd uz = truth_solve(tz.constrained, c.params.mu_ref);
  CHECK(uz.norm() == 0.0);
  CHECK(evaluate_output(tz.constrained, c.params.mu_ref, uz) == 0.0);

  const TruthProblem t = TruthProblem::build(c.domain, c.map, c.problem, c.params);
  for (const auto& mu : random_mus(c.params, 5, 9)) {
    const Eigen::VectorXd u = truth_solve(t.constrained, mu);
    const SparseMatrix a = t.constrained.matrix(mu);
    const Eigen::VectorXd f = t.constrained.rhs(mu);
    CHECK((a * u - f).norm() < 1e-10 * f.norm());
    const double s = evaluate_output(t.constrained, mu, u);
    CHECK(std::abs(s - u.dot(a * u)) < 1e-10 * std::abs(s));
    // coercive at the sample
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }

  // X inner product
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(t.free_count());
    for (int k = 0; k < x.size(); ++k)
      x(k) = nd(rng);
    CHECK(x.dot(t.x_gram * x) > 0.0);
  }
  const Eigen::MatrixXd ad = Eigen::MatrixXd(t.constrained.matrix(c.params.mu_ref));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ad, Eigen::MatrixXd(t.x_gram),
                                                                Eigen::EigenvaluesOnly);
  CHECK(std::abs(ges.eigenvalues().minCoeff() - 1.0) < 1e-10);

  // field evaluation: partition of unity and interpolation at corners
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(c.domain.dof_count);
  for (double x : {0.0, 0.37, 1.0})
    CHECK(std::abs(evaluate_field(c.domain, ones, 1, std::vector<double>{x, 0.61}) - 1.0) < 1e-14);
  const Eigen::VectorXd u = t.space.expand(truth_solve(t.constrained, c.params.mu_ref));
  const NurbsPatch& p1 = c.domain.patches[1];
  const int corner = c.domain.glue[1][static_cast<std::size_t>(p1.lattice_index(p1.shape()[0] - 1, p1.shape()[1] - 1))];
  CHECK(std::abs(evaluate_field(c.domain, u, 1, std::vector<double>{1.0, 1.0}) - u(corner)) < 1e-14);
}

TEST_CASE("patch test: constant reproduced") {
  // -div grad u + u = 1 with natural boundary: u = 1
  MultipatchDomain d = glue_patches({square(0, 1, 0, 1, 2, 3), square(1, 3, 0, 1, 3, 2)});
  ProblemDefinition prob;
  for (int k = 0; k < 2; ++k) {
    prob.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
    prob.patches[k].coefficient[8] = E(1.0);
    prob.patches[k].source = E(1.0);
  }
  const TruthProblem t = TruthProblem::build(d, AffineParamMap::identity(2, 2), prob,
                                             ParameterDomain({0.0}, {1.0}, {0.5}));
  const Eigen::VectorXd u = truth_solve(t.constrained, std::vector<double>{0.5});
  CHECK((u - Eigen::VectorXd::Ones(u.size())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("manufactured solution converges at rate p+1") {
  const double pi = std::numbers::pi;
  auto exact = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  for (int p : {2, 3}) {
    std::vector<double> errors;
    for (int level = 0; level < 3; ++level) {
      MultipatchDomain d = glue_patches({square(0, 1, 0, 1, p, 4 << level)});
      d.boundary_tags["wall"] = {FaceRef::parse(0, "u0"), FaceRef::parse(0, "u1"),
                                 FaceRef::parse(0, "v0"), FaceRef::parse(0, "v1")};
      ProblemDefinition prob;
      prob.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
      prob.patches[0].source = E(2.0 * pi * pi);
      prob.spatial_source = [pi](const Eigen::VectorXd& x) {
        return std::sin(pi * x(0)) * std::sin(pi * x(1));
      };
      prob.boundary["wall"] = {BoundaryCondition::Kind::Dirichlet, 0.0};
      const TruthProblem t = TruthProblem::build(d, AffineParamMap::identity(1, 2), prob,
                                                 ParameterDomain({0.0}, {1.0}, {0.5}));
      const Eigen::VectorXd u = t.space.expand(truth_solve(t.constrained, std::vector<double>{0.5}));
      errors.push_back(l2_error(d, u, exact));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double rate = std::log2(errors[i - 1] / errors[i]);
      CHECK(std::abs(rate - (p + 1)) < 0.3);
    }
  }
}

TEST_CASE("Neumann flux with Dirichlet wall gives the linear profile") {
  // u = h x on the unit square: u = 0 at x = 0, du/dx = h at x = 1
  MultipatchDomain d = glue_patches({square(0, 1, 0, 1, 2, 4)});
  d.boundary_tags["left"] = {FaceRef::parse(0, "u0")};
  d.boundary_tags["right"] = {FaceRef::parse(0, "u1")};
  ProblemDefinition prob;
  prob.patches.push_back(PatchProblem::diffusion(2, E(1.0)));
  prob.boundary["left"] = {BoundaryCondition::Kind::Dirichlet, 0.0};
  prob.boundary["right"] = {BoundaryCondition::Kind::Neumann, 0.7};
  const TruthProblem t = TruthProblem::build(d, AffineParamMap::identity(1, 2), prob,
                                             ParameterDomain({0.0}, {1.0}, {0.5}));
  const Eigen::VectorXd u = t.space.expand(truth_solve(t.constrained, std::vector<double>{0.5}));
  for (double x : {0.1, 0.5, 0.9, 1.0})
    for (double y : {0.0, 0.3})
      CHECK(std::abs(evaluate_field(d, u, 0, std::vector<double>{x, y}) - 0.7 * x) < 1e-10);
  // total flux through the wall equals the imposed flux h |Gamma_N|
  const SparseMatrix a = t.full.matrix(std::vector<double>{0.5});
  const Eigen::VectorXd reaction = a * u - t.full.rhs(std::vector<double>{0.5});
  CHECK(std::abs(reaction.sum() + 0.7) < 1e-10);
}
