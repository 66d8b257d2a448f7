#include "doctest.h"
#include "cases.hpp"

#include "rbiga/errors.hpp"
#include "rbiga/reduction.hpp"

#include <Eigen/Eigenvalues>

using namespace rbiga;
using testing_support::random_parameters;
using testing_support::three_patch_problem;

namespace {

CoercivityModel trivial_coercivity(const TruthProblem& t) {
  CoercivityModel m;
  for (const auto& term : t.constrained.terms)
    m.thetas.push_back(term.theta);
  m.theta_ref = t.constrained.thetas(t.parameters.mu_ref);
  return m;
}

double xnorm(const TruthProblem& t, const Eigen::VectorXd& v) { return std::sqrt(v.dot(t.x_gram * v)); }

} // namespace

TEST_CASE("Gram-Schmidt in the X inner product") {
  const TruthProblem t = three_patch_problem();
  RBSpace s;
  s.z.resize(t.free_count(), 0);
  s.xz.resize(t.free_count(), 0);
  const std::vector<double> mu0 = t.parameters.mu_ref;
  const Eigen::VectorXd u = truth_solve(t.constrained, mu0);
  REQUIRE(gram_schmidt_append(s, u, t.x_gram, mu0));
  CHECK((s.z.col(0) - u / xnorm(t, u)).norm() < 1e-14 * s.z.col(0).norm());
  CHECK_FALSE(gram_schmidt_append(s, u, t.x_gram, mu0));
  CHECK_FALSE(gram_schmidt_append(s, 3.0 * u, t.x_gram, mu0));
  CHECK(s.n() == 1);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd v(t.free_count());
    for (Eigen::Index k = 0; k < v.size(); ++k)
      v(k) = nd(rng);
    gram_schmidt_append(s, v, t.x_gram, mu0);
  }
  CHECK(s.n() == 21);
  const Eigen::MatrixXd g = s.z.transpose() * (t.x_gram * s.z);
  CHECK((g - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s.xz - t.x_gram * s.z).norm() < 1e-10 * s.xz.norm());
}

TEST_CASE("projection, online solve and reconstruction") {
  const TruthProblem t = three_patch_problem();
  OfflineBuilder b(t, trivial_coercivity(t));
  const auto train = random_parameters(t.parameters, 8, 3);
  REQUIRE(b.append(truth_solve(t.constrained, train[0]), train[0]));

  // N = 1: scalar Galerkin
  const OnlineModel& m1 = b.model();
  const Eigen::VectorXd zeta = b.space().z.col(0);
  for (int q = 0; q < m1.q(); ++q)
    CHECK(std::abs(m1.a_n[q](0, 0) - zeta.dot(t.constrained.terms[q].matrix * zeta)) <
          1e-13 * std::max(1.0, std::abs(m1.a_n[q](0, 0))));
  const std::vector<double> mu = train[5];
  const double a11 = zeta.dot(t.constrained.matrix(mu) * zeta);
  const double f1 = t.constrained.rhs(mu).dot(zeta);
  CHECK(std::abs(online_solve(m1, mu)(0) - f1 / a11) < 1e-12 * std::abs(f1 / a11));

  for (std::size_t i = 1; i < train.size(); ++i)
    b.append(truth_solve(t.constrained, train[i]), train[i]);
  const OnlineModel& m = b.model();
  const Eigen::MatrixXd& z = b.space().z;
  for (int q = 0; q < m.q(); ++q) {
    const Eigen::MatrixXd full = z.transpose() * (t.constrained.terms[q].matrix * z);
    CHECK((m.a_n[q] - full).cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, full.cwiseAbs().maxCoeff()));
  }
  for (int p = 0; p < m.q_f(); ++p) {
    const Eigen::VectorXd full = z.transpose() * t.constrained.rhs_terms[p].vector;
    CHECK((m.f_n[p] - full).cwiseAbs().maxCoeff() < 1e-13 * full.cwiseAbs().maxCoeff());
  }
  for (const auto& mu2 : random_parameters(t.parameters, 5, 4)) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.n(), m.n());
    const Eigen::VectorXd th = m.thetas(mu2);
    for (int q = 0; q < m.q(); ++q)
      a += th(q) * m.a_n[q];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }

  // Lagrange reproduction
  for (const auto& s : train) {
    const Eigen::VectorXd uh = truth_solve(t.constrained, s);
    const Eigen::VectorXd un = online_solve(m, s);
    CHECK(xnorm(t, uh - reconstruct(b.space(), un)) < 1e-10 * xnorm(t, uh));
    const double sh = evaluate_output(t.constrained, s, uh);
    CHECK(std::abs(online_output(m, s, un) - sh) < 1e-10 * std::abs(sh));
  }

  // reconstruction
  CHECK(reconstruct(b.space(), Eigen::VectorXd::Zero(m.n())).norm() == 0.0);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(m.n(), 1.0, 2.0);
  CHECK(std::abs(xnorm(t, reconstruct(b.space(), c)) - c.norm()) < 1e-10 * c.norm());
  const Eigen::VectorXd snap = truth_solve(t.constrained, train[2]);
  const Eigen::VectorXd proj = z.transpose() * (t.x_gram * snap);
  CHECK(xnorm(t, reconstruct(b.space(), proj) - snap) < 1e-10 * xnorm(t, snap));

  CHECK_THROWS_AS(online_solve(m, std::vector<double>{9, 1, 1}), DomainError);
}

TEST_CASE("compliant identity, optimality and monotonicity") {
  const TruthProblem t = three_patch_problem();
  OfflineBuilder b(t, trivial_coercivity(t));
  const auto train = random_parameters(t.parameters, 6, 7);
  for (const auto& s : train)
    b.append(truth_solve(t.constrained, s), s);
  const OnlineModel& m = b.model();
  const auto tests = random_parameters(t.parameters, 10, 8);
  for (const auto& mu : tests) {
    const Eigen::VectorXd uh = truth_solve(t.constrained, mu);
    const double sh = evaluate_output(t.constrained, mu, uh);
    const Eigen::VectorXd un = online_solve(m, mu);
    const double sn = online_output(m, mu, un);
    const Eigen::VectorXd e = uh - reconstruct(b.space(), un);
    const double en2 = e.dot(t.constrained.matrix(mu) * e);
    CHECK(std::abs(sh - sn - en2) < 1e-10 * std::abs(sh));
    CHECK(sh >= sn);

    // offline/online consistency: projecting with truth-sized objects
    const Eigen::MatrixXd& z = b.space().z;
    const Eigen::MatrixXd an = z.transpose() * (t.constrained.matrix(mu) * z);
    const Eigen::VectorXd fn = z.transpose() * t.constrained.rhs(mu);
    const double s_direct = fn.dot(an.ldlt().solve(fn));
    CHECK(std::abs(s_direct - sn) < 1e-12 * std::abs(sn));

    // Galerkin optimality against the projections of stored snapshots
    const double err = t.energy_norm(e, mu);
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd v = b.space().z.col(k) * (b.space().z.col(k).dot(t.x_gram * uh));
      CHECK(err <= t.energy_norm(uh - v, mu) * (1 + 1e-12));
    }

    // nested spaces: error non-increasing in N
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= m.n(); ++n) {
      const OnlineModel mt = m.truncated(n);
      const double en = t.energy_norm(uh - reconstruct(b.space(), online_solve(mt, mu)), mu);
      CHECK(en <= prev * (1 + 1e-12) + 1e-12 * t.energy_norm(uh, mu));
      prev = en;
    }
  }
}
