#include "rbiga/reduction.hpp"

#include "rbiga/errors.hpp"

#include <cmath>
#include <sstream>

namespace rbiga {

bool gram_schmidt_append(RBSpace& space, const Eigen::VectorXd& snapshot, const SparseMatrix& x_gram,
                         const std::vector<double>& mu) {
  const double original = std::sqrt(std::max(0.0, snapshot.dot(x_gram * snapshot)));
  if (!(original > 0.0))
    return false;
  Eigen::VectorXd v = snapshot;
  for (int pass = 0; pass < 2; ++pass)
    for (int j = 0; j < space.n(); ++j)
      v -= space.xz.col(j).dot(v) * space.z.col(j);
  const Eigen::VectorXd xv = x_gram * v;
  const double norm = std::sqrt(std::max(0.0, v.dot(xv)));
  if (norm < 1e-10 * original)
    return false;
  const Eigen::Index n = space.n();
  space.z.conservativeResize(snapshot.size(), n + 1);
  space.xz.conservativeResize(snapshot.size(), n + 1);
  space.z.col(n) = v / norm;
  space.xz.col(n) = xv / norm;
  space.samples.push_back(mu);
  return true;
}

Eigen::VectorXd reconstruct(const RBSpace& space, const Eigen::VectorXd& u) {
  if (u.size() == 0)
    return Eigen::VectorXd::Zero(space.z.rows());
  return space.z.leftCols(u.size()) * u;
}

Eigen::VectorXd OnlineModel::thetas(std::span<const double> mu) const {
  Eigen::VectorXd t(q());
  for (int i = 0; i < q(); ++i)
    t(i) = theta_a[static_cast<std::size_t>(i)].evaluate(mu);
  return t;
}

Eigen::VectorXd OnlineModel::rhs_thetas(std::span<const double> mu) const {
  Eigen::VectorXd t(q_f());
  for (int i = 0; i < q_f(); ++i)
    t(i) = theta_f[static_cast<std::size_t>(i)].evaluate(mu);
  return t;
}

OnlineModel OnlineModel::truncated(int basis_count) const {
  if (basis_count < 0 || basis_count > n())
    throw DomainError("online model: truncation beyond the basis size");
  OnlineModel out = *this;
  for (auto& a : out.a_n)
    a = a.topLeftCorner(basis_count, basis_count).eval();
  for (auto& f : out.f_n)
    f = f.head(basis_count).eval();
  out.residual = residual.truncated(basis_count);
  return out;
}

Eigen::VectorXd online_solve(const OnlineModel& model, std::span<const double> mu) {
  model.parameters.check(mu);
  const int n = model.n();
  if (n == 0)
    return Eigen::VectorXd();
  const Eigen::VectorXd ta = model.thetas(mu);
  const Eigen::VectorXd tf = model.rhs_thetas(mu);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int q = 0; q < model.q(); ++q)
    a += ta(q) * model.a_n[static_cast<std::size_t>(q)];
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (int p = 0; p < model.q_f(); ++p)
    f += tf(p) * model.f_n[static_cast<std::size_t>(p)];
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw SolverError("online solve: reduced matrix is not positive definite");
  return llt.solve(f);
}

double online_output(const OnlineModel& model, std::span<const double> mu, const Eigen::VectorXd& u) {
  const Eigen::VectorXd tf = model.rhs_thetas(mu);
  double s = 0.0;
  for (int p = 0; p < model.q_f(); ++p)
    s += tf(p) * model.f_n[static_cast<std::size_t>(p)].head(u.size()).dot(u);
  return s;
}

OnlineResult online_query(const OnlineModel& model, std::span<const double> mu) {
  OnlineResult r;
  r.u = online_solve(model, mu);
  r.output = online_output(model, mu, r.u);
  r.residual = residual_dual_norm(model.residual, model.thetas(mu), model.rhs_thetas(mu), r.u);
  r.alpha_lb = model.coercivity.lower_bound(mu);
  r.delta_energy = error_estimator(r.residual, r.alpha_lb, Estimator::Energy);
  r.delta_x = error_estimator(r.residual, r.alpha_lb, Estimator::XNorm);
  r.delta_output = error_estimator(r.residual, r.alpha_lb, Estimator::Output);
  return r;
}

OfflineBuilder::OfflineBuilder(const TruthProblem& truth, CoercivityModel coercivity)
    : truth_(&truth) {
  const AffineFormDecomposition& dec = truth.constrained;
  const Eigen::Index nf = truth.free_count();
  model_.parameters = truth.parameters;
  for (const auto& t : dec.terms)
    model_.theta_a.push_back(t.theta);
  for (const auto& t : dec.rhs_terms)
    model_.theta_f.push_back(t.theta);
  model_.a_n.assign(dec.terms.size(), Eigen::MatrixXd(0, 0));
  model_.f_n.assign(dec.rhs_terms.size(), Eigen::VectorXd(0));
  model_.coercivity = std::move(coercivity);
  model_.residual.q_f = dec.q_f();
  model_.residual.q_a = dec.q();
  model_.residual.n = 0;
  model_.residual.gram.resize(0, 0);
  model_.residual.factor.resize(0, 0);
  space_.z.resize(nf, 0);
  space_.xz.resize(nf, 0);
  reps_.resize(nf, 0);
  g_.resize(nf, 0);
  w_.resize(nf, 0);
  xw_.resize(nf, 0);
  for (const auto& t : dec.rhs_terms)
    add_representer(t.vector);
}

void OfflineBuilder::add_representer(const Eigen::VectorXd& g) {
  const Eigen::VectorXd xi = truth_->x_solver->solve(g);
  const Eigen::Index k = reps_.cols();
  reps_.conservativeResize(Eigen::NoChange, k + 1);
  g_.conservativeResize(Eigen::NoChange, k + 1);
  reps_.col(k) = xi;
  g_.col(k) = g;

  ResidualData& rd = model_.residual;
  rd.gram.conservativeResize(k + 1, k + 1);
  // (xi_i, xi_k)_X = xi_i^T g_k
  const Eigen::VectorXd col = reps_.transpose() * g;
  rd.gram.col(k) = col;
  rd.gram.row(k) = col.transpose();

  // one more column of the X-orthogonal factorization of the representers
  Eigen::VectorXd r = Eigen::VectorXd::Zero(k + 1);
  Eigen::VectorXd v = xi;
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double c = xw_.col(j).dot(v);
      r(j) += c;
      v -= c * w_.col(j);
    }
  const Eigen::VectorXd xv = truth_->x_gram * v;
  const double rho = std::sqrt(std::max(0.0, v.dot(xv)));
  const double scale = std::sqrt(std::max(0.0, col(k)));
  w_.conservativeResize(Eigen::NoChange, k + 1);
  xw_.conservativeResize(Eigen::NoChange, k + 1);
  if (rho > 1e-13 * scale) {
    r(k) = rho;
    w_.col(k) = v / rho;
    xw_.col(k) = xv / rho;
  } else {
    w_.col(k).setZero();
    xw_.col(k).setZero();
  }
  rd.factor.conservativeResize(k + 1, k + 1);
  rd.factor.row(k).setZero();
  rd.factor.col(k) = r;
}

bool OfflineBuilder::append(const Eigen::VectorXd& snapshot, const std::vector<double>& mu) {
  if (!gram_schmidt_append(space_, snapshot, truth_->x_gram, mu))
    return false;
  const AffineFormDecomposition& dec = truth_->constrained;
  const Eigen::Index n = space_.n();
  const Eigen::VectorXd zeta = space_.z.col(n - 1);
  std::vector<Eigen::VectorXd> az;
  for (std::size_t q = 0; q < dec.terms.size(); ++q) {
    az.push_back(dec.terms[q].matrix * zeta);
    Eigen::MatrixXd& a = model_.a_n[q];
    const Eigen::VectorXd col = space_.z.transpose() * az.back();
    a.conservativeResize(n, n);
    a.col(n - 1) = col;
    a.row(n - 1) = col.transpose();
  }
  for (std::size_t p = 0; p < dec.rhs_terms.size(); ++p) {
    Eigen::VectorXd& f = model_.f_n[p];
    f.conservativeResize(n);
    f(n - 1) = dec.rhs_terms[p].vector.dot(zeta);
  }
  for (const auto& v : az)
    add_representer(v);
  model_.residual.n = static_cast<int>(n);
  return true;
}

} // namespace rbiga
