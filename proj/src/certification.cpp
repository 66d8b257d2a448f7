#include "rbiga/certification.hpp"

#include "rbiga/errors.hpp"
#include "rbiga/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rbiga {

ResidualData ResidualData::truncated(int basis_count) const {
  if (basis_count < 0 || basis_count > n)
    throw DomainError("residual data: truncation beyond the stored basis");
  ResidualData out;
  out.q_f = q_f;
  out.q_a = q_a;
  out.n = basis_count;
  const int k = out.size();
  out.gram = gram.topLeftCorner(k, k);
  out.factor = factor.topLeftCorner(k, k);
  return out;
}

Eigen::VectorXd residual_coefficients(const ResidualData& data, const Eigen::VectorXd& theta_a,
                                      const Eigen::VectorXd& theta_f, const Eigen::VectorXd& u) {
  const int nb = static_cast<int>(u.size());
  if (nb > data.n || theta_a.size() != data.q_a || theta_f.size() != data.q_f)
    throw DomainError("residual: coefficient sizes do not match the stored data");
  Eigen::VectorXd c(data.q_f + data.q_a * nb);
  c.head(data.q_f) = theta_f;
  for (int m = 0; m < nb; ++m)
    for (int q = 0; q < data.q_a; ++q)
      c(data.index_a(m, q)) = -theta_a(q) * u(m);
  return c;
}

double residual_dual_norm(const ResidualData& data, const Eigen::VectorXd& theta_a,
                          const Eigen::VectorXd& theta_f, const Eigen::VectorXd& u) {
  const Eigen::VectorXd c = residual_coefficients(data, theta_a, theta_f, u);
  const Eigen::Index k = c.size();
  return (data.factor.topLeftCorner(k, k).triangularView<Eigen::Upper>() * c).norm();
}

double residual_dual_norm_gram(const ResidualData& data, const Eigen::VectorXd& theta_a,
                               const Eigen::VectorXd& theta_f, const Eigen::VectorXd& u) {
  const Eigen::VectorXd c = residual_coefficients(data, theta_a, theta_f, u);
  const Eigen::Index k = c.size();
  return std::sqrt(std::max(0.0, c.dot(data.gram.topLeftCorner(k, k) * c)));
}

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(a.rows());
  LpResult res;
  if ((upper - lower).minCoeff() < 0.0)
    return res;
  // z = x - lower in [0, upper - lower]; rows: z + s = u, a z - t = b - a lower.
  const int rows = n + m;
  const int n_struct = 2 * n + m;
  const int cols = n_struct + rows;
  const int rhs = cols;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  for (int i = 0; i < n; ++i) {
    t(i, i) = 1.0;
    t(i, n + i) = 1.0;
    t(i, rhs) = upper(i) - lower(i);
  }
  for (int k = 0; k < m; ++k) {
    const int r = n + k;
    t.row(r).head(n) = a.row(k);
    t(r, 2 * n + k) = -1.0;
    t(r, rhs) = b(k) - a.row(k).dot(lower);
    if (t(r, rhs) < 0.0)
      t.row(r) *= -1.0;
  }
  std::vector<int> basis(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    t(r, n_struct + r) = 1.0;
    basis[static_cast<std::size_t>(r)] = n_struct + r;
  }
  const double scale = std::max(1.0, t.col(rhs).head(rows).cwiseAbs().maxCoeff());
  const double eps = 1e-12;

  auto pivot = [&](int r, int col) {
    t.row(r) /= t(r, col);
    for (int i = 0; i <= rows; ++i)
      if (i != r && t(i, col) != 0.0)
        t.row(i) -= t(i, col) * t.row(r);
    basis[static_cast<std::size_t>(r)] = col;
  };
  // Bland's rule: lowest entering index, lowest basic index among ratio ties.
  auto run = [&](int allowed) -> bool {
    for (int iter = 0; iter < 10000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j)
        if (t(rows, j) < -eps) {
          enter = j;
          break;
        }
      if (enter < 0)
        return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows; ++i)
        if (t(i, enter) > eps) {
          const double ratio = t(i, rhs) / t(i, enter);
          if (ratio < best - 1e-15 * scale ||
              (std::abs(ratio - best) <= 1e-15 * scale && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = std::min(best, ratio);
            leave = i;
          }
        }
      if (leave < 0)
        return false;
      pivot(leave, enter);
    }
    throw SolverError("linear program: simplex iteration limit reached");
  };

  // Phase 1: minimize the sum of artificials.
  t.row(rows).setZero();
  for (int r = 0; r < rows; ++r) {
    t.row(rows).head(n_struct) -= t.row(r).head(n_struct);
    t(rows, rhs) -= t(r, rhs);
  }
  run(n_struct);
  if (-t(rows, rhs) > 1e-9 * scale)
    return res;
  for (int r = 0; r < rows; ++r)
    if (basis[static_cast<std::size_t>(r)] >= n_struct)
      for (int j = 0; j < n_struct; ++j)
        if (std::abs(t(r, j)) > 1e-10) {
          pivot(r, j);
          break;
        }

  // Phase 2.
  t.row(rows).setZero();
  t.row(rows).head(n) = c.transpose();
  for (int r = 0; r < rows; ++r) {
    const int bc = basis[static_cast<std::size_t>(r)];
    if (bc < n && t(rows, bc) != 0.0)
      t.row(rows) -= t(rows, bc) * t.row(r);
  }
  if (!run(n_struct)) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < rows; ++r)
    if (basis[static_cast<std::size_t>(r)] < n)
      z(basis[static_cast<std::size_t>(r)]) = t(r, rhs);
  res.status = LpResult::Status::Optimal;
  res.x = lower + z;
  res.value = c.dot(res.x);
  return res;
}

Eigen::VectorXd CoercivityModel::theta_values(std::span<const double> mu) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t q = 0; q < thetas.size(); ++q)
    v(static_cast<Eigen::Index>(q)) = thetas[q].evaluate(mu);
  return v;
}

double CoercivityModel::upper_bound(std::span<const double> mu) const {
  if (samples.empty())
    return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd th = theta_values(mu);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    best = std::min(best, s.theta.dot(th));
  return best;
}

double CoercivityModel::lower_bound(std::span<const double> mu) const {
  const Eigen::VectorXd th = theta_values(mu);
  if (strategy == CoercivityStrategy::MinTheta)
    return th.cwiseQuotient(theta_ref).minCoeff();

  if (samples.empty())
    throw StrategyError("coercivity: SCM model has no samples");
  std::vector<double> dist;
  for (const auto& s : samples) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.mu.size(); ++i) {
      const double e = (s.mu[i] - mu[i]) / distance_scale[i];
      d += e * e;
    }
    dist.push_back(d);
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  const int m = std::min<int>(neighbors, static_cast<int>(samples.size()));
  Eigen::MatrixXd a(m, th.size());
  Eigen::VectorXd b(m);
  for (int k = 0; k < m; ++k) {
    const ScmSample& s = samples[order[static_cast<std::size_t>(k)]];
    a.row(k) = theta_values(s.mu).transpose();
    // allowance for the eigensolver's round-off
    b(k) = s.alpha - 1e-10 * std::abs(s.alpha);
  }
  const LpResult lp = solve_lp(th, a, b, box_lower, box_upper);
  if (lp.status != LpResult::Status::Optimal)
    throw StrategyError("coercivity: SCM linear program is infeasible");
  return lp.value;
}

namespace {

Eigen::VectorXd term_thetas(const AffineFormDecomposition& d, std::span<const double> mu) {
  return d.thetas(mu);
}

} // namespace

CoercivityModel min_theta_model(const TruthProblem& truth,
                                std::span<const std::vector<double>> checks) {
  const AffineFormDecomposition& dec = truth.constrained;
  CoercivityModel m;
  m.strategy = CoercivityStrategy::MinTheta;
  for (const auto& t : dec.terms)
    m.thetas.push_back(t.theta);
  m.theta_ref = term_thetas(dec, truth.parameters.mu_ref);
  auto require_positive = [&](const Eigen::VectorXd& th, std::span<const double> mu) {
    for (int q = 0; q < th.size(); ++q)
      if (!(th(q) > 0.0)) {
        std::ostringstream os;
        os << "coercivity: Theta^" << q + 1 << " = " << dec.terms[static_cast<std::size_t>(q)].theta.to_string()
           << " is not positive at mu = (";
        for (std::size_t i = 0; i < mu.size(); ++i)
          os << (i ? ", " : "") << mu[i];
        os << "); min-theta does not apply, use the SCM strategy";
        throw StrategyError(os.str());
      }
  };
  require_positive(m.theta_ref, truth.parameters.mu_ref);
  for (const auto& mu : checks)
    require_positive(term_thetas(dec, mu), mu);
  for (std::size_t q = 0; q < dec.terms.size(); ++q) {
    if (dec.terms[q].structurally_psd)
      continue;
    double lo = 0.0, hi = 0.0;
    try {
      lo = -generalized_eigenpair(-dec.terms[q].matrix, truth.x_gram, *truth.x_solver, Spectrum::Largest).value;
      hi = generalized_eigenpair(dec.terms[q].matrix, truth.x_gram, *truth.x_solver, Spectrum::Largest).value;
    } catch (const SolverError& e) {
      throw StrategyError(std::string("coercivity: could not verify that a term is semi-definite: ") + e.what());
    }
    if (lo < -1e-10 * std::max(std::abs(hi), 1.0)) {
      std::ostringstream os;
      os << "coercivity: term " << q + 1 << " (" << dec.terms[q].label
         << ") is indefinite; min-theta does not apply, use the SCM strategy";
      throw StrategyError(os.str());
    }
  }
  return m;
}

CoercivityModel scm_train(const TruthProblem& truth, std::span<const std::vector<double>> training,
                          const ScmOptions& options) {
  if (training.empty())
    throw DomainError("SCM: empty training set");
  const AffineFormDecomposition& dec = truth.constrained;
  const int q_count = dec.q();
  CoercivityModel m;
  m.strategy = CoercivityStrategy::Scm;
  m.neighbors = options.neighbors;
  m.epsilon = options.epsilon;
  for (const auto& t : dec.terms)
    m.thetas.push_back(t.theta);
  m.theta_ref = term_thetas(dec, truth.parameters.mu_ref);
  for (int i = 0; i < truth.parameters.size(); ++i) {
    const double w = truth.parameters.upper[static_cast<std::size_t>(i)] -
                     truth.parameters.lower[static_cast<std::size_t>(i)];
    m.distance_scale.push_back(w > 0 ? w : 1.0);
  }

  // Box bounds: Rayleigh quotient range of each term relative to X.
  bool all_psd = true;
  for (const auto& t : dec.terms)
    all_psd = all_psd && t.structurally_psd;
  const bool ref_bound = all_psd && m.theta_ref.minCoeff() > 0.0;
  m.box_lower.resize(q_count);
  m.box_upper.resize(q_count);
  for (int q = 0; q < q_count; ++q) {
    const SparseMatrix& aq = dec.terms[static_cast<std::size_t>(q)].matrix;
    double hi = std::numeric_limits<double>::infinity();
    try {
      const double ritz = generalized_eigenpair(aq, truth.x_gram, *truth.x_solver, Spectrum::Largest).value;
      hi = ritz + 1e-6 * std::abs(ritz) + 1e-12;
    } catch (const SolverError&) {
      if (!ref_bound)
        throw;
    }
    // theta_q(ref) y^T A^q y <= y^T X y when every term is semi-definite
    if (ref_bound)
      hi = std::min(hi, (1.0 + 1e-12) / m.theta_ref(q));
    double lo = 0.0;
    if (!dec.terms[static_cast<std::size_t>(q)].structurally_psd) {
      const double ritz = -generalized_eigenpair(-aq, truth.x_gram, *truth.x_solver, Spectrum::Largest).value;
      lo = ritz - 1e-6 * std::max(std::abs(ritz), std::abs(hi)) - 1e-12;
    }
    m.box_lower(q) = lo;
    m.box_upper(q) = hi;
  }

  auto add_sample = [&](const std::vector<double>& mu) {
    const EigenEstimate e = exact_coercivity_smallscale(dec, truth.x_gram, *truth.x_solver, mu);
    ScmSample s;
    s.mu = mu;
    s.alpha = e.value;
    s.theta.resize(q_count);
    for (int q = 0; q < q_count; ++q)
      s.theta(q) = e.vector.dot(dec.terms[static_cast<std::size_t>(q)].matrix * e.vector);
    m.samples.push_back(std::move(s));
  };

  // First sample: the training point closest to the centroid.
  const std::vector<double> centre = truth.parameters.centroid();
  std::size_t first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < training.size(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < centre.size(); ++k) {
      const double e = (training[i][k] - centre[k]) / m.distance_scale[k];
      d += e * e;
    }
    if (d < best) {
      best = d;
      first = i;
    }
  }
  std::vector<char> chosen(training.size(), 0);
  chosen[first] = 1;
  add_sample(training[first]);

  m.converged = false;
  while (true) {
    double worst = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < training.size(); ++i) {
      const double ub = m.upper_bound(training[i]);
      const double lb = m.lower_bound(training[i]);
      if (!(ub > 0.0))
        throw StrategyError("SCM: non-positive coercivity upper bound; the problem is not coercive");
      const double gap = (ub - lb) / ub;
      if (!chosen[i] && gap > worst) {
        worst = gap;
        arg = i;
      }
    }
    if (worst <= options.epsilon) {
      m.converged = true;
      break;
    }
    if (static_cast<int>(m.samples.size()) >= options.max_samples || worst < 0.0)
      break;
    chosen[arg] = 1;
    add_sample(training[arg]);
  }
  return m;
}

double error_estimator(double residual_norm, double alpha_lb, Estimator which) {
  if (!(alpha_lb > 0.0)) {
    std::ostringstream os;
    os << "estimator: coercivity lower bound " << alpha_lb << " is not positive";
    throw StrategyError(os.str());
  }
  switch (which) {
  case Estimator::Energy:
    return residual_norm / std::sqrt(alpha_lb);
  case Estimator::XNorm:
    return residual_norm / alpha_lb;
  case Estimator::Output:
    break;
  }
  return residual_norm * residual_norm / alpha_lb;
}

std::string to_string(Estimator e) {
  switch (e) {
  case Estimator::Energy:
    return "energy";
  case Estimator::XNorm:
    return "xnorm";
  case Estimator::Output:
    break;
  }
  return "output";
}

std::string to_string(CoercivityStrategy s) {
  return s == CoercivityStrategy::MinTheta ? "mintheta" : "scm";
}

} // namespace rbiga
