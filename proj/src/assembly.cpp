#include "rbiga/assembly.hpp"

#include "rbiga/errors.hpp"
#include "rbiga/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rbiga {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

ScalarExpression det_expression(const PatchMap& m) {
  const int d = m.dim();
  if (d == 1)
    return m.g(0, 0);
  if (d == 2)
    return m.g(0, 0) * m.g(1, 1) - m.g(0, 1) * m.g(1, 0);
  return m.g(0, 0) * (m.g(1, 1) * m.g(2, 2) - m.g(1, 2) * m.g(2, 1)) -
         m.g(0, 1) * (m.g(1, 0) * m.g(2, 2) - m.g(1, 2) * m.g(2, 0)) +
         m.g(0, 2) * (m.g(1, 0) * m.g(2, 1) - m.g(1, 1) * m.g(2, 0));
}

/// adj(G)(r, c), the transposed cofactor matrix.
ScalarExpression adjugate_entry(const PatchMap& m, int r, int c) {
  const int d = m.dim();
  if (d == 1)
    return ScalarExpression(1.0);
  if (d == 2) {
    if (r == 0 && c == 0)
      return m.g(1, 1);
    if (r == 1 && c == 1)
      return m.g(0, 0);
    return -m.g(r, c);
  }
  // cofactor C(c, r) of G
  int rows[2], cols[2];
  for (int i = 0, n = 0; i < 3; ++i)
    if (i != c)
      rows[n++] = i;
  for (int j = 0, n = 0; j < 3; ++j)
    if (j != r)
      cols[n++] = j;
  ScalarExpression minor = m.g(rows[0], cols[0]) * m.g(rows[1], cols[1]) -
                           m.g(rows[0], cols[1]) * m.g(rows[1], cols[0]);
  return ((r + c) % 2 == 0) ? minor : -minor;
}

std::vector<std::vector<double>> sample_parameters(const ParameterDomain& params, int count) {
  std::mt19937_64 rng(20240611);
  std::vector<std::vector<double>> out;
  for (int s = 0; s < count; ++s) {
    std::vector<double> mu(static_cast<std::size_t>(params.size()));
    for (int i = 0; i < params.size(); ++i) {
      std::uniform_real_distribution<double> u(params.lower[static_cast<std::size_t>(i)],
                                               params.upper[static_cast<std::size_t>(i)]);
      mu[static_cast<std::size_t>(i)] = u(rng);
    }
    out.push_back(std::move(mu));
  }
  return out;
}

/// Basis data at one quadrature point, gradients with respect to the
/// physical coordinates of the patch's own geometry.
struct PointData {
  Eigen::VectorXd values;
  Eigen::MatrixXd gradients; ///< nloc x d
  Eigen::VectorXd x;
  double weight = 0.0;
};

struct ElementData {
  std::vector<int> local; ///< lattice indices
  std::vector<PointData> points;
};

template <class F>
void for_each_element(const NurbsPatch& patch, F&& fn) {
  const Eigen::MatrixXd cps = patch.points();
  const int d = patch.dim();
  const auto elements = build_quadrature(patch);
  ElementData data;
  for (const auto& el : elements) {
    data.local.clear();
    data.points.clear();
    for (std::size_t q = 0; q < el.points.size(); ++q) {
      const std::span<const double> xi(el.points[q].data(),
                                       static_cast<std::size_t>(patch.param_dim()));
      const NurbsBasisValues b = eval_nurbs_basis(patch, xi, true);
      if (data.local.empty())
        data.local = b.indices;
      Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, patch.param_dim());
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      for (std::size_t a = 0; a < b.indices.size(); ++a) {
        const auto row = cps.row(b.indices[a]);
        jac += row.transpose() * b.gradients.row(static_cast<Eigen::Index>(a));
        x += b.values(static_cast<Eigen::Index>(a)) * row.transpose();
      }
      const double det = jac.determinant();
      if (std::abs(det) < 1e-14)
        throw SingularMapError("singular geometry Jacobian at a quadrature point");
      PointData pd;
      pd.values = b.values;
      pd.gradients = b.gradients * jac.inverse();
      pd.x = std::move(x);
      pd.weight = el.weights[q] * std::abs(det);
      data.points.push_back(std::move(pd));
    }
    fn(data);
  }
}

struct FacePoint {
  Eigen::VectorXd values;
  Eigen::VectorXd x;
  Eigen::VectorXd normal; ///< unit normal of the face in the patch's geometry
  double weight = 0.0;    ///< surface measure included
};

struct FaceElement {
  std::vector<int> local;
  std::vector<FacePoint> points;
};

template <class F>
void for_each_face_element(const NurbsPatch& patch, int direction, int side, F&& fn) {
  const int pd = patch.param_dim();
  const int d = patch.dim();
  if (pd != d || d < 2)
    throw UnsupportedError("boundary integrals need a full-dimensional patch of dimension 2 or 3");
  std::vector<int> dirs;
  for (int i = 0; i < pd; ++i)
    if (i != direction)
      dirs.push_back(i);
  std::vector<std::vector<double>> bps;
  std::vector<GaussRule> rules;
  for (int i : dirs) {
    bps.push_back(patch.knots(i).breakpoints());
    rules.push_back(gauss_legendre(patch.knots(i).degree() + 1));
  }
  const Eigen::MatrixXd cps = patch.points();
  const int e0 = static_cast<int>(bps[0].size()) - 1;
  const int e1 = dirs.size() > 1 ? static_cast<int>(bps[1].size()) - 1 : 1;
  const int n0 = static_cast<int>(rules[0].points.size());
  const int n1 = dirs.size() > 1 ? static_cast<int>(rules[1].points.size()) : 1;
  FaceElement fe;
  for (int b = 0; b < e1; ++b)
    for (int a = 0; a < e0; ++a) {
      fe.local.clear();
      fe.points.clear();
      for (int qb = 0; qb < n1; ++qb)
        for (int qa = 0; qa < n0; ++qa) {
          std::array<double, 3> xi{0, 0, 0};
          xi[static_cast<std::size_t>(direction)] = side;
          const double h0 = bps[0][static_cast<std::size_t>(a + 1)] - bps[0][static_cast<std::size_t>(a)];
          xi[static_cast<std::size_t>(dirs[0])] =
              bps[0][static_cast<std::size_t>(a)] + h0 * rules[0].points[static_cast<std::size_t>(qa)];
          double w = h0 * rules[0].weights[static_cast<std::size_t>(qa)];
          if (dirs.size() > 1) {
            const double h1 =
                bps[1][static_cast<std::size_t>(b + 1)] - bps[1][static_cast<std::size_t>(b)];
            xi[static_cast<std::size_t>(dirs[1])] =
                bps[1][static_cast<std::size_t>(b)] + h1 * rules[1].points[static_cast<std::size_t>(qb)];
            w *= h1 * rules[1].weights[static_cast<std::size_t>(qb)];
          }
          const NurbsBasisValues bv =
              eval_nurbs_basis(patch, std::span<const double>(xi.data(), static_cast<std::size_t>(pd)), true);
          if (fe.local.empty())
            fe.local = bv.indices;
          Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, pd);
          Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
          for (std::size_t i = 0; i < bv.indices.size(); ++i) {
            const auto row = cps.row(bv.indices[i]);
            jac += row.transpose() * bv.gradients.row(static_cast<Eigen::Index>(i));
            x += bv.values(static_cast<Eigen::Index>(i)) * row.transpose();
          }
          Eigen::VectorXd n(d);
          if (d == 2) {
            const Eigen::Vector2d t = jac.col(dirs[0]);
            n << t(1), -t(0);
          } else {
            const Eigen::Vector3d t0 = jac.col(dirs[0]);
            const Eigen::Vector3d t1 = jac.col(dirs[1]);
            n = t0.cross(t1);
          }
          const double ds = n.norm();
          FacePoint fp;
          fp.values = bv.values;
          fp.x = std::move(x);
          fp.normal = ds > 0 ? Eigen::VectorXd(n / ds) : n;
          fp.weight = w * ds;
          fe.points.push_back(std::move(fp));
        }
      fn(fe);
    }
}

Eigen::MatrixXd numeric_coefficient(const PatchProblem& pp, int d, std::span<const double> mu) {
  Eigen::MatrixXd a(d + 1, d + 1);
  for (int r = 0; r <= d; ++r)
    for (int c = 0; c <= d; ++c)
      a(r, c) = pp.a(r, c, d).evaluate(mu);
  return a;
}

double source_weight(const PatchProblem& pp, const ProblemDefinition& problem,
                     const Eigen::VectorXd& x_ref) {
  if (pp.source_region && !pp.source_region->contains(x_ref))
    return 0.0;
  return problem.spatial_source ? problem.spatial_source(x_ref) : 1.0;
}

SparseMatrix from_triplets(int n, const Triplets& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

bool same_samples(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(std::abs(a[i]), std::abs(b[i])))
      return false;
  return true;
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

const std::vector<FaceRef>& tag_faces(const MultipatchDomain& domain, const std::string& tag) {
  const auto it = domain.boundary_tags.find(tag);
  if (it == domain.boundary_tags.end())
    throw ConstructionError("boundary condition on unknown tag '" + tag + "'");
  return it->second;
}

} // namespace

ParametricCoefficient build_parametric_coefficient(const AffineParamMap& map,
                                                   const ProblemDefinition& problem, int patch) {
  const PatchMap& m = map.patches.at(static_cast<std::size_t>(patch));
  const PatchProblem& pp = problem.patches.at(static_cast<std::size_t>(patch));
  const int d = m.dim();
  const ScalarExpression det = det_expression(m);
  ParametricCoefficient out;
  out.jacobian = abs(det);
  out.inverse.resize(static_cast<std::size_t>(d * d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      out.inverse[static_cast<std::size_t>(r * d + c)] =
          det.is_constant() && det.constant_value() == 1.0 ? adjugate_entry(m, r, c)
                                                           : adjugate_entry(m, r, c) / det;

  // Block matrix diag(D, 1).
  auto gblock = [&](int r, int c) -> ScalarExpression {
    if (r < d && c < d)
      return out.inverse[static_cast<std::size_t>(r * d + c)];
    return ScalarExpression(r == c ? 1.0 : 0.0);
  };
  const int n = d + 1;
  std::vector<ScalarExpression> left(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      ScalarExpression s(0.0);
      for (int l = 0; l < n; ++l)
        s = s + gblock(r, l) * pp.a(l, c, d);
      left[static_cast<std::size_t>(r * n + c)] = s;
    }
  out.matrix.resize(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      ScalarExpression s(0.0);
      for (int l = 0; l < n; ++l)
        s = s + left[static_cast<std::size_t>(r * n + l)] * gblock(c, l);
      out.matrix[static_cast<std::size_t>(r * n + c)] = out.jacobian * s;
    }
  out.source = out.jacobian * pp.source;
  return out;
}

Eigen::VectorXd AffineFormDecomposition::thetas(std::span<const double> mu) const {
  Eigen::VectorXd t(q());
  for (int i = 0; i < q(); ++i)
    t(i) = terms[static_cast<std::size_t>(i)].theta.evaluate(mu);
  return t;
}

Eigen::VectorXd AffineFormDecomposition::rhs_thetas(std::span<const double> mu) const {
  Eigen::VectorXd t(q_f());
  for (int i = 0; i < q_f(); ++i)
    t(i) = rhs_terms[static_cast<std::size_t>(i)].theta.evaluate(mu);
  return t;
}

SparseMatrix AffineFormDecomposition::matrix(std::span<const double> mu) const {
  const Eigen::VectorXd t = thetas(mu);
  SparseMatrix a(size(), size());
  for (int i = 0; i < q(); ++i)
    a += t(i) * terms[static_cast<std::size_t>(i)].matrix;
  return a;
}

Eigen::VectorXd AffineFormDecomposition::rhs(std::span<const double> mu) const {
  const Eigen::VectorXd t = rhs_thetas(mu);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(size());
  for (int i = 0; i < q_f(); ++i)
    f += t(i) * rhs_terms[static_cast<std::size_t>(i)].vector;
  return f;
}

AffineFormDecomposition assemble_affine_decomposition(const MultipatchDomain& domain,
                                                      const AffineParamMap& map,
                                                      const ProblemDefinition& problem,
                                                      const ParameterDomain& params) {
  const int d = domain.dim();
  const int n = domain.dof_count;
  const int nc = d + 1;
  if (map.patches.size() != domain.patches.size() || problem.patches.size() != domain.patches.size())
    throw ConstructionError("geometry, map and problem disagree on the number of patches");
  const auto samples = sample_parameters(params, 16);

  struct Candidate {
    ScalarExpression theta;
    std::vector<double> values;
    std::string label;
    bool psd = true;
  };
  std::vector<Candidate> mat_cands;
  std::vector<SparseMatrix> mat_blocks;
  std::vector<Candidate> rhs_cands;
  std::vector<Eigen::VectorXd> rhs_blocks;

  auto sample_values = [&](const ScalarExpression& e) {
    std::vector<double> v;
    for (const auto& mu : samples)
      v.push_back(e.evaluate(mu));
    return v;
  };

  for (std::size_t k = 0; k < domain.patches.size(); ++k) {
    const NurbsPatch& patch = domain.patches[k];
    const auto& glue = domain.glue[k];
    const PatchProblem& pp = problem.patches[k];
    const ParametricCoefficient coeff = build_parametric_coefficient(map, problem, static_cast<int>(k));

    struct Entry {
      int i, j;
      Triplets triplets;
    };
    std::vector<Entry> entries;
    std::vector<std::vector<double>> entry_values;
    for (int i = 0; i < nc; ++i)
      for (int j = i; j < nc; ++j) {
        const ScalarExpression& e = coeff.matrix[static_cast<std::size_t>(i * nc + j)];
        if (e.is_zero())
          continue;
        auto v = sample_values(e);
        if (all_zero(v))
          continue;
        entries.push_back({i, j, {}});
        entry_values.push_back(std::move(v));
      }
    const bool has_source = !coeff.source.is_zero();
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n);

    for_each_element(patch, [&](const ElementData& el) {
      const int nl = static_cast<int>(el.local.size());
      std::vector<Eigen::MatrixXd> local(entries.size(), Eigen::MatrixXd::Zero(nl, nl));
      Eigen::MatrixXd phi(nl, nc);
      for (const PointData& p : el.points) {
        phi.leftCols(d) = p.gradients;
        phi.col(d) = p.values;
        for (std::size_t e = 0; e < entries.size(); ++e) {
          const int i = entries[e].i, j = entries[e].j;
          if (i == j) {
            local[e].noalias() += p.weight * phi.col(i) * phi.col(i).transpose();
          } else {
            const Eigen::MatrixXd outer = phi.col(i) * phi.col(j).transpose();
            local[e].noalias() += p.weight * (outer + outer.transpose());
          }
        }
        if (has_source) {
          const double s = source_weight(pp, problem, p.x);
          if (s != 0.0)
            for (int a = 0; a < nl; ++a)
              load(glue[static_cast<std::size_t>(el.local[static_cast<std::size_t>(a)])]) +=
                  p.weight * s * p.values(a);
        }
      }
      for (std::size_t e = 0; e < entries.size(); ++e)
        for (int a = 0; a < nl; ++a)
          for (int b = 0; b < nl; ++b)
            entries[e].triplets.emplace_back(
                glue[static_cast<std::size_t>(el.local[static_cast<std::size_t>(a)])],
                glue[static_cast<std::size_t>(el.local[static_cast<std::size_t>(b)])],
                local[e](a, b));
    });

    for (std::size_t e = 0; e < entries.size(); ++e) {
      std::ostringstream label;
      label << "patch " << k << " (" << entries[e].i << "," << entries[e].j << ")";
      mat_cands.push_back({coeff.matrix[static_cast<std::size_t>(entries[e].i * nc + entries[e].j)],
                           entry_values[e], label.str(), entries[e].i == entries[e].j});
      mat_blocks.push_back(from_triplets(n, entries[e].triplets));
    }
    if (has_source) {
      auto v = sample_values(coeff.source);
      if (!all_zero(v)) {
        std::ostringstream label;
        label << "source patch " << k;
        rhs_cands.push_back({coeff.source, std::move(v), label.str(), true});
        rhs_blocks.push_back(std::move(load));
      }
    }
  }

  // Neumann data: h J |D^T n| per face, n the reference unit normal.
  for (const auto& [tag, bc] : problem.boundary) {
    if (bc.kind != BoundaryCondition::Kind::Neumann || bc.value == 0.0)
      continue;
    for (const FaceRef& f : tag_faces(domain, tag)) {
      const NurbsPatch& patch = domain.patches[static_cast<std::size_t>(f.patch)];
      const auto& glue = domain.glue[static_cast<std::size_t>(f.patch)];
      const ParametricCoefficient coeff =
          build_parametric_coefficient(map, problem, f.patch);
      Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
      std::vector<Eigen::VectorXd> normals;
      for_each_face_element(patch, f.direction, f.side, [&](const FaceElement& fe) {
        for (const FacePoint& p : fe.points) {
          normals.push_back(p.normal);
          for (std::size_t a = 0; a < fe.local.size(); ++a)
            load(glue[static_cast<std::size_t>(fe.local[a])]) +=
                p.weight * p.values(static_cast<Eigen::Index>(a));
        }
      });
      const Eigen::VectorXd n0 = normals.front();
      ScalarExpression norm2(0.0);
      for (int i = 0; i < d; ++i) {
        ScalarExpression comp(0.0);
        for (int j = 0; j < d; ++j)
          if (n0(j) != 0.0)
            comp = comp + coeff.inverse[static_cast<std::size_t>(j * d + i)] * ScalarExpression(n0(j));
        norm2 = norm2 + comp * comp;
      }
      const ScalarExpression theta = ScalarExpression(bc.value) * coeff.jacobian * sqrt(norm2);
      // The factor must not vary along the face.
      const std::size_t stride = std::max<std::size_t>(1, normals.size() / 16);
      for (const auto& mu : samples) {
        const MapValues mv = evaluate_map(map, f.patch, mu);
        const double ref = (mv.inverse.transpose() * n0).norm();
        for (std::size_t s = 0; s < normals.size(); s += stride) {
          const double val = (mv.inverse.transpose() * normals[s]).norm();
          if (std::abs(val - ref) > 1e-10 * ref) {
            std::ostringstream os;
            os << "Neumann data on face " << f.label() << " of patch " << f.patch
               << ": curved face under a non-conformal parametrized map has no affine decomposition";
            throw UnsupportedError(os.str());
          }
        }
      }
      std::ostringstream label;
      label << "neumann " << tag << " patch " << f.patch << " " << f.label();
      rhs_cands.push_back({theta, sample_values(theta), label.str(), true});
      rhs_blocks.push_back(std::move(load));
    }
  }

  AffineFormDecomposition out;
  std::vector<std::vector<double>> group_values;
  for (std::size_t c = 0; c < mat_cands.size(); ++c) {
    std::size_t g = 0;
    for (; g < out.terms.size(); ++g)
      if (same_samples(group_values[g], mat_cands[c].values))
        break;
    if (g == out.terms.size()) {
      out.terms.push_back({mat_cands[c].theta, mat_blocks[c], mat_cands[c].label, mat_cands[c].psd});
      group_values.push_back(mat_cands[c].values);
    } else {
      AffineTerm& t = out.terms[g];
      t.matrix += mat_blocks[c];
      t.label += " + " + mat_cands[c].label;
      t.structurally_psd = t.structurally_psd && mat_cands[c].psd;
    }
  }
  group_values.clear();
  for (std::size_t c = 0; c < rhs_cands.size(); ++c) {
    std::size_t g = 0;
    for (; g < out.rhs_terms.size(); ++g)
      if (same_samples(group_values[g], rhs_cands[c].values))
        break;
    if (g == out.rhs_terms.size()) {
      out.rhs_terms.push_back({rhs_cands[c].theta, rhs_blocks[c], rhs_cands[c].label});
      group_values.push_back(rhs_cands[c].values);
    } else {
      out.rhs_terms[g].vector += rhs_blocks[c];
      out.rhs_terms[g].label += " + " + rhs_cands[c].label;
    }
  }
  if (out.terms.empty())
    out.terms.push_back({ScalarExpression(0.0), SparseMatrix(n, n), "empty", true});
  return out;
}

SparseMatrix assemble_direct_matrix(const MultipatchDomain& domain, const AffineParamMap& map,
                                    const ProblemDefinition& problem, std::span<const double> mu) {
  const int d = domain.dim();
  const MultipatchDomain deformed = transform_control_points(domain, map, mu);
  Triplets triplets;
  for (std::size_t k = 0; k < deformed.patches.size(); ++k) {
    const auto& glue = domain.glue[k];
    const Eigen::MatrixXd ao = numeric_coefficient(problem.patches[k], d, mu);
    for_each_element(deformed.patches[k], [&](const ElementData& el) {
      const int nl = static_cast<int>(el.local.size());
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nl, nl);
      Eigen::MatrixXd phi(nl, d + 1);
      for (const PointData& p : el.points) {
        phi.leftCols(d) = p.gradients;
        phi.col(d) = p.values;
        local.noalias() += p.weight * phi * ao * phi.transpose();
      }
      for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b)
          triplets.emplace_back(glue[static_cast<std::size_t>(el.local[static_cast<std::size_t>(a)])],
                                glue[static_cast<std::size_t>(el.local[static_cast<std::size_t>(b)])],
                                local(a, b));
    });
  }
  return from_triplets(domain.dof_count, triplets);
}

Eigen::VectorXd assemble_direct_rhs(const MultipatchDomain& domain, const AffineParamMap& map,
                                    const ProblemDefinition& problem, std::span<const double> mu) {
  const MultipatchDomain deformed = transform_control_points(domain, map, mu);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(domain.dof_count);
  for (std::size_t k = 0; k < deformed.patches.size(); ++k) {
    const PatchProblem& pp = problem.patches[k];
    const double fo = pp.source.evaluate(mu);
    if (fo == 0.0)
      continue;
    const auto& glue = domain.glue[k];
    const MapValues mv = evaluate_map(map, static_cast<int>(k), mu);
    for_each_element(deformed.patches[k], [&](const ElementData& el) {
      for (const PointData& p : el.points) {
        const Eigen::VectorXd x_ref = mv.inverse * (p.x - mv.offset);
        const double s = source_weight(pp, problem, x_ref);
        if (s == 0.0)
          continue;
        for (std::size_t a = 0; a < el.local.size(); ++a)
          f(glue[static_cast<std::size_t>(el.local[a])]) +=
              p.weight * fo * s * p.values(static_cast<Eigen::Index>(a));
      }
    });
  }
  for (const auto& [tag, bc] : problem.boundary) {
    if (bc.kind != BoundaryCondition::Kind::Neumann || bc.value == 0.0)
      continue;
    for (const FaceRef& fr : tag_faces(domain, tag)) {
      const auto& glue = domain.glue[static_cast<std::size_t>(fr.patch)];
      for_each_face_element(deformed.patches[static_cast<std::size_t>(fr.patch)], fr.direction,
                            fr.side, [&](const FaceElement& fe) {
                              for (const FacePoint& p : fe.points)
                                for (std::size_t a = 0; a < fe.local.size(); ++a)
                                  f(glue[static_cast<std::size_t>(fe.local[a])]) +=
                                      bc.value * p.weight * p.values(static_cast<Eigen::Index>(a));
                            });
    }
  }
  return f;
}

TruthSpace TruthSpace::build(const MultipatchDomain& domain, const ProblemDefinition& problem) {
  TruthSpace s;
  s.dof_count = domain.dof_count;
  s.dirichlet_mask.assign(static_cast<std::size_t>(s.dof_count), 0);
  for (const auto& [tag, bc] : problem.boundary) {
    if (bc.kind != BoundaryCondition::Kind::Dirichlet)
      continue;
    tag_faces(domain, tag);
    for (int g : domain.tagged_dofs(tag))
      s.dirichlet_mask[static_cast<std::size_t>(g)] = 1;
  }
  s.free_index.assign(static_cast<std::size_t>(s.dof_count), -1);
  for (int g = 0; g < s.dof_count; ++g)
    if (!s.dirichlet_mask[static_cast<std::size_t>(g)]) {
      s.free_index[static_cast<std::size_t>(g)] = static_cast<int>(s.free_dofs.size());
      s.free_dofs.push_back(g);
    }
  return s;
}

Eigen::VectorXd TruthSpace::expand(const Eigen::VectorXd& free) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dof_count);
  for (int i = 0; i < free_count(); ++i)
    full(free_dofs[static_cast<std::size_t>(i)]) = free(i);
  return full;
}

Eigen::VectorXd TruthSpace::restrict(const Eigen::VectorXd& full) const {
  Eigen::VectorXd free(free_count());
  for (int i = 0; i < free_count(); ++i)
    free(i) = full(free_dofs[static_cast<std::size_t>(i)]);
  return free;
}

AffineFormDecomposition apply_dirichlet(const TruthSpace& space,
                                        const AffineFormDecomposition& decomposition,
                                        const ProblemDefinition& problem) {
  for (const auto& [tag, bc] : problem.boundary)
    if (bc.kind == BoundaryCondition::Kind::Dirichlet && bc.value != 0.0)
      throw UnsupportedError("nonhomogeneous Dirichlet data on '" + tag +
                             "' is not supported (only g = 0)");
  SparseMatrix p(space.free_count(), space.dof_count);
  {
    Triplets t;
    for (int i = 0; i < space.free_count(); ++i)
      t.emplace_back(i, space.free_dofs[static_cast<std::size_t>(i)], 1.0);
    p.setFromTriplets(t.begin(), t.end());
  }
  const SparseMatrix pt = p.transpose();
  AffineFormDecomposition out;
  for (const auto& term : decomposition.terms) {
    SparseMatrix m = p * term.matrix * pt;
    m.makeCompressed();
    out.terms.push_back({term.theta, std::move(m), term.label, term.structurally_psd});
  }
  for (const auto& term : decomposition.rhs_terms)
    out.rhs_terms.push_back({term.theta, space.restrict(term.vector), term.label});
  return out;
}

void SpdSolver::compute(const SparseMatrix& a) {
  a_ = a;
  llt_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
  llt_->compute(a_);
  factorized_ = llt_->info() == Eigen::Success;
  if (factorized_ && a_.rows() > 0) {
    const Eigen::VectorXd piv = llt_->matrixL().nestedExpression().diagonal().cwiseAbs2();
    if (!(piv.minCoeff() > 1e-14 * piv.maxCoeff()))
      factorized_ = false;
  }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  if (!llt_)
    throw SolverError("solver used before factorization");
  const double bnorm = b.norm();
  if (bnorm == 0.0)
    return Eigen::VectorXd::Zero(b.size());
  if (factorized_) {
    Eigen::VectorXd x = llt_->solve(b);
    if ((a_ * x - b).norm() <= 1e-10 * bnorm)
      return x;
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * a_.rows()));
  cg.compute(a_);
  Eigen::VectorXd x = cg.solve(b);
  const double rel = (a_ * x - b).norm() / bnorm;
  if (cg.info() != Eigen::Success || !(rel <= 1e-10)) {
    std::ostringstream os;
    os << "linear solve failed: Cholesky " << (factorized_ ? "succeeded" : "failed (matrix singular or indefinite)")
       << ", CG stopped after " << cg.iterations() << " iterations with relative residual " << rel;
    throw SolverError(os.str());
  }
  return x;
}

Eigen::VectorXd truth_solve(const AffineFormDecomposition& constrained, std::span<const double> mu) {
  const SpdSolver solver(constrained.matrix(mu));
  return solver.solve(constrained.rhs(mu));
}

double evaluate_output(const AffineFormDecomposition& constrained, std::span<const double> mu,
                       const Eigen::VectorXd& u) {
  return constrained.rhs(mu).dot(u);
}

SparseMatrix build_x_gram(const AffineFormDecomposition& constrained,
                          std::span<const double> mu_ref) {
  SparseMatrix x = constrained.matrix(mu_ref);
  x.makeCompressed();
  const SpdSolver check(x);
  if (!check.factorized())
    throw SolverError("inner product matrix at the reference parameter is not positive definite");
  return x;
}

double evaluate_field(const MultipatchDomain& domain, const Eigen::VectorXd& u, int patch,
                      std::span<const double> x) {
  const auto& glue = domain.glue.at(static_cast<std::size_t>(patch));
  const NurbsBasisValues b = eval_nurbs_basis(domain.patches[static_cast<std::size_t>(patch)], x);
  double v = 0.0;
  for (std::size_t a = 0; a < b.indices.size(); ++a)
    v += b.values(static_cast<Eigen::Index>(a)) * u(glue[static_cast<std::size_t>(b.indices[a])]);
  return v;
}

TruthProblem TruthProblem::build(MultipatchDomain domain, AffineParamMap map,
                                 ProblemDefinition problem, ParameterDomain parameters) {
  TruthProblem t;
  if (map.patches.size() != domain.patches.size())
    throw ConstructionError("map defines " + std::to_string(map.patches.size()) +
                            " patch transformations, geometry has " +
                            std::to_string(domain.patches.size()) + " patches");
  if (map.max_parameter_index() >= parameters.size())
    throw ConstructionError("geometry map uses mu" + std::to_string(map.max_parameter_index() + 1) +
                            " but only " + std::to_string(parameters.size()) +
                            " parameters are declared");
  const auto samples = sample_parameters(parameters, 16);
  problem.validate(domain, parameters, samples);
  t.domain = std::move(domain);
  t.map = std::move(map);
  t.problem = std::move(problem);
  t.parameters = std::move(parameters);
  t.full = assemble_affine_decomposition(t.domain, t.map, t.problem, t.parameters);
  t.space = TruthSpace::build(t.domain, t.problem);
  t.constrained = apply_dirichlet(t.space, t.full, t.problem);
  t.x_gram = build_x_gram(t.constrained, t.parameters.mu_ref);
  t.x_solver = std::make_shared<SpdSolver>(t.x_gram);
  return t;
}

double TruthProblem::energy_norm(const Eigen::VectorXd& v, std::span<const double> mu) const {
  return std::sqrt(std::max(0.0, v.dot(constrained.matrix(mu) * v)));
}

} // namespace rbiga
