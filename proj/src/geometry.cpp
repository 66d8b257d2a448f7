#include "rbiga/geometry.hpp"

#include "rbiga/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace rbiga {

ParameterDomain::ParameterDomain(std::vector<double> lo, std::vector<double> hi,
                                 std::vector<double> ref)
    : lower(std::move(lo)), upper(std::move(hi)), mu_ref(std::move(ref)) {
  if (lower.size() != upper.size() || lower.size() != mu_ref.size())
    throw ConstructionError("parameter domain: bounds and mu_ref sizes differ");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i]))
      throw ConstructionError("parameter domain: lower bound above upper bound");
  if (!contains(mu_ref))
    throw ConstructionError("parameter domain: mu_ref outside the bounds");
}

bool ParameterDomain::contains(std::span<const double> mu) const {
  if (mu.size() != lower.size())
    return false;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!(mu[i] >= lower[i] && mu[i] <= upper[i]))
      return false;
  return true;
}

void ParameterDomain::check(std::span<const double> mu) const {
  if (mu.size() != lower.size()) {
    std::ostringstream os;
    os << "parameter has " << mu.size() << " components, expected " << lower.size();
    throw DomainError(os.str());
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= lower[i] && mu[i] <= upper[i])) {
      std::ostringstream os;
      os << "mu" << i + 1 << " = " << mu[i] << " outside [" << lower[i] << ", " << upper[i] << "]";
      throw DomainError(os.str());
    }
  }
}

std::vector<double> ParameterDomain::centroid() const {
  std::vector<double> c(lower.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = 0.5 * (lower[i] + upper[i]);
  return c;
}

FaceRef FaceRef::parse(int patch, const std::string& label) {
  if (label.size() != 2 || (label[1] != '0' && label[1] != '1'))
    throw ConstructionError("face label '" + label + "' must be one of u0,u1,v0,v1,w0,w1");
  int dir = -1;
  switch (label[0]) {
  case 'u':
    dir = 0;
    break;
  case 'v':
    dir = 1;
    break;
  case 'w':
    dir = 2;
    break;
  default:
    throw ConstructionError("face label '" + label + "' must be one of u0,u1,v0,v1,w0,w1");
  }
  return {patch, dir, label[1] - '0'};
}

std::string FaceRef::label() const {
  return std::string(1, "uvw"[direction]) + static_cast<char>('0' + side);
}

std::vector<int> face_local_indices(const NurbsPatch& patch, int direction, int side) {
  const auto shape = patch.shape();
  const int fixed = side == 0 ? 0 : shape[direction] - 1;
  std::vector<int> out;
  for (int k = 0; k < shape[2]; ++k)
    for (int j = 0; j < shape[1]; ++j)
      for (int i = 0; i < shape[0]; ++i) {
        const std::array<int, 3> ijk{i, j, k};
        if (ijk[direction] == fixed)
          out.push_back(patch.lattice_index(i, j, k));
      }
  return out;
}

int MultipatchDomain::owning_patch(int global_index) const {
  for (std::size_t k = 0; k < glue.size(); ++k)
    if (std::find(glue[k].begin(), glue[k].end(), global_index) != glue[k].end())
      return static_cast<int>(k);
  throw DomainError("owning_patch: unknown global index");
}

std::vector<int> MultipatchDomain::tagged_dofs(const std::string& tag) const {
  const auto it = boundary_tags.find(tag);
  if (it == boundary_tags.end())
    throw ConstructionError("unknown boundary tag '" + tag + "'");
  std::set<int> ids;
  for (const FaceRef& f : it->second) {
    const auto& patch = patches.at(static_cast<std::size_t>(f.patch));
    for (int local : face_local_indices(patch, f.direction, f.side))
      ids.insert(glue[static_cast<std::size_t>(f.patch)][static_cast<std::size_t>(local)]);
  }
  return {ids.begin(), ids.end()};
}

namespace {

// Global ids of every lower-dimensional boundary entity (faces, edges, vertices).
std::vector<std::set<int>> boundary_entities(const NurbsPatch& patch, const std::vector<int>& glue) {
  const int pd = patch.param_dim();
  const auto shape = patch.shape();
  int combos = 1;
  for (int d = 0; d < pd; ++d)
    combos *= 3;
  std::vector<std::set<int>> out;
  for (int c = 1; c < combos; ++c) {
    // digit 0: free, 1: low side, 2: high side
    std::array<int, 3> mode{0, 0, 0};
    int rest = c;
    for (int d = 0; d < pd; ++d) {
      mode[d] = rest % 3;
      rest /= 3;
    }
    std::set<int> ids;
    for (int k = 0; k < shape[2]; ++k)
      for (int j = 0; j < shape[1]; ++j)
        for (int i = 0; i < shape[0]; ++i) {
          const std::array<int, 3> ijk{i, j, k};
          bool on = true;
          for (int d = 0; d < pd && on; ++d) {
            if (mode[d] == 1)
              on = ijk[d] == 0;
            else if (mode[d] == 2)
              on = ijk[d] == shape[d] - 1;
          }
          if (on)
            ids.insert(glue[static_cast<std::size_t>(patch.lattice_index(i, j, k))]);
        }
    out.push_back(std::move(ids));
  }
  return out;
}

} // namespace

MultipatchDomain glue_patches(std::vector<NurbsPatch> patches, double tol) {
  if (patches.empty())
    throw ConstructionError("glue_patches: no patches");
  const int dim = patches.front().dim();
  for (const auto& p : patches)
    if (p.dim() != dim)
      throw StructuralError("glue_patches: patches live in different spatial dimensions");

  struct Entry {
    int patch;
    int local;
    Eigen::VectorXd x;
    double w;
  };
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const PointsAndWeights pw = weights_and_points_from_projective(patches[k]);
    for (int i = 0; i < patches[k].size(); ++i)
      entries.push_back({static_cast<int>(k), i, pw.points.row(i).transpose(), pw.weights[i]});
  }
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return entries[a].x[0] < entries[b].x[0]; });

  // Representative (lowest entry position) of every coincidence class.
  std::vector<std::size_t> rep(entries.size());
  std::iota(rep.begin(), rep.end(), 0);
  auto find = [&](std::size_t a) {
    while (rep[a] != a)
      a = rep[a] = rep[rep[a]];
    return a;
  };
  for (std::size_t s = 0; s < order.size(); ++s) {
    const Entry& ei = entries[order[s]];
    for (std::size_t t = s; t-- > 0;) {
      const Entry& ej = entries[order[t]];
      if (ei.x[0] - ej.x[0] > tol)
        break;
      if ((ei.x - ej.x).cwiseAbs().maxCoeff() <= tol) {
        if (std::abs(ei.w - ej.w) > tol * std::max(1.0, std::abs(ei.w))) {
          std::ostringstream os;
          os << "nonconforming interface between patches " << ej.patch << " and " << ei.patch
             << ": coincident control points carry different weights";
          throw StructuralError(os.str());
        }
        const std::size_t a = find(order[s]), b = find(order[t]);
        if (a != b)
          rep[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  MultipatchDomain dom;
  dom.tolerance = tol;
  dom.glue.resize(patches.size());
  std::vector<int> class_id(entries.size(), -1);
  std::size_t e = 0;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    dom.glue[k].resize(static_cast<std::size_t>(patches[k].size()));
    for (int i = 0; i < patches[k].size(); ++i, ++e) {
      const std::size_t r = find(e);
      if (class_id[r] < 0)
        class_id[r] = dom.dof_count++;
      dom.glue[k][static_cast<std::size_t>(i)] = class_id[r];
    }
  }

  // Shared points must form a complete boundary entity of both patches.
  std::vector<std::set<int>> ids(patches.size());
  for (std::size_t k = 0; k < patches.size(); ++k)
    ids[k] = {dom.glue[k].begin(), dom.glue[k].end()};
  for (std::size_t a = 0; a < patches.size(); ++a) {
    const auto ent_a = boundary_entities(patches[a], dom.glue[a]);
    for (std::size_t b = a + 1; b < patches.size(); ++b) {
      std::set<int> shared;
      std::set_intersection(ids[a].begin(), ids[a].end(), ids[b].begin(), ids[b].end(),
                            std::inserter(shared, shared.begin()));
      if (shared.empty())
        continue;
      const auto ent_b = boundary_entities(patches[b], dom.glue[b]);
      const bool in_a = std::find(ent_a.begin(), ent_a.end(), shared) != ent_a.end();
      const bool in_b = std::find(ent_b.begin(), ent_b.end(), shared) != ent_b.end();
      if (!in_a || !in_b) {
        std::ostringstream os;
        os << "nonconforming interface between patches " << a << " and " << b << " ("
           << shared.size() << " shared control points do not form a matching face)";
        throw StructuralError(os.str());
      }
    }
  }
  dom.patches = std::move(patches);
  return dom;
}

PatchMap PatchMap::identity(int dim) {
  PatchMap m;
  m.offset.assign(static_cast<std::size_t>(dim), ScalarExpression(0.0));
  m.linear.assign(static_cast<std::size_t>(dim * dim), ScalarExpression(0.0));
  for (int i = 0; i < dim; ++i)
    m.linear[static_cast<std::size_t>(i * dim + i)] = ScalarExpression(1.0);
  return m;
}

AffineParamMap AffineParamMap::identity(int patch_count, int dim) {
  AffineParamMap m;
  m.patches.assign(static_cast<std::size_t>(patch_count), PatchMap::identity(dim));
  return m;
}

int AffineParamMap::max_parameter_index() const {
  int m = -1;
  for (const auto& p : patches) {
    for (const auto& e : p.offset)
      m = std::max(m, e.max_parameter_index());
    for (const auto& e : p.linear)
      m = std::max(m, e.max_parameter_index());
  }
  return m;
}

MapValues evaluate_map(const AffineParamMap& map, int patch, std::span<const double> mu) {
  const PatchMap& pm = map.patches.at(static_cast<std::size_t>(patch));
  const int d = pm.dim();
  MapValues v;
  v.offset.resize(d);
  v.linear.resize(d, d);
  for (int i = 0; i < d; ++i) {
    v.offset[i] = pm.offset[static_cast<std::size_t>(i)].evaluate(mu);
    for (int j = 0; j < d; ++j)
      v.linear(i, j) = pm.g(i, j).evaluate(mu);
  }
  const double det = v.linear.determinant();
  if (!(std::abs(det) > 1e-14)) {
    std::ostringstream os;
    os << "affine map of patch " << patch << " is singular (det G = " << det << ")";
    throw SingularMapError(os.str());
  }
  v.jacobian = std::abs(det);
  v.inverse = v.linear.inverse();
  return v;
}

MultipatchDomain transform_control_points(const MultipatchDomain& domain, const AffineParamMap& map,
                                          std::span<const double> mu) {
  MultipatchDomain out = domain;
  for (std::size_t k = 0; k < out.patches.size(); ++k) {
    const MapValues v = evaluate_map(map, static_cast<int>(k), mu);
    out.patches[k] = apply_affine(domain.patches[k], v.offset, v.linear);
  }
  return out;
}

ContinuityReport check_interface_continuity(const MultipatchDomain& domain,
                                            const AffineParamMap& map,
                                            std::span<const std::vector<double>> mu_samples,
                                            double tol) {
  ContinuityReport report;
  // For every global point, the patches that share it and one local copy.
  std::vector<std::vector<std::pair<int, int>>> owners(static_cast<std::size_t>(domain.dof_count));
  for (std::size_t k = 0; k < domain.glue.size(); ++k)
    for (std::size_t i = 0; i < domain.glue[k].size(); ++i) {
      auto& o = owners[static_cast<std::size_t>(domain.glue[k][i])];
      if (o.empty() || o.back().first != static_cast<int>(k))
        o.emplace_back(static_cast<int>(k), static_cast<int>(i));
    }
  std::vector<Eigen::MatrixXd> pts;
  for (const auto& p : domain.patches)
    pts.push_back(p.points());

  for (std::size_t s = 0; s < mu_samples.size(); ++s) {
    std::vector<MapValues> maps;
    for (std::size_t k = 0; k < domain.patches.size(); ++k)
      maps.push_back(evaluate_map(map, static_cast<int>(k), mu_samples[s]));
    for (std::size_t g = 0; g < owners.size(); ++g) {
      const auto& o = owners[g];
      for (std::size_t a = 0; a < o.size(); ++a)
        for (std::size_t b = a + 1; b < o.size(); ++b) {
          const auto& ma = maps[static_cast<std::size_t>(o[a].first)];
          const auto& mb = maps[static_cast<std::size_t>(o[b].first)];
          const Eigen::VectorXd xa = pts[static_cast<std::size_t>(o[a].first)].row(o[a].second).transpose();
          const Eigen::VectorXd xb = pts[static_cast<std::size_t>(o[b].first)].row(o[b].second).transpose();
          const double dev = ((ma.offset + ma.linear * xa) - (mb.offset + mb.linear * xb)).norm();
          if (dev > tol)
            report.violations.push_back(
                {o[a].first, o[b].first, static_cast<int>(g), static_cast<int>(s), dev});
        }
    }
  }
  return report;
}

} // namespace rbiga
