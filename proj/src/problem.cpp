#include "rbiga/problem.hpp"

#include "rbiga/errors.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace rbiga {

PatchProblem PatchProblem::diffusion(int dim, const ScalarExpression& conductivity) {
  PatchProblem p;
  p.coefficient.assign(static_cast<std::size_t>((dim + 1) * (dim + 1)), ScalarExpression(0.0));
  for (int i = 0; i < dim; ++i)
    p.coefficient[static_cast<std::size_t>(i * (dim + 1) + i)] = conductivity;
  return p;
}

void ProblemDefinition::validate(const MultipatchDomain& domain, const ParameterDomain& params,
                                 std::span<const std::vector<double>> samples) const {
  const int d = domain.dim();
  if (patches.size() != domain.patches.size()) {
    std::ostringstream os;
    os << "problem defines " << patches.size() << " patches, geometry has "
       << domain.patches.size();
    throw ConstructionError(os.str());
  }
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& pp = patches[k];
    if (pp.coefficient.size() != static_cast<std::size_t>((d + 1) * (d + 1))) {
      std::ostringstream os;
      os << "patch " << k << ": coefficient must be " << d + 1 << "x" << d + 1;
      throw ConstructionError(os.str());
    }
    int max_index = pp.source.max_parameter_index();
    for (const auto& e : pp.coefficient)
      max_index = std::max(max_index, e.max_parameter_index());
    if (max_index >= params.size()) {
      std::ostringstream os;
      os << "patch " << k << ": expression uses mu" << max_index + 1 << " but only "
         << params.size() << " parameters are declared";
      throw ConstructionError(os.str());
    }
    if (pp.source_region && pp.source_region->center.size() != d)
      throw ConstructionError("source region center has the wrong dimension");
  }

  std::map<std::pair<int, std::pair<int, int>>, BoundaryCondition::Kind> face_kind;
  for (const auto& [tag, bc] : boundary) {
    const auto it = domain.boundary_tags.find(tag);
    if (it == domain.boundary_tags.end())
      throw ConstructionError("boundary condition on unknown tag '" + tag + "'");
    for (const FaceRef& f : it->second) {
      const auto key = std::make_pair(f.patch, std::make_pair(f.direction, f.side));
      const auto [pos, inserted] = face_kind.emplace(key, bc.kind);
      if (!inserted && pos->second != bc.kind) {
        std::ostringstream os;
        os << "face " << f.label() << " of patch " << f.patch
           << " is both Dirichlet and Neumann boundary";
        throw ConstructionError(os.str());
      }
    }
  }

  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t k = 0; k < patches.size(); ++k) {
      Eigen::MatrixXd a(d + 1, d + 1);
      for (int r = 0; r <= d; ++r)
        for (int c = 0; c <= d; ++c)
          a(r, c) = patches[k].a(r, c, d).evaluate(samples[s]);
      const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
      if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        std::ostringstream os;
        os << "patch " << k << ": coefficient matrix is not symmetric";
        throw ConstructionError(os.str());
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
        std::ostringstream os;
        os << "patch " << k << ": coefficient matrix is not positive semi-definite";
        throw ConstructionError(os.str());
      }
    }
  }
  (void)params;
}

} // namespace rbiga
