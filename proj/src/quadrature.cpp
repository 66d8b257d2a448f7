#include "rbiga/quadrature.hpp"

#include "rbiga/errors.hpp"

#include <cmath>
#include <numbers>

namespace rbiga {

GaussRule gauss_legendre(int n) {
  if (n < 1)
    throw DomainError("gauss_legendre: need at least one point");
  GaussRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1)
        p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    if (n == 1)
      dp = 1.0;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> [0, 1].
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.points[lo] = 0.5 * (1.0 - x);
    rule.points[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = rule.weights[hi] = 0.5 * w;
  }
  if (n % 2 == 1) {
    const auto mid = static_cast<std::size_t>(n / 2);
    rule.points[mid] = 0.5;
  }
  return rule;
}

std::vector<ElementQuadrature> build_quadrature(const NurbsPatch& patch, int extra_points) {
  const int pd = patch.param_dim();
  std::array<std::vector<double>, 3> bps;
  std::array<GaussRule, 3> rules;
  for (int d = 0; d < 3; ++d) {
    if (d < pd) {
      bps[d] = patch.knots(d).breakpoints();
      rules[d] = gauss_legendre(patch.knots(d).degree() + 1 + extra_points);
    } else {
      bps[d] = {0.0, 1.0};
      rules[d] = {{0.0}, {1.0}};
    }
  }
  std::vector<ElementQuadrature> out;
  for (std::size_t ek = 0; ek + 1 < bps[2].size(); ++ek)
    for (std::size_t ej = 0; ej + 1 < bps[1].size(); ++ej)
      for (std::size_t ei = 0; ei + 1 < bps[0].size(); ++ei) {
        const std::array<std::size_t, 3> e{ei, ej, ek};
        ElementQuadrature q;
        for (int d = 0; d < 3; ++d) {
          q.lower[d] = bps[d][e[d]];
          q.upper[d] = bps[d][e[d] + 1];
        }
        for (std::size_t c = 0; c < rules[2].points.size(); ++c)
          for (std::size_t b = 0; b < rules[1].points.size(); ++b)
            for (std::size_t a = 0; a < rules[0].points.size(); ++a) {
              const std::array<std::size_t, 3> ix{a, b, c};
              std::array<double, 3> x{0, 0, 0};
              double w = 1.0;
              for (int d = 0; d < pd; ++d) {
                const double h = q.upper[d] - q.lower[d];
                x[d] = q.lower[d] + h * rules[d].points[ix[d]];
                w *= h * rules[d].weights[ix[d]];
              }
              q.points.push_back(x);
              q.weights.push_back(w);
            }
        out.push_back(std::move(q));
      }
  return out;
}

} // namespace rbiga
