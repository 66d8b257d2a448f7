#pragma once

#include "rbiga/config.hpp"

#include <string>
#include <vector>

namespace rbiga {

/// Pipe with square cross-section 1 x 1: three straight parts of length 4
/// joined by two quarter bends of centerline radius 1, laid out as an S in the
/// xy-plane. Conductivities mu1, 1, mu2, 1, mu3 on patches 0..4.
CaseConfig pipeline_preset();

/// Cylinder of radius 2 and height 1 along z, one patch per quarter (the
/// radial direction collapses on the axis). y>0 scaled by mu1, y<0 by mu2,
/// z by mu3.
CaseConfig cylinder_preset();

/// Solid torus, four patches of 3x3x3 control points, x-semi-axis scaled by mu.
CaseConfig torus_preset();

inline constexpr double cylinder_radius = 2.0;
inline constexpr double cylinder_height = 1.0;
inline constexpr double torus_major_radius = 3.0;
inline constexpr double torus_minor_radius = 1.0;

std::vector<std::string> preset_names();
/// Throws ConstructionError for unknown names.
CaseConfig make_preset(const std::string& name);

} // namespace rbiga
