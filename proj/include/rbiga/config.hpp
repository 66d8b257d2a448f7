#pragma once

#include "rbiga/assembly.hpp"
#include "rbiga/certification.hpp"
#include "rbiga/greedy.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rbiga {

/// Target degrees and element counts per parametric direction at level 0.
struct PatchMesh {
  std::vector<int> degrees;
  std::vector<int> elements;
};

/// Coarse exact geometry plus the recipe to reach the analysis mesh.
struct GeometryConfig {
  std::vector<NurbsPatch> patches;
  std::vector<PatchMesh> mesh; ///< empty, or one entry per patch
  std::map<std::string, std::vector<FaceRef>> boundary_tags;
  AffineParamMap map;
  ParameterDomain parameters;
  double tolerance = 1e-10;

  /// Degree raise, then uniform knot insertion with elements * 2^level spans, then gluing.
  MultipatchDomain build(int level = 0) const;
};

struct GreedySettings {
  std::string training = "lattice=10";
  double tol = 1e-6;
  int n_max = 200;
  std::string first = "centroid";
  Estimator estimator = Estimator::Energy;
  CoercivityStrategy coercivity = CoercivityStrategy::MinTheta;
  double scm_epsilon = 0.75;

  GreedyConfig greedy_config() const;
  /// "mintheta" or "scm:eps".
  void set_coercivity(const std::string& text);
  std::string coercivity_string() const;
};

Estimator parse_estimator(const std::string& text);

struct CaseConfig {
  std::string name;
  GeometryConfig geometry;
  ProblemDefinition problem;
  int level = 0;
  GreedySettings greedy;
  std::string output = "out";

  TruthProblem build_truth() const;
};

nlohmann::json geometry_to_json(const GeometryConfig& g);
GeometryConfig geometry_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const ProblemDefinition& p);
ProblemDefinition problem_from_json(const nlohmann::json& j);
nlohmann::json greedy_to_json(const GreedySettings& s);
GreedySettings greedy_from_json(const nlohmann::json& j);

/// Case file: {"name", "geometry": path, "problem": path, "level", "greedy", "output"};
/// relative paths resolve against the case file's directory.
CaseConfig load_case(const std::filesystem::path& path);
/// Writes <dir>/<name>.case.json, <name>.geometry.json and <name>.problem.json.
std::filesystem::path save_case(const CaseConfig& c, const std::filesystem::path& dir);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal text that parses back to the same double.
std::string exact_decimal(double v);
double parse_decimal(const std::string& text);

} // namespace rbiga
