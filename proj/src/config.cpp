#include "rbiga/config.hpp"

#include "rbiga/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rbiga {

using nlohmann::json;

std::string exact_decimal(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_decimal(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end)
    throw ConstructionError("'" + text + "' is not a decimal number");
  return v;
}

namespace {

double number_or_text(const json& j) {
  if (j.is_number())
    return j.get<double>();
  if (j.is_string())
    return parse_decimal(j.get<std::string>());
  throw ConstructionError("expected a number, got " + j.dump());
}

ScalarExpression expression_of(const json& j) {
  if (j.is_number())
    return ScalarExpression(j.get<double>());
  if (j.is_string())
    return ScalarExpression::parse(j.get<std::string>());
  throw ConstructionError("expected an expression string, got " + j.dump());
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConstructionError(where + ": missing field '" + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const json& j) {
  std::vector<double> out;
  for (const auto& v : j)
    out.push_back(number_or_text(v));
  return out;
}

} // namespace

MultipatchDomain GeometryConfig::build(int level) const {
  if (level < 0)
    throw DomainError("refinement level must be non-negative");
  if (!mesh.empty() && mesh.size() != patches.size())
    throw ConstructionError("mesh section must list every patch");
  std::vector<NurbsPatch> refined = patches;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const PatchMesh& m = mesh[k];
    NurbsPatch& p = refined[k];
    if (m.degrees.size() != static_cast<std::size_t>(p.param_dim()) ||
        m.elements.size() != static_cast<std::size_t>(p.param_dim()))
      throw ConstructionError("patch " + std::to_string(k) + ": mesh needs one entry per direction");
    for (int d = 0; d < p.param_dim(); ++d) {
      PatchRefinement r;
      r.direction = d;
      r.raise_by = m.degrees[static_cast<std::size_t>(d)] - p.knots(d).degree();
      if (r.raise_by < 0)
        throw ConstructionError("patch " + std::to_string(k) + ": mesh degree below geometry degree");
      const int spans = m.elements[static_cast<std::size_t>(d)] << level;
      if (spans < 1)
        throw ConstructionError("patch " + std::to_string(k) + ": element count must be positive");
      for (int e = 1; e < spans; ++e) {
        const double x = static_cast<double>(e) / spans;
        if (p.knots(d).multiplicity(x) == 0)
          r.new_knots.push_back(x);
      }
      p = refine_patch(p, r);
    }
  }
  MultipatchDomain dom = glue_patches(std::move(refined), tolerance);
  for (const auto& [tag, faces] : boundary_tags)
    for (const FaceRef& f : faces)
      if (f.patch < 0 || f.patch >= static_cast<int>(dom.patches.size()) ||
          f.direction >= dom.patches[static_cast<std::size_t>(f.patch)].param_dim())
        throw ConstructionError("boundary tag '" + tag + "' refers to missing face " + f.label() +
                                " of patch " + std::to_string(f.patch));
  dom.boundary_tags = boundary_tags;
  return dom;
}

GreedyConfig GreedySettings::greedy_config() const {
  GreedyConfig c;
  c.training = TrainingSpec::parse(training);
  c.tol = tol;
  c.n_max = n_max;
  c.first = FirstRule::parse(first);
  c.estimator = estimator;
  return c;
}

void GreedySettings::set_coercivity(const std::string& text) {
  if (text == "mintheta") {
    coercivity = CoercivityStrategy::MinTheta;
    return;
  }
  if (text.rfind("scm", 0) == 0) {
    coercivity = CoercivityStrategy::Scm;
    if (text.size() > 3) {
      if (text[3] != ':')
        throw ConstructionError("coercivity must be mintheta or scm:eps, got '" + text + "'");
      scm_epsilon = parse_decimal(text.substr(4));
      if (!(scm_epsilon > 0.0 && scm_epsilon < 1.0))
        throw ConstructionError("scm epsilon must lie in (0,1)");
    }
    return;
  }
  throw ConstructionError("coercivity must be mintheta or scm:eps, got '" + text + "'");
}

std::string GreedySettings::coercivity_string() const {
  return coercivity == CoercivityStrategy::MinTheta ? "mintheta" : "scm:" + exact_decimal(scm_epsilon);
}

Estimator parse_estimator(const std::string& text) {
  if (text == "energy")
    return Estimator::Energy;
  if (text == "xnorm")
    return Estimator::XNorm;
  if (text == "output")
    return Estimator::Output;
  throw ConstructionError("estimator must be energy, xnorm or output, got '" + text + "'");
}

TruthProblem CaseConfig::build_truth() const {
  return TruthProblem::build(geometry.build(level), geometry.map, problem, geometry.parameters);
}

json geometry_to_json(const GeometryConfig& g) {
  json j;
  j["dimension"] = g.patches.empty() ? 0 : g.patches.front().dim();
  j["tolerance"] = g.tolerance;
  json patches = json::array();
  for (std::size_t k = 0; k < g.patches.size(); ++k) {
    const NurbsPatch& p = g.patches[k];
    json jp;
    json degrees = json::array(), knots = json::array();
    for (const KnotVector& kv : p.knots()) {
      degrees.push_back(kv.degree());
      json vals = json::array();
      for (double v : kv.values())
        vals.push_back(exact_decimal(v));
      knots.push_back(vals);
    }
    jp["degrees"] = degrees;
    jp["knots"] = knots;
    json control = json::array();
    for (Eigen::Index r = 0; r < p.projective().rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < p.projective().cols(); ++c)
        row.push_back(p.projective()(r, c));
      control.push_back(row);
    }
    jp["control"] = control;
    if (!g.mesh.empty())
      jp["mesh"] = {{"degrees", g.mesh[k].degrees}, {"elements", g.mesh[k].elements}};
    patches.push_back(jp);
  }
  j["patches"] = patches;
  json tags = json::object();
  for (const auto& [tag, faces] : g.boundary_tags) {
    json list = json::array();
    for (const FaceRef& f : faces)
      list.push_back({{"patch", f.patch}, {"face", f.label()}});
    tags[tag] = list;
  }
  j["boundary"] = tags;
  json map = json::array();
  for (const PatchMap& pm : g.map.patches) {
    json offset = json::array(), linear = json::array();
    for (const auto& e : pm.offset)
      offset.push_back(e.to_string());
    for (int r = 0; r < pm.dim(); ++r) {
      json row = json::array();
      for (int c = 0; c < pm.dim(); ++c)
        row.push_back(pm.g(r, c).to_string());
      linear.push_back(row);
    }
    map.push_back({{"offset", offset}, {"linear", linear}});
  }
  j["map"] = map;
  j["parameters"] = {{"lower", g.parameters.lower},
                     {"upper", g.parameters.upper},
                     {"mu_ref", g.parameters.mu_ref}};
  return j;
}

GeometryConfig geometry_from_json(const json& j) {
  GeometryConfig g;
  const int dim = member(j, "dimension", "geometry").get<int>();
  if (dim < 1 || dim > 3)
    throw ConstructionError("geometry: dimension must be 1, 2 or 3");
  if (j.contains("tolerance"))
    g.tolerance = j.at("tolerance").get<double>();
  const json& patches = member(j, "patches", "geometry");
  bool any_mesh = false;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const std::string where = "geometry patch " + std::to_string(k);
    const json& jp = patches[k];
    const json& degrees = member(jp, "degrees", where);
    const json& knots = member(jp, "knots", where);
    if (degrees.size() != knots.size())
      throw ConstructionError(where + ": degrees and knots differ in length");
    std::vector<KnotVector> kvs;
    for (std::size_t d = 0; d < knots.size(); ++d) {
      try {
        kvs.emplace_back(doubles(knots[d]), degrees[d].get<int>());
      } catch (const Error& e) {
        throw ConstructionError(where + ", direction " + std::to_string(d) + ": " + e.what());
      }
    }
    const json& control = member(jp, "control", where);
    Eigen::MatrixXd proj(static_cast<Eigen::Index>(control.size()), dim + 1);
    for (std::size_t r = 0; r < control.size(); ++r) {
      if (control[r].size() != static_cast<std::size_t>(dim + 1))
        throw ConstructionError(where + ": control row " + std::to_string(r) + " must have " +
                                std::to_string(dim + 1) + " projective entries");
      for (int c = 0; c <= dim; ++c)
        proj(static_cast<Eigen::Index>(r), c) = number_or_text(control[r][static_cast<std::size_t>(c)]);
    }
    try {
      g.patches.emplace_back(dim, std::move(kvs), std::move(proj));
    } catch (const Error& e) {
      throw ConstructionError(where + ": " + e.what());
    }
    PatchMesh m;
    if (jp.contains("mesh")) {
      any_mesh = true;
      m.degrees = member(jp.at("mesh"), "degrees", where).get<std::vector<int>>();
      m.elements = member(jp.at("mesh"), "elements", where).get<std::vector<int>>();
    }
    g.mesh.push_back(m);
  }
  if (!any_mesh)
    g.mesh.clear();
  if (j.contains("boundary"))
    for (const auto& [tag, list] : j.at("boundary").items())
      for (const auto& f : list)
        g.boundary_tags[tag].push_back(
            FaceRef::parse(member(f, "patch", "boundary tag " + tag).get<int>(),
                           member(f, "face", "boundary tag " + tag).get<std::string>()));
  if (j.contains("map")) {
    for (const auto& jm : j.at("map")) {
      PatchMap pm;
      for (const auto& e : member(jm, "offset", "map"))
        pm.offset.push_back(expression_of(e));
      for (const auto& row : member(jm, "linear", "map"))
        for (const auto& e : row)
          pm.linear.push_back(expression_of(e));
      if (static_cast<int>(pm.offset.size()) != dim || static_cast<int>(pm.linear.size()) != dim * dim)
        throw ConstructionError("map entries must be a length-d offset and a d x d matrix");
      g.map.patches.push_back(std::move(pm));
    }
  } else {
    g.map = AffineParamMap::identity(static_cast<int>(g.patches.size()), dim);
  }
  const json& params = member(j, "parameters", "geometry");
  g.parameters = ParameterDomain(doubles(member(params, "lower", "parameters")),
                                 doubles(member(params, "upper", "parameters")),
                                 doubles(member(params, "mu_ref", "parameters")));
  return g;
}

json problem_to_json(const ProblemDefinition& p) {
  json j;
  json patches = json::array();
  for (const PatchProblem& pp : p.patches) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pp.coefficient.size()))));
    json rows = json::array();
    for (int r = 0; r < n; ++r) {
      json row = json::array();
      for (int c = 0; c < n; ++c)
        row.push_back(pp.coefficient[static_cast<std::size_t>(r * n + c)].to_string());
      rows.push_back(row);
    }
    json jp = {{"coefficient", rows}, {"source", pp.source.to_string()}};
    if (pp.source_region) {
      std::vector<double> c(pp.source_region->center.data(),
                            pp.source_region->center.data() + pp.source_region->center.size());
      jp["source_region"] = {{"center", c}, {"radius", pp.source_region->radius}};
    }
    patches.push_back(jp);
  }
  j["patches"] = patches;
  json bcs = json::object();
  for (const auto& [tag, bc] : p.boundary)
    bcs[tag] = {{bc.kind == BoundaryCondition::Kind::Dirichlet ? "dirichlet" : "neumann", bc.value}};
  j["boundary"] = bcs;
  return j;
}

ProblemDefinition problem_from_json(const json& j) {
  ProblemDefinition p;
  const json& patches = member(j, "patches", "problem");
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const std::string where = "problem patch " + std::to_string(k);
    const json& jp = patches[k];
    PatchProblem pp;
    for (const auto& row : member(jp, "coefficient", where)) {
      if (row.size() != member(jp, "coefficient", where).size())
        throw ConstructionError(where + ": coefficient must be square");
      for (const auto& e : row)
        pp.coefficient.push_back(expression_of(e));
    }
    if (jp.contains("source"))
      pp.source = expression_of(jp.at("source"));
    if (jp.contains("source_region")) {
      const json& r = jp.at("source_region");
      const std::vector<double> c = doubles(member(r, "center", where));
      BallRegion ball;
      ball.center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
      ball.radius = number_or_text(member(r, "radius", where));
      if (!(ball.radius > 0.0))
        throw ConstructionError(where + ": source region radius must be positive");
      pp.source_region = ball;
    }
    p.patches.push_back(std::move(pp));
  }
  if (j.contains("boundary"))
    for (const auto& [tag, jb] : j.at("boundary").items()) {
      BoundaryCondition bc;
      if (jb.contains("dirichlet") == jb.contains("neumann") || jb.size() != 1)
        throw ConstructionError("boundary '" + tag + "' needs exactly one of dirichlet or neumann");
      if (jb.contains("dirichlet")) {
        bc.kind = BoundaryCondition::Kind::Dirichlet;
        bc.value = number_or_text(jb.at("dirichlet"));
      } else {
        bc.kind = BoundaryCondition::Kind::Neumann;
        bc.value = number_or_text(jb.at("neumann"));
      }
      p.boundary[tag] = bc;
    }
  return p;
}

json greedy_to_json(const GreedySettings& s) {
  return {{"train", s.training},
          {"tol", s.tol},
          {"nmax", s.n_max},
          {"first", s.first},
          {"estimator", to_string(s.estimator)},
          {"coercivity", s.coercivity_string()}};
}

GreedySettings greedy_from_json(const json& j) {
  GreedySettings s;
  if (j.contains("train"))
    s.training = j.at("train").get<std::string>();
  if (j.contains("tol"))
    s.tol = j.at("tol").get<double>();
  if (j.contains("nmax"))
    s.n_max = j.at("nmax").get<int>();
  if (j.contains("first"))
    s.first = j.at("first").get<std::string>();
  if (j.contains("estimator"))
    s.estimator = parse_estimator(j.at("estimator").get<std::string>());
  if (j.contains("coercivity"))
    s.set_coercivity(j.at("coercivity").get<std::string>());
  // fail early on malformed specs
  s.greedy_config();
  return s;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConstructionError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConstructionError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConstructionError("cannot write " + path.string());
  out << text;
}

CaseConfig load_case(const std::filesystem::path& path) {
  const json j = read_json(path);
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  CaseConfig c;
  c.name = j.value("name", path.stem().string());
  try {
    c.geometry = geometry_from_json(read_json(resolve(member(j, "geometry", "case").get<std::string>())));
    c.problem = problem_from_json(read_json(resolve(member(j, "problem", "case").get<std::string>())));
    if (j.contains("parameters")) {
      const json& params = j.at("parameters");
      c.geometry.parameters = ParameterDomain(doubles(member(params, "lower", "parameters")),
                                              doubles(member(params, "upper", "parameters")),
                                              doubles(member(params, "mu_ref", "parameters")));
    }
    c.level = j.value("level", 0);
    if (j.contains("greedy"))
      c.greedy = greedy_from_json(j.at("greedy"));
    c.output = j.value("output", std::string("out"));
  } catch (const json::exception& e) {
    throw ConstructionError(path.string() + ": " + e.what());
  }
  return c;
}

std::filesystem::path save_case(const CaseConfig& c, const std::filesystem::path& dir) {
  const std::string geometry = c.name + ".geometry.json";
  const std::string problem = c.name + ".problem.json";
  write_text(dir / geometry, geometry_to_json(c.geometry).dump(2) + "\n");
  write_text(dir / problem, problem_to_json(c.problem).dump(2) + "\n");
  const json j = {{"name", c.name},
                  {"geometry", geometry},
                  {"problem", problem},
                  {"level", c.level},
                  {"greedy", greedy_to_json(c.greedy)},
                  {"output", c.output}};
  const std::filesystem::path out = dir / (c.name + ".case.json");
  write_text(out, j.dump(2) + "\n");
  return out;
}

} // namespace rbiga
