#include "rbiga/cli.hpp"

#include "rbiga/archive.hpp"
#include "rbiga/errors.hpp"
#include "rbiga/lanczos.hpp"
#include "rbiga/presets.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace rbiga {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> parse_mu(const std::string& text) {
  std::vector<double> mu;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t\r");
    if (b == std::string::npos)
      throw ConstructionError("empty entry in parameter list '" + text + "'");
    mu.push_back(parse_decimal(item.substr(b, e - b + 1)));
  }
  if (mu.empty())
    throw ConstructionError("empty parameter list");
  return mu;
}

namespace {

struct CaseSource {
  std::string case_file;
  std::string preset;
  int level = -1;

  void add_to(CLI::App* app, bool required = true) {
    auto* c = app->add_option("--case", case_file, "case file (JSON)");
    auto* p = app->add_option("--preset", preset, "built-in case: pipeline, cylinder, torus");
    c->excludes(p);
    if (required)
      app->callback([this] {
        if (case_file.empty() && preset.empty())
          throw CLI::RequiredError("--case or --preset");
      });
    app->add_option("--level", level, "uniform refinement level (each level halves the element size)")
        ->check(CLI::NonNegativeNumber);
  }
  bool given() const { return !case_file.empty() || !preset.empty(); }
  CaseConfig load() const {
    CaseConfig c = case_file.empty() ? make_preset(preset) : load_case(case_file);
    if (level >= 0)
      c.level = level;
    return c;
  }
};

fs::path output_dir(const CaseConfig& c, const std::string& flag) {
  if (!flag.empty())
    return flag;
  if (const char* env = std::getenv("RBIGA_OUTPUT_DIR"); env && *env)
    return env;
  return c.output;
}

fs::path output_dir(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty())
    return flag;
  if (const char* env = std::getenv("RBIGA_OUTPUT_DIR"); env && *env)
    return env;
  return fallback;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string join(const std::vector<double>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? std::string(1, sep) : "") + fmt(v[i]);
  return s;
}

/// Structured-grid samples of a field: per patch, a parametric lattice with
/// physical coordinates on the deformed domain T(Omega; mu).
std::string field_csv(const MultipatchDomain& domain, const AffineParamMap& map, const Eigen::VectorXd& full,
                      std::span<const double> mu, int grid) {
  const int d = domain.dim();
  std::ostringstream os;
  os << "patch,i,j,k,xi,eta,zeta";
  for (const char* c : {",x", ",y", ",z"})
    os << c;
  os << ",u\n";
  for (std::size_t k = 0; k < domain.patches.size(); ++k) {
    const NurbsPatch& p = domain.patches[k];
    const MapValues mv = evaluate_map(map, static_cast<int>(k), mu);
    const int pd = p.param_dim();
    const int ni = grid, nj = pd > 1 ? grid : 1, nk = pd > 2 ? grid : 1;
    for (int c = 0; c < nk; ++c)
      for (int b = 0; b < nj; ++b)
        for (int a = 0; a < ni; ++a) {
          const double t[3] = {static_cast<double>(a) / (grid - 1), nj > 1 ? static_cast<double>(b) / (grid - 1) : 0.0,
                               nk > 1 ? static_cast<double>(c) / (grid - 1) : 0.0};
          const std::span<const double> x(t, static_cast<std::size_t>(pd));
          const Eigen::VectorXd ref = eval_geometry(p, x);
          const Eigen::VectorXd phys = mv.offset + mv.linear * ref;
          os << k << ',' << a << ',' << b << ',' << c << ',' << fmt(t[0]) << ',' << fmt(t[1]) << ',' << fmt(t[2]);
          for (int i = 0; i < 3; ++i)
            os << ',' << (i < d ? fmt(phys(i)) : "0");
          os << ',' << fmt(evaluate_field(domain, full, static_cast<int>(k), x)) << '\n';
        }
  }
  return os.str();
}

void add_greedy_flags(CLI::App* app, std::string& tol, std::string& nmax, std::string& train,
                      std::string& first, std::string& estimator, std::string& coercivity) {
  app->add_option("--tol", tol, "greedy tolerance on the max estimator over the training set");
  app->add_option("--nmax", nmax, "maximum reduced dimension");
  app->add_option("--train", train, "lattice=KxKxK | random:n,seed");
  app->add_option("--first", first, "centroid | random:seed");
  app->add_option("--estimator", estimator, "energy | xnorm | output");
  app->add_option("--coercivity", coercivity, "mintheta | scm:eps");
}

void apply_greedy_flags(GreedySettings& s, const std::string& tol, const std::string& nmax, const std::string& train,
                        const std::string& first, const std::string& estimator, const std::string& coercivity) {
  if (!tol.empty()) {
    s.tol = parse_decimal(tol);
    if (!(s.tol > 0.0))
      throw ConstructionError("--tol must be positive");
  }
  if (!nmax.empty()) {
    s.n_max = static_cast<int>(parse_decimal(nmax));
    if (s.n_max < 1)
      throw ConstructionError("--nmax must be at least 1");
  }
  if (!train.empty())
    s.training = train;
  if (!first.empty())
    s.first = first;
  if (!estimator.empty())
    s.estimator = parse_estimator(estimator);
  if (!coercivity.empty())
    s.set_coercivity(coercivity);
  s.greedy_config();
}

CoercivityModel make_coercivity(const TruthProblem& t, const GreedySettings& s,
                                std::span<const std::vector<double>> training) {
  if (s.coercivity == CoercivityStrategy::MinTheta)
    return min_theta_model(t, training);
  ScmOptions o;
  o.epsilon = s.scm_epsilon;
  return scm_train(t, training, o);
}

std::vector<std::vector<double>> random_mus(const ParameterDomain& d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out;
  for (int s = 0; s < n; ++s) {
    std::vector<double> mu;
    for (int i = 0; i < d.size(); ++i)
      mu.push_back(std::uniform_real_distribution<double>(d.lower[static_cast<std::size_t>(i)],
                                                          d.upper[static_cast<std::size_t>(i)])(rng));
    out.push_back(mu);
  }
  return out;
}

json result_json(const std::vector<double>& mu, const OnlineResult& r) {
  return {{"mu", mu},
          {"output", r.output},
          {"residual", r.residual},
          {"alpha_lb", r.alpha_lb},
          {"delta_energy", r.delta_energy},
          {"delta_x", r.delta_x},
          {"delta_output", r.delta_output}};
}

int cmd_validate(const CaseSource& src, std::ostream& out) {
  const CaseConfig c = src.load();
  json report = {{"case", c.name}, {"level", c.level}};
  const MultipatchDomain dom = c.geometry.build(c.level);
  report["patches"] = dom.patches.size();
  report["dofs"] = dom.dof_count;
  const auto samples = random_mus(c.geometry.parameters, 10, 1);
  if (c.geometry.map.max_parameter_index() >= c.geometry.parameters.size())
    throw ConstructionError("geometry map uses mu" + std::to_string(c.geometry.map.max_parameter_index() + 1) +
                            " but only " + std::to_string(c.geometry.parameters.size()) +
                            " parameters are declared");
  const ContinuityReport cont = check_interface_continuity(dom, c.geometry.map, samples);
  json violations = json::array();
  for (const auto& v : cont.violations)
    violations.push_back({{"patches", {v.patch_a, v.patch_b}},
                          {"control_point", v.global_index},
                          {"sample", v.sample},
                          {"deviation", v.deviation}});
  report["continuity_violations"] = violations;
  const TruthProblem t = TruthProblem::build(dom, c.geometry.map, c.problem, c.geometry.parameters);
  report["free_dofs"] = t.free_count();
  report["Q"] = t.constrained.q();
  report["Q_f"] = t.constrained.q_f();
  json terms = json::array();
  bool positive = true;
  for (const auto& term : t.constrained.terms) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& mu : samples)
      lowest = std::min(lowest, term.theta.evaluate(mu));
    positive = positive && lowest > 0.0;
    terms.push_back({{"theta", term.theta.to_string()}, {"psd", term.structurally_psd}, {"min_theta", lowest}});
  }
  report["terms"] = terms;
  report["coefficients_positive"] = positive;
  report["ok"] = cont.ok();
  out << report.dump(2) << '\n';
  return cont.ok() ? 0 : 1;
}

int cmd_truth(const CaseSource& src, const std::string& mu_text, const std::string& field, int grid,
              std::ostream& out) {
  const CaseConfig c = src.load();
  const TruthProblem t = c.build_truth();
  const std::vector<double> mu = parse_mu(mu_text);
  t.parameters.check(mu);
  const auto start = std::chrono::steady_clock::now();
  const Eigen::VectorXd u = truth_solve(t.constrained, mu);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json report = {{"case", c.name},
                 {"level", c.level},
                 {"mu", mu},
                 {"dofs", t.domain.dof_count},
                 {"free_dofs", t.free_count()},
                 {"output", evaluate_output(t.constrained, mu, u)},
                 {"seconds", seconds}};
  if (!field.empty()) {
    write_text(field, field_csv(t.domain, t.map, t.space.expand(u), mu, grid));
    report["field"] = field;
  }
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_offline(const CaseSource& src, const std::string& out_flag, int threads,
                const std::function<void(GreedySettings&)>& apply, std::ostream& out) {
  CaseConfig c = src.load();
  apply(c.greedy);
  const fs::path dir = output_dir(c, out_flag);
  const auto start = std::chrono::steady_clock::now();
  const TruthProblem t = c.build_truth();
  GreedyConfig gc = c.greedy.greedy_config();
  gc.threads = threads;
  const auto training = sample_training_set(t.parameters, gc.training);
  const CoercivityModel cm = make_coercivity(t, c.greedy, training);
  const GreedyResult r = greedy_build(t, gc, cm);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ReducedModelArchive a;
  a.case_name = c.name;
  a.level = c.level;
  a.settings = c.greedy;
  a.model = r.model;
  a.history = r.history;
  a.basis = r.space.z;
  a.free_dofs = t.space.free_dofs;
  a.dof_count = t.domain.dof_count;
  a.samples = r.space.samples;
  const fs::path archive = dir / (c.name + ".rbiga");
  save_archive(archive, a);
  write_text(dir / (c.name + ".convergence.csv"), convergence_csv(r.history));
  write_text(dir / (c.name + ".convergence.json"), convergence_json(r.history) + "\n");
  const double final_max =
      r.final_deltas.empty() ? 0.0 : *std::max_element(r.final_deltas.begin(), r.final_deltas.end());
  json report = {{"case", c.name},
                 {"level", c.level},
                 {"dofs", t.domain.dof_count},
                 {"free_dofs", t.free_count()},
                 {"Q", t.constrained.q()},
                 {"Q_f", t.constrained.q_f()},
                 {"N", r.space.n()},
                 {"converged", r.history.converged},
                 {"exact_space", r.history.exact_space},
                 {"collinear", r.history.collinear},
                 {"estimator", to_string(c.greedy.estimator)},
                 {"coercivity", c.greedy.coercivity_string()},
                 {"coercivity_converged", cm.converged},
                 {"training", c.greedy.training},
                 {"training_size", training.size()},
                 {"tol", c.greedy.tol},
                 {"final_max_delta", final_max},
                 {"seconds", seconds},
                 {"archive", archive.string()}};
  write_text(dir / (c.name + ".offline.json"), report.dump(2) + "\n");
  out << report.dump(2) << '\n';
  return 0;
}

std::vector<std::vector<double>> read_mu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConstructionError("cannot open " + path);
  std::vector<std::vector<double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
      continue;
    out.push_back(parse_mu(line));
  }
  return out;
}

int cmd_online(const std::string& archive_path, const std::vector<std::string>& mu_texts, const std::string& mu_file,
               const std::string& csv, const CaseSource& src, const std::string& field, int grid, int threads,
               std::ostream& out) {
  const ReducedModelArchive a = load_archive(archive_path);
  std::vector<std::vector<double>> mus;
  for (const auto& m : mu_texts)
    mus.push_back(parse_mu(m));
  if (!mu_file.empty())
    for (auto& m : read_mu_file(mu_file))
      mus.push_back(std::move(m));
  if (mus.empty())
    throw ConstructionError("online: give --mu or --mu-file");
  for (const auto& mu : mus)
    a.model.parameters.check(mu);
  std::vector<OnlineResult> results(mus.size());
  const auto start = std::chrono::steady_clock::now();
  parallel_for(mus.size(), threads, [&](std::size_t i) { results[i] = online_query(a.model, mus[i]); });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json list = json::array();
  for (std::size_t i = 0; i < mus.size(); ++i)
    list.push_back(result_json(mus[i], results[i]));
  json report = {{"case", a.case_name},
                 {"N", a.model.n()},
                 {"queries", mus.size()},
                 {"seconds_per_query", seconds / static_cast<double>(mus.size())},
                 {"results", list}};
  if (!csv.empty()) {
    std::ostringstream os;
    os << "mu,output,delta_energy,delta_x,delta_output,alpha_lb\n";
    for (std::size_t i = 0; i < mus.size(); ++i)
      os << join(mus[i], ';') << ',' << fmt(results[i].output) << ',' << fmt(results[i].delta_energy) << ','
         << fmt(results[i].delta_x) << ',' << fmt(results[i].delta_output) << ',' << fmt(results[i].alpha_lb)
         << '\n';
    write_text(csv, os.str());
  }
  if (!field.empty()) {
    if (!src.given())
      throw ConstructionError("--field needs --case or --preset to rebuild the mesh");
    CaseConfig c = src.load();
    if (src.level < 0)
      c.level = a.level;
    const MultipatchDomain dom = c.geometry.build(c.level);
    if (dom.dof_count != a.dof_count)
      throw ConstructionError("case mesh has " + std::to_string(dom.dof_count) + " control variables, archive " +
                              std::to_string(a.dof_count));
    Eigen::VectorXd full = Eigen::VectorXd::Zero(a.dof_count);
    const Eigen::VectorXd free = a.basis.leftCols(results.front().u.size()) * results.front().u;
    for (std::size_t i = 0; i < a.free_dofs.size(); ++i)
      full(a.free_dofs[i]) = free(static_cast<Eigen::Index>(i));
    write_text(field, field_csv(dom, c.geometry.map, full, mus.front(), grid));
    report["field"] = field;
  }
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_verify(const std::string& archive_path, const CaseSource& src, int samples, std::uint64_t seed,
               bool alpha_check, const std::string& out_flag, std::ostream& out) {
  if (samples < 1)
    throw ConstructionError("verify: sample count must be at least 1");
  const ReducedModelArchive a = load_archive(archive_path);
  CaseConfig c = src.load();
  if (src.level < 0)
    c.level = a.level;
  const TruthProblem t = c.build_truth();
  if (t.domain.dof_count != a.dof_count || t.free_count() != a.basis.rows())
    throw ConstructionError("case mesh does not match the archive (control variables " +
                            std::to_string(t.domain.dof_count) + " vs " + std::to_string(a.dof_count) + ")");
  RBSpace space;
  space.z = a.basis;
  const auto mus = random_mus(t.parameters, samples, seed);
  json rows = json::array();
  std::ostringstream csv;
  csv << "mu,error_energy,delta_energy,effectivity,output_gap,delta_output,alpha_lb,alpha_exact\n";
  int violations = 0;
  double eff_min = std::numeric_limits<double>::infinity(), eff_max = 0.0;
  for (const auto& mu : mus) {
    const OnlineResult r = online_query(a.model, mu);
    const Eigen::VectorXd uh = truth_solve(t.constrained, mu);
    const Eigen::VectorXd e = uh - reconstruct(space, r.u);
    const double err = t.energy_norm(e, mu);
    const double gap = evaluate_output(t.constrained, mu, uh) - r.output;
    const double eff = err > 0.0 ? r.delta_energy / err : std::numeric_limits<double>::infinity();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    bool bad = r.delta_energy < err * (1.0 - 1e-12) || r.delta_output < gap * (1.0 - 1e-12) - 1e-15;
    if (alpha_check) {
      alpha = exact_coercivity_smallscale(t.constrained, t.x_gram, *t.x_solver, mu).value;
      bad = bad || r.alpha_lb > alpha * (1.0 + 1e-10);
    }
    violations += bad;
    if (std::isfinite(eff)) {
      eff_min = std::min(eff_min, eff);
      eff_max = std::max(eff_max, eff);
    }
    json row = {{"mu", mu},         {"error_energy", err}, {"delta_energy", r.delta_energy},
                {"output_gap", gap}, {"delta_output", r.delta_output}, {"alpha_lb", r.alpha_lb},
                {"violation", bad}};
    if (std::isfinite(eff))
      row["effectivity"] = eff;
    if (alpha_check)
      row["alpha_exact"] = alpha;
    rows.push_back(row);
    csv << join(mu, ';') << ',' << fmt(err) << ',' << fmt(r.delta_energy) << ',' << fmt(eff) << ',' << fmt(gap)
        << ',' << fmt(r.delta_output) << ',' << fmt(r.alpha_lb) << ',' << fmt(alpha) << '\n';
  }
  json report = {{"case", a.case_name},
                 {"N", a.model.n()},
                 {"samples", samples},
                 {"seed", seed},
                 {"violations", violations},
                 {"effectivity_min", std::isfinite(eff_min) ? json(eff_min) : json(nullptr)},
                 {"effectivity_max", eff_max},
                 {"rows", rows}};
  const fs::path dir = output_dir(out_flag, fs::path(archive_path).parent_path());
  write_text(dir / (a.case_name + ".verify.json"), report.dump(2) + "\n");
  write_text(dir / (a.case_name + ".verify.csv"), csv.str());
  out << report.dump(2) << '\n';
  return violations == 0 ? 0 : 1;
}

int cmd_report(const std::string& archive_path, const std::string& csv, std::ostream& out) {
  const ReducedModelArchive a = load_archive(archive_path);
  json thetas = json::array(), rhs = json::array();
  for (const auto& e : a.model.theta_a)
    thetas.push_back(e.to_string());
  for (const auto& e : a.model.theta_f)
    rhs.push_back(e.to_string());
  json report = {{"case", a.case_name},
                 {"level", a.level},
                 {"P", a.model.parameters.size()},
                 {"Q", a.model.q()},
                 {"Q_f", a.model.q_f()},
                 {"N", a.model.n()},
                 {"dofs", a.dof_count},
                 {"lower", a.model.parameters.lower},
                 {"upper", a.model.parameters.upper},
                 {"mu_ref", a.model.parameters.mu_ref},
                 {"theta_a", thetas},
                 {"theta_f", rhs},
                 {"coercivity", to_string(a.model.coercivity.strategy)},
                 {"greedy", greedy_to_json(a.settings)},
                 {"history", history_to_json(a.history)}};
  if (!csv.empty()) {
    write_text(csv, convergence_csv(a.history));
    report["csv"] = csv;
  }
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_export(const std::vector<std::string>& names, const std::string& dir, std::ostream& out) {
  json written = json::array();
  for (const auto& n : names.empty() ? preset_names() : names)
    written.push_back(save_case(make_preset(n), dir).string());
  out << json{{"written", written}}.dump(2) << '\n';
  return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified reduced basis for isogeometric NURBS Galerkin problems", "rbiga"};
  app.require_subcommand(1);

  CaseSource validate_src, truth_src, offline_src, online_src, verify_src;
  std::string mu, field, out_dir, export_dir, archive, mu_file, csv;
  std::vector<std::string> mus, names;
  int grid = 11, samples = 20, threads = 0;
  std::uint64_t seed = 1;
  bool alpha_check = false;
  std::string tol, nmax, train, first, estimator, coercivity;

  auto* validate = app.add_subcommand("validate", "check a case: gluing, map continuity, coefficient sampling");
  validate_src.add_to(validate);

  auto* truth = app.add_subcommand("truth", "full-order solve at one parameter");
  truth_src.add_to(truth);
  truth->add_option("--mu", mu, "parameter, comma separated")->required();
  truth->add_option("--field", field, "write a field dump (CSV)");
  truth->add_option("--grid", grid, "samples per parametric direction in field dumps")->check(CLI::Range(2, 1000));

  auto* offline = app.add_subcommand("offline", "greedy construction of the reduced model");
  offline_src.add_to(offline);
  add_greedy_flags(offline, tol, nmax, train, first, estimator, coercivity);
  offline->add_option("--out", out_dir, "output directory (default: RBIGA_OUTPUT_DIR, then the case's)");
  offline->add_option("--threads", threads, "training-set sweep workers (0: all cores)")->check(CLI::NonNegativeNumber);

  auto* online = app.add_subcommand("online", "certified reduced evaluation");
  online->add_option("--archive", archive, "reduced-model archive")->required();
  online->add_option("--mu", mus, "parameter, comma separated (repeatable)");
  online->add_option("--mu-file", mu_file, "one comma-separated parameter per line");
  online->add_option("--csv", csv, "write results as CSV");
  online->add_option("--threads", threads, "query workers (0: all cores)")->check(CLI::NonNegativeNumber);
  online->add_option("--field", field, "write the reconstructed field of the first parameter (needs the case)");
  online->add_option("--grid", grid, "samples per parametric direction in field dumps")->check(CLI::Range(2, 1000));
  online_src.add_to(online, false);

  auto* verify = app.add_subcommand("verify", "compare estimators with truth errors at random parameters");
  verify->add_option("--archive", archive, "reduced-model archive")->required();
  verify_src.add_to(verify);
  verify->add_option("--samples", samples, "number of random parameters");
  verify->add_option("--seed", seed, "random seed");
  verify->add_flag("--alpha-check", alpha_check, "also check the coercivity bound against the eigenvalue oracle");
  verify->add_option("--out", out_dir, "output directory (default: RBIGA_OUTPUT_DIR, then the archive's)");

  auto* report = app.add_subcommand("report", "summary and convergence table of an archive");
  report->add_option("--archive", archive, "reduced-model archive")->required();
  report->add_option("--csv", csv, "write the convergence table");

  auto* exportp = app.add_subcommand("export-preset", "write preset case files");
  exportp->add_option("names", names, "preset names (default: all)");
  exportp->add_option("--dir", export_dir, "target directory")->default_val("presets");

  std::vector<const char*> argv{"rbiga"};
  for (const auto& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate)
      return cmd_validate(validate_src, out);
    if (*truth)
      return cmd_truth(truth_src, mu, field, grid, out);
    if (*offline)
      return cmd_offline(offline_src, out_dir, threads,
                         [&](GreedySettings& s) { apply_greedy_flags(s, tol, nmax, train, first, estimator, coercivity); },
                         out);
    if (*online)
      return cmd_online(archive, mus, mu_file, csv, online_src, field, grid, threads, out);
    if (*verify)
      return cmd_verify(archive, verify_src, samples, seed, alpha_check, out_dir, out);
    if (*report)
      return cmd_report(archive, csv, out);
    if (*exportp)
      return cmd_export(names, export_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace rbiga
