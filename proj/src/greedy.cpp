#include "rbiga/greedy.hpp"

#include "rbiga/errors.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace rbiga {

namespace {

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

long parse_int(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size())
    throw ConstructionError("invalid " + what + " '" + s + "'");
  return v;
}

} // namespace

TrainingSpec TrainingSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  TrainingSpec spec;
  if (t.rfind("lattice=", 0) == 0 || t.rfind("lattice:", 0) == 0) {
    spec.kind = Kind::Lattice;
    for (const auto& part : split(t.substr(8), 'x')) {
      const long k = parse_int(part, "lattice size");
      if (k < 1)
        throw ConstructionError("lattice sizes must be at least 1");
      spec.lattice.push_back(static_cast<int>(k));
    }
    return spec;
  }
  if (t.rfind("random:", 0) == 0 || t.rfind("random=", 0) == 0) {
    spec.kind = Kind::Random;
    const auto parts = split(t.substr(7), ',');
    spec.count = static_cast<int>(parse_int(parts[0], "training count"));
    if (parts.size() > 1)
      spec.seed = static_cast<std::uint64_t>(parse_int(parts[1], "training seed"));
    if (spec.count < 1)
      throw ConstructionError("training set: count must be at least 1");
    return spec;
  }
  throw ConstructionError("training set '" + text + "': expected lattice=KxKxK or random:n,seed");
}

std::string TrainingSpec::to_string() const {
  std::ostringstream os;
  if (kind == Kind::Lattice) {
    os << "lattice=";
    for (std::size_t i = 0; i < lattice.size(); ++i)
      os << (i ? "x" : "") << lattice[i];
  } else if (kind == Kind::Random) {
    os << "random:" << count << "," << seed;
  } else {
    os << "explicit:" << points.size();
  }
  return os.str();
}

std::vector<std::vector<double>> sample_training_set(const ParameterDomain& domain,
                                                     const TrainingSpec& spec) {
  const int p = domain.size();
  std::vector<std::vector<double>> out;
  switch (spec.kind) {
  case TrainingSpec::Kind::Explicit:
    out = spec.points;
    break;
  case TrainingSpec::Kind::Lattice: {
    if (spec.lattice.empty())
      throw ConstructionError("training set: empty lattice specification");
    std::vector<int> sizes = spec.lattice;
    if (sizes.size() == 1)
      sizes.assign(static_cast<std::size_t>(p), sizes.front());
    if (static_cast<int>(sizes.size()) != p)
      throw ConstructionError("training set: lattice dimension does not match the parameter count");
    std::size_t total = 1;
    for (int s : sizes)
      total *= static_cast<std::size_t>(s);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::vector<double> mu(static_cast<std::size_t>(p));
      std::size_t rest = idx;
      for (int i = 0; i < p; ++i) {
        const int k = static_cast<int>(rest % static_cast<std::size_t>(sizes[static_cast<std::size_t>(i)]));
        rest /= static_cast<std::size_t>(sizes[static_cast<std::size_t>(i)]);
        const double lo = domain.lower[static_cast<std::size_t>(i)];
        const double hi = domain.upper[static_cast<std::size_t>(i)];
        const int s = sizes[static_cast<std::size_t>(i)];
        mu[static_cast<std::size_t>(i)] = s == 1 ? 0.5 * (lo + hi) : (k == s - 1 ? hi : lo + (hi - lo) * k / (s - 1));
      }
      out.push_back(std::move(mu));
    }
    break;
  }
  case TrainingSpec::Kind::Random: {
    if (spec.count < 1)
      throw ConstructionError("training set: count must be at least 1");
    std::mt19937_64 rng(spec.seed);
    for (int s = 0; s < spec.count; ++s) {
      std::vector<double> mu(static_cast<std::size_t>(p));
      for (int i = 0; i < p; ++i) {
        std::uniform_real_distribution<double> u(domain.lower[static_cast<std::size_t>(i)],
                                                 domain.upper[static_cast<std::size_t>(i)]);
        mu[static_cast<std::size_t>(i)] = u(rng);
      }
      out.push_back(std::move(mu));
    }
    break;
  }
  }
  if (out.empty())
    throw ConstructionError("training set: no points");
  for (const auto& mu : out)
    domain.check(mu);
  return out;
}

FirstRule FirstRule::parse(const std::string& text) {
  const std::string t = trim(text);
  FirstRule r;
  if (t == "centroid")
    return r;
  if (t.rfind("random:", 0) == 0) {
    r.random = true;
    r.seed = static_cast<std::uint64_t>(parse_int(t.substr(7), "first-parameter seed"));
    return r;
  }
  throw ConstructionError("first parameter rule '" + text + "': expected centroid or random:seed");
}

std::string FirstRule::to_string() const {
  return random ? "random:" + std::to_string(seed) : "centroid";
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, count / 16));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * count / workers; i < (w + 1) * count / workers; ++i)
          body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool)
    t.join();
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

GreedyResult greedy_build(const TruthProblem& truth, const GreedyConfig& config,
                          CoercivityModel coercivity) {
  if (!(config.tol >= 0.0))
    throw ConstructionError("greedy: tolerance must be non-negative");
  if (config.n_max < 1)
    throw ConstructionError("greedy: n_max must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  GreedyResult res;
  res.training = sample_training_set(truth.parameters, config.training);
  const auto& xi = res.training;
  const std::size_t m = xi.size();

  std::size_t next = 0;
  if (config.first.random) {
    std::mt19937_64 rng(config.first.seed);
    next = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
  } else {
    const std::vector<double> c = truth.parameters.centroid();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      double d = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const double w = truth.parameters.upper[k] - truth.parameters.lower[k];
        const double e = (xi[i][k] - c[k]) / (w > 0 ? w : 1.0);
        d += e * e;
      }
      if (d < best) {
        best = d;
        next = i;
      }
    }
  }

  OfflineBuilder builder(truth, std::move(coercivity));
  std::vector<char> used(m, 0);
  std::vector<double> deltas(m, std::numeric_limits<double>::infinity());
  while (true) {
    used[next] = 1;
    const Eigen::VectorXd u = truth_solve(truth.constrained, xi[next]);
    if (!builder.append(u, xi[next])) {
      res.history.collinear.push_back(static_cast<int>(next));
    } else {
      const OnlineModel& model = builder.model();
      double worst = 0.0;
      parallel_for(m, config.threads,
                   [&](std::size_t i) { deltas[i] = online_query(model, xi[i]).delta(config.estimator); });
      for (std::size_t i = 0; i < m; ++i)
        worst = std::max(worst, deltas[i]);
      GreedyStep step;
      step.n = model.n();
      step.mu = xi[next];
      step.training_index = static_cast<int>(next);
      step.max_delta = worst;
      step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res.history.steps.push_back(step);
      if (worst <= config.tol) {
        res.history.converged = true;
        break;
      }
      if (model.n() >= config.n_max)
        break;
    }
    // argmax over unused points, lowest index on ties
    double best = -1.0;
    bool found = false;
    for (std::size_t i = 0; i < m; ++i)
      if (!used[i] && deltas[i] > best) {
        best = deltas[i];
        next = i;
        found = true;
      }
    if (!found) {
      res.history.exact_space = true;
      break;
    }
  }
  res.space = builder.space();
  res.model = builder.model();
  res.final_deltas = deltas;
  return res;
}

std::string convergence_csv(const GreedyHistory& history) {
  std::ostringstream os;
  os.precision(17);
  os << "N,max_delta,training_index,mu\n";
  for (const auto& s : history.steps) {
    os << s.n << "," << s.max_delta << "," << s.training_index << ",";
    for (std::size_t i = 0; i < s.mu.size(); ++i)
      os << (i ? ";" : "") << s.mu[i];
    os << "\n";
  }
  return os.str();
}

std::string convergence_json(const GreedyHistory& history) {
  nlohmann::json j;
  j["converged"] = history.converged;
  j["exact_space"] = history.exact_space;
  j["collinear"] = history.collinear;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : history.steps)
    j["steps"].push_back({{"N", s.n}, {"max_delta", s.max_delta}, {"training_index", s.training_index},
                          {"mu", s.mu}, {"seconds", s.seconds}});
  return j.dump(2);
}

} // namespace rbiga
