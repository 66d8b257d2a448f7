#include "rbiga/archive.hpp"

#include "rbiga/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace rbiga {

using nlohmann::json;

namespace {

constexpr char magic[8] = {'R', 'B', 'I', 'G', 'A', '0', '1', '\0'};

template <class T>
void put(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

class Reader {
public:
  explicit Reader(const std::string& s) : s_(s) {}

  template <class T>
  T get() {
    need(sizeof(T));
    unsigned char b[sizeof(T)];
    std::memcpy(b, s_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string t = s_.substr(pos_, n);
    pos_ += n;
    return t;
  }
  bool done() const { return pos_ == s_.size(); }

private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n)
      throw ConstructionError("archive is truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

using Blocks = std::map<std::string, Eigen::MatrixXd>;

void put_block(std::string& out, const std::string& name, const Eigen::MatrixXd& m) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      put<double>(out, m(r, c));
}

Eigen::MatrixXd column(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> as_vector(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.size()}; }

Eigen::MatrixXd points_block(const std::vector<std::vector<double>>& pts, int p) {
  Eigen::MatrixXd m(p, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t s = 0; s < pts.size(); ++s)
    for (int i = 0; i < p; ++i)
      m(i, static_cast<Eigen::Index>(s)) = pts[s][static_cast<std::size_t>(i)];
  return m;
}

std::vector<std::vector<double>> points_of(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    out.push_back(as_vector(m.col(c)));
  return out;
}

std::vector<std::string> strings_of(const std::vector<ScalarExpression>& e) {
  std::vector<std::string> out;
  for (const auto& x : e)
    out.push_back(x.to_string());
  return out;
}

std::vector<ScalarExpression> expressions_of(const json& j) {
  std::vector<ScalarExpression> out;
  for (const auto& s : j)
    out.push_back(ScalarExpression::parse(s.get<std::string>()));
  return out;
}

const Eigen::MatrixXd& block(const Blocks& b, const std::string& name) {
  const auto it = b.find(name);
  if (it == b.end())
    throw ConstructionError("archive lacks block '" + name + "'");
  return it->second;
}

} // namespace

json history_to_json(const GreedyHistory& h) {
  json steps = json::array();
  for (const auto& s : h.steps)
    steps.push_back({{"N", s.n}, {"max_delta", s.max_delta}, {"training_index", s.training_index}, {"mu", s.mu}});
  return {{"steps", steps}, {"collinear", h.collinear}, {"converged", h.converged}, {"exact_space", h.exact_space}};
}

GreedyHistory history_from_json(const json& j) {
  GreedyHistory h;
  for (const auto& s : j.at("steps"))
    h.steps.push_back({s.at("N").get<int>(), s.at("mu").get<std::vector<double>>(),
                       s.at("training_index").get<int>(), s.at("max_delta").get<double>(), 0.0});
  h.collinear = j.at("collinear").get<std::vector<int>>();
  h.converged = j.at("converged").get<bool>();
  h.exact_space = j.at("exact_space").get<bool>();
  return h;
}

std::string serialize_archive(const ReducedModelArchive& a) {
  const OnlineModel& m = a.model;
  const CoercivityModel& c = m.coercivity;
  const int p = m.parameters.size();
  json header = {{"format", "RBIGA01"},
                 {"case", a.case_name},
                 {"level", a.level},
                 {"P", p},
                 {"Q", m.q()},
                 {"Q_f", m.q_f()},
                 {"N", m.n()},
                 {"dof_count", a.dof_count},
                 {"theta_a", strings_of(m.theta_a)},
                 {"theta_f", strings_of(m.theta_f)},
                 {"greedy", greedy_to_json(a.settings)},
                 {"history", history_to_json(a.history)},
                 {"coercivity",
                  {{"strategy", to_string(c.strategy)},
                   {"thetas", strings_of(c.thetas)},
                   {"neighbors", c.neighbors},
                   {"epsilon", c.epsilon},
                   {"converged", c.converged},
                   {"samples", c.samples.size()}}}};
  const std::string text = header.dump();

  Blocks b;
  Eigen::MatrixXd params(3, p);
  for (int i = 0; i < p; ++i) {
    const auto k = static_cast<std::size_t>(i);
    params(0, i) = m.parameters.lower[k];
    params(1, i) = m.parameters.upper[k];
    params(2, i) = m.parameters.mu_ref[k];
  }
  b["parameters"] = params;
  for (int q = 0; q < m.q(); ++q)
    b["a_n/" + std::to_string(q)] = m.a_n[static_cast<std::size_t>(q)];
  for (int q = 0; q < m.q_f(); ++q)
    b["f_n/" + std::to_string(q)] = m.f_n[static_cast<std::size_t>(q)];
  b["residual/gram"] = m.residual.gram;
  b["residual/factor"] = m.residual.factor;
  b["coercivity/theta_ref"] = c.theta_ref;
  b["coercivity/box_lower"] = c.box_lower;
  b["coercivity/box_upper"] = c.box_upper;
  b["coercivity/distance_scale"] = column(c.distance_scale);
  std::vector<std::vector<double>> smu;
  Eigen::MatrixXd salpha(1, static_cast<Eigen::Index>(c.samples.size()));
  Eigen::MatrixXd stheta(c.thetas.size(), static_cast<Eigen::Index>(c.samples.size()));
  for (std::size_t s = 0; s < c.samples.size(); ++s) {
    smu.push_back(c.samples[s].mu);
    salpha(0, static_cast<Eigen::Index>(s)) = c.samples[s].alpha;
    stheta.col(static_cast<Eigen::Index>(s)) = c.samples[s].theta;
  }
  b["scm/mu"] = points_block(smu, p);
  b["scm/alpha"] = salpha;
  b["scm/theta"] = stheta;
  b["basis/z"] = a.basis;
  Eigen::MatrixXd free(static_cast<Eigen::Index>(a.free_dofs.size()), 1);
  for (std::size_t i = 0; i < a.free_dofs.size(); ++i)
    free(static_cast<Eigen::Index>(i), 0) = a.free_dofs[i];
  b["basis/free_dofs"] = free;
  b["basis/samples"] = points_block(a.samples, p);

  std::string out(magic, sizeof magic);
  put<std::uint64_t>(out, text.size());
  out += text;
  put<std::uint64_t>(out, b.size());
  for (const auto& [name, mat] : b)
    put_block(out, name, mat);
  return out;
}

ReducedModelArchive deserialize_archive(const std::string& bytes) {
  Reader r(bytes);
  if (r.text(sizeof magic) != std::string(magic, sizeof magic))
    throw ConstructionError("not a reduced-model archive (bad magic)");
  json header;
  try {
    header = json::parse(r.text(r.get<std::uint64_t>()));
  } catch (const json::exception& e) {
    throw ConstructionError(std::string("archive header: ") + e.what());
  }
  Blocks b;
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.text(r.get<std::uint32_t>());
    const auto rows = static_cast<Eigen::Index>(r.get<std::uint64_t>());
    const auto cols = static_cast<Eigen::Index>(r.get<std::uint64_t>());
    if (rows < 0 || cols < 0 || (rows > 0 && static_cast<std::size_t>(cols) > bytes.size() / 8 / static_cast<std::size_t>(rows)))
      throw ConstructionError("archive block '" + name + "' has an impossible shape");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index k = 0; k < rows; ++k)
        m(k, c) = r.get<double>();
    b[name] = std::move(m);
  }
  if (!r.done())
    throw ConstructionError("archive has trailing bytes");

  ReducedModelArchive a;
  try {
    a.case_name = header.at("case").get<std::string>();
    a.level = header.at("level").get<int>();
    a.dof_count = header.at("dof_count").get<int>();
    a.settings = greedy_from_json(header.at("greedy"));
    a.history = history_from_json(header.at("history"));
    const int p = header.at("P").get<int>();
    const int q = header.at("Q").get<int>();
    const int qf = header.at("Q_f").get<int>();
    const int n = header.at("N").get<int>();

    OnlineModel& m = a.model;
    const Eigen::MatrixXd& params = block(b, "parameters");
    if (params.rows() != 3 || params.cols() != p)
      throw ConstructionError("archive parameter block does not match P");
    m.parameters = ParameterDomain(as_vector(params.row(0)), as_vector(params.row(1)), as_vector(params.row(2)));
    m.theta_a = expressions_of(header.at("theta_a"));
    m.theta_f = expressions_of(header.at("theta_f"));
    if (m.q() != q || m.q_f() != qf)
      throw ConstructionError("archive coefficient-function counts do not match Q and Q_f");
    for (int k = 0; k < q; ++k)
      m.a_n.push_back(block(b, "a_n/" + std::to_string(k)));
    for (int k = 0; k < qf; ++k)
      m.f_n.push_back(block(b, "f_n/" + std::to_string(k)).col(0));
    if (m.n() != n && q > 0)
      throw ConstructionError("archive reduced matrices do not match N");
    m.residual.q_f = qf;
    m.residual.q_a = q;
    m.residual.n = n;
    m.residual.gram = block(b, "residual/gram");
    m.residual.factor = block(b, "residual/factor");
    if (m.residual.gram.rows() != m.residual.size() || m.residual.factor.rows() != m.residual.size())
      throw ConstructionError("archive residual blocks do not match Q_f + Q N");

    const json& jc = header.at("coercivity");
    CoercivityModel& c = m.coercivity;
    c.strategy = jc.at("strategy").get<std::string>() == "scm" ? CoercivityStrategy::Scm
                                                                : CoercivityStrategy::MinTheta;
    c.thetas = expressions_of(jc.at("thetas"));
    c.neighbors = jc.at("neighbors").get<int>();
    c.epsilon = jc.at("epsilon").get<double>();
    c.converged = jc.at("converged").get<bool>();
    c.theta_ref = block(b, "coercivity/theta_ref").col(0);
    c.box_lower = block(b, "coercivity/box_lower").col(0);
    c.box_upper = block(b, "coercivity/box_upper").col(0);
    c.distance_scale = as_vector(block(b, "coercivity/distance_scale"));
    const auto smu = points_of(block(b, "scm/mu"));
    const Eigen::MatrixXd& salpha = block(b, "scm/alpha");
    const Eigen::MatrixXd& stheta = block(b, "scm/theta");
    for (std::size_t s = 0; s < smu.size(); ++s)
      c.samples.push_back({smu[s], salpha(0, static_cast<Eigen::Index>(s)), stheta.col(static_cast<Eigen::Index>(s))});
    if (c.samples.size() != jc.at("samples").get<std::size_t>())
      throw ConstructionError("archive sample count mismatch");

    a.basis = block(b, "basis/z");
    for (Eigen::Index i = 0; i < block(b, "basis/free_dofs").rows(); ++i)
      a.free_dofs.push_back(static_cast<int>(block(b, "basis/free_dofs")(i, 0)));
    a.samples = points_of(block(b, "basis/samples"));
  } catch (const json::exception& e) {
    throw ConstructionError(std::string("archive header: ") + e.what());
  }
  return a;
}

void save_archive(const std::filesystem::path& path, const ReducedModelArchive& a) {
  write_text(path, serialize_archive(a));
}

ReducedModelArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConstructionError("cannot open archive " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_archive(ss.str());
}

} // namespace rbiga
