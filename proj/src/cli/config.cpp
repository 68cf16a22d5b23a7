#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "stochavg/cli.hpp"
#include "stochavg/error.hpp"

namespace stochavg::cli {

using linalg::Matrix;

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col), "invalid JSON");
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

std::string canonical_json(const json& j) { return j.dump(); }

std::uint64_t config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_json(j)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void apply_overrides(json& j, const Overrides& o) {
  if (o.seed) j["seed"] = *o.seed;
  if (o.trials) j["trials"] = *o.trials;
  if (o.horizon) j["horizon"] = *o.horizon;
  if (o.stride) j["record_stride"] = *o.stride;
  if (o.full_state) j["record_state"] = true;
}

namespace {

// Read-only cursor into the config that knows its JSON pointer.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_.empty() ? "/" : path_, msg); }

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Node at(const char* key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) Node(*j_, path_ + "/" + key).fail("missing required field");
    return Node((*j_)[key], path_ + "/" + key);
  }

  std::optional<Node> opt(const char* key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Node at(std::size_t i) const { return Node((*j_)[i], path_ + "/" + std::to_string(i)); }

  void allow(std::initializer_list<const char*> keys) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [k, v] : j_->items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        Node(v, path_ + "/" + k).fail("unknown field");
      }
    }
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t uint() const {
    if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
    if (j_->is_number_integer() && j_->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j_->get<std::int64_t>());
    fail("expected a nonnegative integer");
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::vector<double> numbers() const {
    std::vector<double> v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i).number();
    return v;
  }

  Matrix matrix() const {
    const std::size_t r = size();
    if (r == 0) fail("expected a non-empty matrix");
    const std::size_t c = at(std::size_t{0}).size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      const Node row = at(i);
      if (row.size() != c) row.fail("row length " + std::to_string(row.size()) + " differs from " + std::to_string(c));
      for (std::size_t k = 0; k < c; ++k) m(i, k) = row.at(k).number();
    }
    return m;
  }

  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

 private:
  const json* j_;
  std::string path_;
};

// Library errors raised while building a component are reported at its node.
template <class F>
auto at_node(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    node.fail(e.what());
  }
}

graph::Digraph parse_graph(const Node& node, std::size_t n) {
  if (node.has("adjacency")) {
    node.allow({"adjacency"});
    const Node a = node.at("adjacency");
    Matrix m = a.matrix();
    if (m.rows() != n || m.cols() != n) a.fail("adjacency must be " + std::to_string(n) + " x " + std::to_string(n));
    return at_node(a, [&] { return graph::Digraph(std::move(m)); });
  }
  node.allow({"family", "weight"});
  const std::string family = node.at("family").str();
  const double w = node.number_or("weight", 1.0);
  if (family == "complete") return graph::complete_graph(n, w);
  if (family == "ring") return graph::undirected_ring(n, w);
  if (family == "directed_ring") return graph::directed_ring(n, w);
  if (family == "reverse_ring") return graph::Digraph(graph::directed_ring(n, w).adjacency().transpose());
  if (family == "path") return graph::path_graph(n, w);
  if (family == "star") return graph::star_inward(n, w);
  if (family == "empty") return graph::empty_graph(n);
  node.at("family").fail("unknown graph family '" + family +
                         "' (complete, ring, directed_ring, reverse_ring, path, star, empty)");
}

std::vector<graph::Digraph> parse_graphs(const Node& node, std::size_t n) {
  std::vector<graph::Digraph> gs;
  if (node.size() == 0) node.fail("expected at least one graph");
  for (std::size_t i = 0; i < node.size(); ++i) gs.push_back(parse_graph(node.at(i), n));
  return gs;
}

std::vector<double> uniform_law(std::size_t m) { return std::vector<double>(m, 1.0 / static_cast<double>(m)); }

flows::GraphFlow parse_flow(const Node& node, std::size_t n) {
  const std::string kind = node.at("kind").str();
  if (kind == "fixed") {
    node.allow({"kind", "graph"});
    return flows::GraphFlow::deterministic({parse_graph(node.at("graph"), n)});
  }
  if (kind == "periodic") {
    node.allow({"kind", "graphs"});
    return flows::GraphFlow::deterministic(parse_graphs(node.at("graphs"), n));
  }
  if (kind == "iid") {
    node.allow({"kind", "graphs", "probabilities"});
    auto gs = parse_graphs(node.at("graphs"), n);
    auto p = node.has("probabilities") ? node.at("probabilities").numbers() : uniform_law(gs.size());
    return at_node(node, [&] { return flows::GraphFlow::iid(std::move(gs), std::move(p)); });
  }
  if (kind == "markov") {
    node.allow({"kind", "graphs", "transition", "initial"});
    auto gs = parse_graphs(node.at("graphs"), n);
    const Node t = node.at("transition");
    Matrix p = t.matrix();
    auto init = node.has("initial") ? node.at("initial").numbers() : uniform_law(gs.size());
    return at_node(node, [&] { return flows::GraphFlow::markov(std::move(gs), std::move(p), std::move(init)); });
  }
  if (kind == "bernoulli") {
    node.allow({"kind", "base", "p"});
    const auto base = parse_graph(node.at("base"), n);
    const double p = node.at("p").number();
    return at_node(node, [&] { return flows::GraphFlow::bernoulli_edge_failure(base, p); });
  }
  node.at("kind").fail("unknown flow kind '" + kind + "' (fixed, periodic, iid, markov, bernoulli)");
}

noise::IntensityFunction parse_intensity(const Node& node, bool& custom) {
  const std::string form = node.has("form") ? node.at("form").str() : "affine";
  const double sigma = node.number_or("sigma", 0.0);
  const double b = node.number_or("b", 0.0);
  return at_node(node, [&]() -> noise::IntensityFunction {
    if (form == "affine") {
      node.allow({"form", "sigma", "b", "from", "to"});
      return noise::IntensityFunction::affine(sigma, b);
    }
    if (form == "additive") {
      node.allow({"form", "b", "from", "to"});
      return noise::IntensityFunction::additive(b);
    }
    if (form == "multiplicative") {
      node.allow({"form", "sigma", "from", "to"});
      return noise::IntensityFunction::multiplicative(sigma);
    }
    if (form == "tabulated") {
      node.allow({"form", "sigma", "b", "x", "y", "from", "to"});
      return noise::IntensityFunction::tabulated(node.at("x").numbers(), node.at("y").numbers(), sigma, b);
    }
    if (form == "custom") {
      node.allow({"form", "sigma", "b", "function", "from", "to"});
      custom = true;
      const std::string fn = node.at("function").str();
      if (fn == "tanh") {
        return noise::IntensityFunction::custom([sigma, b](double x) { return sigma * std::tanh(std::abs(x)) + b; },
                                                sigma, b, "tanh");
      }
      if (fn == "square") {
        return noise::IntensityFunction::custom([](double x) { return x * x; }, sigma, b, "square");
      }
      node.at("function").fail("unknown custom intensity '" + fn + "' (tanh, square)");
    }
    node.at("form").fail("unknown intensity form '" + form + "' (affine, additive, multiplicative, tabulated, custom)");
  });
}

Matrix equicorrelated_mixing(std::size_t m, double r) {
  // C C^T = (1 - r) I + r 1 1^T
  const double a = std::sqrt(1.0 - r);
  const double d = (std::sqrt(1.0 + (static_cast<double>(m) - 1.0) * r) - a) / static_cast<double>(m);
  Matrix c(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) c(i, j) = d + (i == j ? a : 0.0);
  return c;
}

noise::NoiseModel parse_noise(const Node& node, std::size_t n) {
  const std::string kind = node.at("kind").str();
  auto model = at_node(node, [&]() -> noise::NoiseModel {
    if (kind == "gaussian") {
      node.allow({"kind", "std", "beta"});
      return noise::NoiseModel::iid_gaussian(n, node.number_or("std", 1.0));
    }
    if (kind == "uniform") {
      node.allow({"kind", "half_width", "beta"});
      return noise::NoiseModel::iid_uniform(n, node.number_or("half_width", std::sqrt(3.0)));
    }
    if (kind == "temporal") {
      node.allow({"kind", "std", "beta"});
      return noise::NoiseModel::temporally_dependent(n, node.number_or("std", 1.0));
    }
    if (kind == "spatial") {
      node.allow({"kind", "std", "mixing", "correlation", "beta"});
      const std::size_t m = n * n;
      Matrix c = Matrix::identity(m);
      if (node.has("mixing")) {
        const Node mix = node.at("mixing");
        c = mix.matrix();
        if (c.rows() != m || c.cols() != m) mix.fail("mixing must be n^2 x n^2 = " + std::to_string(m) + " square");
      } else if (node.has("correlation")) {
        const double r = node.at("correlation").number();
        if (!(r > -1.0 / (static_cast<double>(m) - 1.0) && r < 1.0)) {
          node.at("correlation").fail("correlation must lie in (-1/(n^2-1), 1)");
        }
        c = equicorrelated_mixing(m, r);
      }
      return noise::NoiseModel::spatially_correlated(n, std::move(c), node.number_or("std", 1.0));
    }
    node.at("kind").fail("unknown noise kind '" + kind + "' (gaussian, uniform, temporal, spatial)");
  });
  if (node.has("beta")) {
    const Node b = node.at("beta");
    const double v = b.number();
    at_node(b, [&] {
      model.declare_beta(v);
      return 0;
    });
  }
  return model;
}

std::vector<double> parse_x0(const Node& node, std::optional<std::size_t> n) {
  if (node.raw().is_array()) {
    auto v = node.numbers();
    if (v.empty()) node.fail("x0 must hold at least one value");
    if (n && v.size() != *n) node.fail("x0 has " + std::to_string(v.size()) + " entries, n = " + std::to_string(*n));
    return v;
  }
  if (!n) node.fail("a patterned x0 needs a top-level n");
  const std::size_t size = *n;
  const std::string pattern = node.at("pattern").str();
  std::vector<double> x(size);
  if (pattern == "linear") {
    node.allow({"pattern", "low", "high"});
    const double lo = node.number_or("low", 0.0), hi = node.number_or("high", 1.0);
    for (std::size_t i = 0; i < size; ++i)
      x[i] = size == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(size - 1);
  } else if (pattern == "alternating") {
    node.allow({"pattern", "scale"});
    const double s = node.number_or("scale", 1.0);
    for (std::size_t i = 0; i < size; ++i) x[i] = i % 2 == 0 ? s : -s;
  } else if (pattern == "constant") {
    node.allow({"pattern", "value"});
    std::fill(x.begin(), x.end(), node.number_or("value", 0.0));
  } else {
    node.at("pattern").fail("unknown x0 pattern '" + pattern + "' (linear, alternating, constant)");
  }
  return x;
}

}  // namespace

Config parse_config(const json& j) {
  const Node root(j, "");
  root.allow({"name", "description", "n", "x0", "flow", "noise", "intensity", "intensity_overrides", "gain", "horizon",
              "record_stride", "trials", "seed", "h", "mean_v_epsilon", "record_state"});
  std::optional<std::size_t> n;
  if (root.has("n")) {
    n = root.at("n").uint();
    if (*n < 1) root.at("n").fail("n must be >= 1");
  }
  auto x0 = parse_x0(root.at("x0"), n);
  const std::size_t size = x0.size();

  auto flow = parse_flow(root.at("flow"), size);
  auto noise_model = root.has("noise") ? parse_noise(root.at("noise"), size) : noise::NoiseModel::iid_gaussian(size, 1.0);

  bool custom = false;
  auto shared = root.has("intensity") ? parse_intensity(root.at("intensity"), custom)
                                      : noise::IntensityFunction::affine(0.0, 0.0);
  noise::IntensityField field(size, std::move(shared));
  if (root.has("intensity_overrides")) {
    const Node list = root.at("intensity_overrides");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node o = list.at(i);
      const std::uint64_t from = o.at("from").uint(), to = o.at("to").uint();
      if (from >= size) o.at("from").fail("agent index out of range");
      if (to >= size) o.at("to").fail("agent index out of range");
      field.set(from, to, parse_intensity(o, custom));
    }
  }

  gain::GainSchedule g;
  if (root.has("gain")) {
    const Node gn = root.at("gain");
    gn.allow({"a", "k0", "gamma"});
    g.a = gn.number_or("a", g.a);
    if (gn.has("k0")) g.k0 = gn.at("k0").uint();
    g.gamma = gn.number_or("gamma", g.gamma);
    at_node(gn, [&] {
      gain::require_valid(g);
      return 0;
    });
  }

  Config cfg{j,
             engine::SimConfig{.x0 = std::move(x0),
                               .flow = std::move(flow),
                               .noise = std::move(noise_model),
                               .intensities = std::move(field),
                               .gain = g},
             1, 1e-2, custom};
  auto& sim = cfg.sim;
  if (root.has("horizon")) sim.horizon = root.at("horizon").uint();
  if (root.has("record_stride")) {
    sim.record_stride = root.at("record_stride").uint();
    if (sim.record_stride < 1) root.at("record_stride").fail("record_stride must be >= 1");
  }
  if (root.has("trials")) {
    sim.trials = root.at("trials").uint();
    if (sim.trials < 1) root.at("trials").fail("trials must be >= 1");
  }
  if (root.has("seed")) sim.base_seed = root.at("seed").uint();
  if (root.has("record_state")) sim.record_state = root.at("record_state").boolean();
  if (root.has("h")) {
    cfg.h = root.at("h").uint();
    if (cfg.h < 1) root.at("h").fail("h must be >= 1");
  }
  if (root.has("mean_v_epsilon")) cfg.mean_v_epsilon = root.at("mean_v_epsilon").number();
  return cfg;
}

}  // namespace stochavg::cli
