#include "savi/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace savi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

struct Where {
  int line;
  std::string key;
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(fmt::format("line {}: key '{}': {}", line, key, what));
  }
};

double to_double(const std::string& s, const Where& w) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) w.fail(fmt::format("'{}' is not a number", s));
  return v;
}

long long to_int(const std::string& s, const Where& w) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) w.fail(fmt::format("'{}' is not an integer", s));
  return v;
}

int to_positive(const std::string& s, const Where& w) {
  const long long v = to_int(s, w);
  if (v < 1) w.fail("must be a positive integer");
  return static_cast<int>(v);
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::string> seen;
  bool has_dag = false;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(fmt::format("line {}: malformed section header", line));
      section = trim(s.substr(1, s.size() - 2));
      if (section != "model" && section != "dag" && section != "optim" && section != "run") {
        throw ConfigError(fmt::format("line {}: unknown section [{}]", line, section));
      }
      if (section == "dag") has_dag = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", line));
    const std::string key = trim(s.substr(0, eq));
    const std::string val = unquote(trim(s.substr(eq + 1)));
    const Where w{line, key};
    if (section.empty()) w.fail("key outside of any section");
    std::string canon = section + "." + (key == "K.default" ? "K" : key);
    if (!seen.insert(canon).second) w.fail("duplicate key");

    if (section == "model") {
      if (key == "kind") {
        if (val != "codec" && val != "quadratic") w.fail("kind must be codec or quadratic");
        c.kind = val;
      } else if (key == "seed") {
        const long long v = to_int(val, w);
        if (v < 0) w.fail("seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(v);
      } else if (key == "T") {
        c.T = to_positive(val, w);
      } else if (key == "d") {
        c.d = to_positive(val, w);
      } else if (key == "lambda0") {
        c.lambda0 = to_double(val, w);
      } else if (key == "precision") {
        c.precision = to_double(val, w);
        if (!(c.precision > 0.0)) w.fail("precision must be positive");
      } else if (key == "evidence") {
        c.evidence.clear();
        for (const auto& item : split(val, ',')) {
          const double x = to_double(item, w);
          if (!(std::abs(x) < 1.0)) w.fail("evidence entries must lie in (-1, 1)");
          c.evidence.push_back(x);
        }
      } else {
        w.fail("unknown key in [model]");
      }
    } else if (section == "dag") {
      if (key == "nodes") {
        c.nodes = to_positive(val, w);
      } else if (key == "edges") {
        try {
          format_edges(parse_edges(val));
        } catch (const GraphError& e) {
          w.fail(e.what());
        }
        c.edges = val;
      } else if (key == "dims") {
        c.dims.clear();
        for (const auto& item : split(val, ',')) c.dims.push_back(to_positive(item, w));
      } else if (key == "coupling") {
        c.coupling = to_double(val, w);
        if (c.coupling < 0.0 || c.coupling > 1.0) w.fail("coupling must lie in [0, 1]");
      } else if (key == "favi_scale") {
        c.favi_scale = to_double(val, w);
      } else {
        w.fail("unknown key in [dag]");
      }
    } else if (section == "optim") {
      if (key == "alpha") {
        c.optim.alpha = to_double(val, w);
        if (!(c.optim.alpha > 0.0)) w.fail("alpha must be positive");
      } else if (key == "K" || key == "K.default") {
        const long long v = to_int(val, w);
        if (v < 0) w.fail("K must be non-negative");
        c.optim.K = static_cast<int>(v);
      } else if (key.rfind("K.node", 0) == 0) {
        const long long id = to_int(key.substr(6), w);
        const long long v = to_int(val, w);
        if (id < 1) w.fail("node id must be positive");
        if (v < 0) w.fail("K must be non-negative");
        c.optim.K_override[static_cast<NodeId>(id)] = static_cast<int>(v);
      } else if (key == "hvp") {
        try {
          c.optim.hvp = parse_hvp_mode(val);
        } catch (const ConfigError& e) {
          w.fail(e.what());
        }
      } else if (key == "optimize") {
        try {
          c.optimize = parse_mask(val);
        } catch (const ConfigError& e) {
          w.fail(e.what());
        }
      } else if (key == "fd.h") {
        c.optim.fd.h = to_double(val, w);
        if (!(c.optim.fd.h > 0.0)) w.fail("must be positive");
      } else if (key == "fd.r") {
        c.optim.fd.r = to_double(val, w);
        if (!(c.optim.fd.r > 0.0)) w.fail("must be positive");
      } else if (key == "fd.scaling") {
        try {
          c.optim.fd.scaling = parse_fd_scaling(val);
        } catch (const std::invalid_argument& e) {
          w.fail(e.what());
        }
      } else if (key == "oracle.h") {
        c.optim.oracle_h = to_double(val, w);
        if (!(c.optim.oracle_h > 0.0)) w.fail("must be positive");
      } else {
        w.fail("unknown key in [optim]");
      }
    } else if (section == "run") {
      if (key == "methods") {
        c.methods.clear();
        for (const auto& item : split(val, ',')) {
          try {
            c.methods.push_back(parse_method(item));
          } catch (const ConfigError& e) {
            w.fail(e.what());
          }
        }
      } else if (key == "out") {
        c.out = val;
      } else if (key == "name") {
        if (val.empty()) w.fail("name must not be empty");
        c.name = val;
      } else if (key == "seed") {
        const long long v = to_int(val, w);
        if (v < 0) w.fail("seed must be non-negative");
        c.optim.seed = static_cast<std::uint64_t>(v);
      } else {
        w.fail("unknown key in [run]");
      }
    }
  }

  if (c.kind == "codec") {
    if (has_dag) throw ConfigError("[dag] is not allowed for codec models; the graph follows from T");
    if (!c.evidence.empty() && static_cast<int>(c.evidence.size()) != c.T * c.d) {
      throw ConfigError(fmt::format("evidence has {} entries, expected T*d = {}", c.evidence.size(),
                                    c.T * c.d));
    }
  } else {
    if (c.nodes < 1) throw ConfigError("quadratic models need [dag] nodes");
    if (c.dims.empty()) c.dims.assign(c.nodes, 2);
    if (static_cast<int>(c.dims.size()) != c.nodes) {
      throw ConfigError(fmt::format("dims lists {} entries for {} nodes", c.dims.size(), c.nodes));
    }
    if (c.optimize != Mask::Joint) throw ConfigError("optimize masks apply to codec models only");
    if (!c.evidence.empty()) throw ConfigError("evidence applies to codec models only");
    LatentDag dag(c.dims, parse_edges(c.edges));
    topo_sort(dag);
  }
  const int n = c.kind == "codec" ? 2 * c.T : c.nodes;
  for (const auto& [node, k] : c.optim.K_override) {
    if (node > n) throw ConfigError(fmt::format("K.node{} refers to a node outside [1, {}]", node, n));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out = "[model]\n";
  out += fmt::format("kind = {}\nseed = {}\n", c.kind, c.seed);
  if (c.kind == "codec") {
    out += fmt::format("T = {}\nd = {}\nlambda0 = {}\nprecision = {}\n", c.T, c.d,
                       format_double(c.lambda0), format_double(c.precision));
    if (!c.evidence.empty()) out += fmt::format("evidence = \"{}\"\n", join_doubles(c.evidence));
  } else {
    out += "\n[dag]\n";
    std::string dims;
    for (std::size_t i = 0; i < c.dims.size(); ++i) dims += (i ? "," : "") + std::to_string(c.dims[i]);
    out += fmt::format("nodes = {}\nedges = \"{}\"\ndims = \"{}\"\ncoupling = {}\nfavi_scale = {}\n",
                       c.nodes, format_edges(parse_edges(c.edges)), dims, format_double(c.coupling),
                       format_double(c.favi_scale));
  }
  const OptimConfig& o = c.optim;
  out += "\n[optim]\n";
  out += fmt::format("alpha = {}\nK.default = {}\n", format_double(o.alpha), o.K);
  for (const auto& [node, k] : o.K_override) out += fmt::format("K.node{} = {}\n", node, k);
  out += fmt::format("hvp = {}\noptimize = {}\n", to_string(o.hvp), to_string(c.optimize));
  out += fmt::format("fd.h = {}\nfd.r = {}\nfd.scaling = {}\noracle.h = {}\n", format_double(o.fd.h),
                     format_double(o.fd.r), to_string(o.fd.scaling), format_double(o.oracle_h));
  out += "\n[run]\n";
  std::string methods;
  for (std::size_t i = 0; i < c.methods.size(); ++i) methods += (i ? "," : "") + to_string(c.methods[i]);
  out += fmt::format("methods = \"{}\"\nout = \"{}\"\nname = {}\nseed = {}\n", methods, c.out, c.name,
                     o.seed);
  return out;
}

std::unique_ptr<Model> build_model(const ExperimentConfig& c) {
  if (c.kind == "codec") {
    std::optional<std::vector<Eigen::VectorXd>> ev;
    if (!c.evidence.empty()) {
      ev.emplace();
      for (int t = 0; t < c.T; ++t) {
        Eigen::VectorXd f(c.d);
        for (int k = 0; k < c.d; ++k) f[k] = c.evidence[t * c.d + k];
        ev->push_back(f);
      }
    }
    return std::make_unique<CodecModel>(make_codec(c.T, c.d, c.lambda0, c.seed, c.precision, ev));
  }
  LatentDag dag(c.dims, parse_edges(c.edges));
  return std::make_unique<QuadraticModel>(
      make_quadratic(dag, {c.seed, c.coupling, c.favi_scale}));
}

OptimConfig effective_optim(const ExperimentConfig& c) {
  OptimConfig o = c.optim;
  if (c.kind == "codec") {
    auto frozen = frozen_nodes(c.optimize, c.T);
    o.frozen.insert(frozen.begin(), frozen.end());
  }
  return o;
}

}  // namespace savi
