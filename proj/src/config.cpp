#include "netmech/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "netmech/errors.hpp"

namespace netmech {

namespace {

double number(const Config& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

double required_number(const Config& obj, const char* key, const char* where) {
  if (!obj.contains(key)) throw ConfigError(std::string(where) + " requires '" + key + "'");
  return number(obj, key, 0.0);
}

std::size_t count(const Config& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

const Config& section(const Config& cfg, const char* key) {
  static const Config empty = Config::object();
  if (!cfg.is_object() || !cfg.contains(key)) return empty;
  const auto& s = cfg.at(key);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + key + "' must be an object");
  return s;
}

} // namespace

Config parse_config(const std::string& text) {
  try {
    Config cfg = Config::parse(text, nullptr, true, /*ignore_comments=*/true);
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(Config& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Config value;
  try {
    value = Config::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  Config* node = &cfg;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = Config::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

MarketParams params_from_config(const Config& cfg) {
  const auto& p = section(cfg, "params");
  MarketParams mp;
  mp.a = number(p, "a", mp.a);
  mp.b = number(p, "b", mp.b);
  mp.s = number(p, "s", mp.s);
  mp.t = number(p, "t", mp.t);
  mp.p = number(p, "p", mp.p);
  return mp;
}

TypeDistribution distribution_from_config(const Config& cfg) {
  const auto& d = section(cfg, "distribution");
  const std::string family = d.value("family", std::string("uniform"));
  const double lower = number(d, "lower", 0.4);
  const double upper = number(d, "upper", 0.8);
  try {
    if (family == "uniform") return TypeDistribution::uniform(lower, upper);
    if (family == "truncated_normal") {
      return TypeDistribution::truncated_normal(required_number(d, "mu", "truncated_normal"),
                                                required_number(d, "sigma", "truncated_normal"), lower, upper);
    }
    if (family == "truncated_exponential") {
      return TypeDistribution::truncated_exponential(required_number(d, "rate", "truncated_exponential"), lower,
                                                     upper);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid distribution: ") + e.what());
  }
  throw ConfigError("unknown distribution family '" + family + "'");
}

Network network_from_config(const Config& cfg, std::uint64_t seed) {
  const auto& nw = section(cfg, "network");
  const std::string kind = nw.value("kind", std::string("complete"));
  const std::size_t n = count(nw, "n", 5);
  const double weight = number(nw, "weight", 1.0);
  try {
    if (kind == "edges") {
      if (!nw.contains("edges") || !nw.at("edges").is_array()) throw ConfigError("network kind 'edges' requires an edge list");
      const bool directed = nw.value("directed", false);
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (const auto& e : nw.at("edges")) {
        if (!e.is_array() || e.size() < 2 || e.size() > 3) throw ConfigError("edge must be [i, j] or [i, j, w]");
        const auto i = e.at(0).get<std::size_t>();
        const auto j = e.at(1).get<std::size_t>();
        const double w = e.size() == 3 ? e.at(2).get<double>() : weight;
        if (i >= n || j >= n || i == j) throw ConfigError("edge endpoint out of range or self-loop");
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
        if (!directed) g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w;
      }
      return Network(std::move(g));
    }
    std::optional<std::size_t> k;
    if (nw.contains("k")) k = count(nw, "k", 0);
    const std::uint64_t net_seed = nw.contains("seed") ? nw.at("seed").get<std::uint64_t>() : seed;
    return make_network(parse_network_kind(kind), n, net_seed, k, weight);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid network: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid network: ") + e.what());
  }
}

Scenario scenario_from_config(const Config& cfg, std::uint64_t seed) {
  return Scenario{network_from_config(cfg, seed), params_from_config(cfg), distribution_from_config(cfg)};
}

ExpectationEngine engine_from_config(const Config& cfg, std::size_t users, std::uint64_t seed) {
  const auto& e = section(cfg, "engine");
  ExpectationEngine engine;
  const std::string default_kind = users <= ExpectationEngine::kMaxQuadratureUsers ? "quadrature" : "mc";
  const std::string kind = e.value("kind", default_kind);
  if (kind == "quadrature") {
    engine.kind = ExpectationEngine::Kind::Quadrature;
  } else if (kind == "mc") {
    engine.kind = ExpectationEngine::Kind::MonteCarlo;
  } else {
    throw ConfigError("unknown engine '" + kind + "' (expected quadrature or mc)");
  }
  engine.quad_order = count(e, "quad_order", engine.quad_order);
  engine.mc_samples = count(e, "mc_samples", engine.mc_samples);
  engine.seed = seed;
  engine.threads = static_cast<unsigned>(count(cfg, "threads", 0));
  return engine;
}

std::uint64_t seed_from_config(const Config& cfg) {
  if (const char* env = std::getenv("NETMECH_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') throw ConfigError("NETMECH_SEED must be an unsigned integer");
    return v;
  }
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned()) throw ConfigError("config key 'seed' must be an unsigned integer");
    return cfg.at("seed").get<std::uint64_t>();
  }
  return 1;
}

ExperimentSpec experiment_spec_from_config(const Config& cfg, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.params = params_from_config(cfg);
  spec.dist = distribution_from_config(cfg);
  spec.engine = engine_from_config(cfg, 5, seed);
  spec.seed = seed;
  spec.threads = spec.engine.threads;
  spec.grid = count(cfg, "grid", spec.grid);
  spec.true_grid = count(cfg, "true_grid", spec.true_grid);
  spec.report_grid = count(cfg, "report_grid", spec.report_grid);
  const auto& ex = section(cfg, "experiments");
  try {
    if (ex.contains("fig3_true_types")) spec.fig3_true_types = ex.at("fig3_true_types").get<std::vector<double>>();
    if (ex.contains("table1_theta")) {
      const auto v = ex.at("table1_theta").get<std::vector<double>>();
      spec.table1_theta = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (ex.contains("table2_sizes")) spec.table2_sizes = ex.at("table2_sizes").get<std::vector<std::size_t>>();
    if (ex.contains("fig6_sizes")) spec.fig6_sizes = ex.at("fig6_sizes").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiments section: ") + e.what());
  }
  spec.table2_repetitions = count(ex, "table2_repetitions", spec.table2_repetitions);
  spec.fig6_samples = count(ex, "fig6_samples", spec.fig6_samples);
  spec.fig6_grid = count(ex, "fig6_grid", spec.fig6_grid);
  return spec;
}

} // namespace netmech
