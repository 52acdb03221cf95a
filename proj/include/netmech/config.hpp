#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "netmech/experiments.hpp"
#include "netmech/market.hpp"

namespace netmech {

/// Scenario configuration: a JSON document, `//` and `/* */` comments allowed.
///
///   {
///     "params":       {"a": 0.5, "b": 6, "s": 1, "t": 1, "p": 0.1},
///     "network":      {"kind": "complete" | "star" | "hub" | "edges" | "random_k",
///                      "n": 5, "k": 2, "seed": 7, "weight": 1,
///                      "edges": [[0, 1], [1, 2, 0.5]], "directed": false},
///     "distribution": {"family": "uniform" | "truncated_normal" | "truncated_exponential",
///                      "lower": 0.4, "upper": 0.8, "mu": .., "sigma": .., "rate": ..},
///     "seed": 1,
///     "engine": {"kind": "quadrature" | "mc", "quad_order": 8, "mc_samples": 20000},
///     "grid": 64, "true_grid": 21, "report_grid": 201, "threads": 0
///   }
///
/// Missing params default to s=1, t=1, a=0.5, b=6, p=0.1 and a missing
/// distribution to uniform on [0.4, 0.8].
using Config = nlohmann::json;

Config load_config(const std::string& path);
Config parse_config(const std::string& text);

/// Applies "dotted.key=value"; value is parsed as JSON when possible, else
/// kept as a string.
void apply_override(Config& cfg, const std::string& assignment);

MarketParams params_from_config(const Config& cfg);
TypeDistribution distribution_from_config(const Config& cfg);
Network network_from_config(const Config& cfg, std::uint64_t seed);
/// Builds the scenario without validating it.
Scenario scenario_from_config(const Config& cfg, std::uint64_t seed);
ExpectationEngine engine_from_config(const Config& cfg, std::size_t users, std::uint64_t seed);
ExperimentSpec experiment_spec_from_config(const Config& cfg, std::uint64_t seed);

/// Seed precedence: NETMECH_SEED environment variable over the config's "seed", default 1.
std::uint64_t seed_from_config(const Config& cfg);

} // namespace netmech
