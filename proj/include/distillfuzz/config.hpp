#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "distillfuzz/bugs.hpp"

namespace distillfuzz {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Virtual cost of one execution: a fixed harness overhead plus a per-step
// charge for the instrumented DUT and a smaller one for the reference model.
// Campaign time advances only by these charges, so runs are reproducible.
struct CostModel {
  double exec_overhead_s = 0.002;
  double dut_step_s = 0.00005;
  double golden_step_s = 0.000005;
  double extract_slot_s = 0.00001;  // relation extraction, per replayed slot

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct CampaignConfig {
  double budget_s = 1800;
  std::uint64_t rng_seed = 0;
  double rho = 0.5;
  double omega = 2.0;
  std::size_t len_threshold = 400;
  double intr_prob = 0.5;
  std::size_t max_intr = 3;
  std::size_t max_exc = 3;
  BugSet bugs = BugSet::all();
  bool no_vaco = false;
  bool no_seedsel = false;
  bool no_mutsel = false;
  bool no_relations = false;
  std::size_t simple_cap = 0;  // 0 = off
  std::size_t max_iter = 64;
  std::size_t vaco_window = 5;
  std::size_t initial_seeds = 16;
  std::size_t initial_len = 4;
  std::size_t history = 16;
  std::size_t dict_capacity = 256;
  CostModel cost;

  friend bool operator==(const CampaignConfig&, const CampaignConfig&) = default;
};

inline void validate(const CampaignConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(c.budget_s >= 0) || !std::isfinite(c.budget_s)) fail("budget must be a finite value >= 0");
  if (!(c.rho > 0 && c.rho < 1)) fail("rho must be in (0, 1)");
  if (!(c.omega >= 0) || !std::isfinite(c.omega)) fail("omega must be >= 0");
  if (c.len_threshold == 0) fail("len-threshold must be > 0");
  if (!(c.intr_prob >= 0 && c.intr_prob <= 1)) fail("intr-prob must be in [0, 1]");
  if (c.max_iter == 0) fail("max-iter must be > 0");
  if (c.vaco_window < 2) fail("vaco-window must be >= 2");
  if (c.initial_seeds == 0 || c.initial_len == 0) fail("initial corpus must be non-empty");
  if (c.history == 0) fail("history must be > 0");
  const auto& m = c.cost;
  if (!(m.exec_overhead_s > 0) || !(m.dut_step_s >= 0) || !(m.golden_step_s >= 0) ||
      !(m.extract_slot_s >= 0))
    fail("cost model values must be non-negative, overhead positive");
}

// "90", "90s", "30m", "24h", "2d"; fractional values allowed.
inline std::optional<double> parse_budget(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double mult = 1;
  switch (s.back()) {
    case 's': s.remove_suffix(1); break;
    case 'm': mult = 60; s.remove_suffix(1); break;
    case 'h': mult = 3600; s.remove_suffix(1); break;
    case 'd': mult = 86400; s.remove_suffix(1); break;
    default: break;
  }
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size() || !(v >= 0) || !std::isfinite(v)) return std::nullopt;
    return v * mult;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline nlohmann::json to_json(const CampaignConfig& c) {
  return nlohmann::json{
      {"budget_s", c.budget_s},
      {"rng_seed", c.rng_seed},
      {"rho", c.rho},
      {"omega", c.omega},
      {"len_threshold", c.len_threshold},
      {"intr_prob", c.intr_prob},
      {"max_intr", c.max_intr},
      {"max_exc", c.max_exc},
      {"bugs", to_string(c.bugs)},
      {"no_vaco", c.no_vaco},
      {"no_seedsel", c.no_seedsel},
      {"no_mutsel", c.no_mutsel},
      {"no_relations", c.no_relations},
      {"simple_cap", c.simple_cap},
      {"max_iter", c.max_iter},
      {"vaco_window", c.vaco_window},
      {"initial_seeds", c.initial_seeds},
      {"initial_len", c.initial_len},
      {"history", c.history},
      {"dict_capacity", c.dict_capacity},
      {"cost",
       {{"exec_overhead_s", c.cost.exec_overhead_s},
        {"dut_step_s", c.cost.dut_step_s},
        {"golden_step_s", c.cost.golden_step_s},
        {"extract_slot_s", c.cost.extract_slot_s}}},
  };
}

inline CampaignConfig config_from_json(const nlohmann::json& j) {
  CampaignConfig c;
  try {
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("budget_s", c.budget_s);
    get("rng_seed", c.rng_seed);
    get("rho", c.rho);
    get("omega", c.omega);
    get("len_threshold", c.len_threshold);
    get("intr_prob", c.intr_prob);
    get("max_intr", c.max_intr);
    get("max_exc", c.max_exc);
    if (j.contains("bugs")) {
      auto b = parse_bug_set(j.at("bugs").get<std::string>());
      if (!b) throw ConfigError("bad bug list in config");
      c.bugs = *b;
    }
    get("no_vaco", c.no_vaco);
    get("no_seedsel", c.no_seedsel);
    get("no_mutsel", c.no_mutsel);
    get("no_relations", c.no_relations);
    get("simple_cap", c.simple_cap);
    get("max_iter", c.max_iter);
    get("vaco_window", c.vaco_window);
    get("initial_seeds", c.initial_seeds);
    get("initial_len", c.initial_len);
    get("history", c.history);
    get("dict_capacity", c.dict_capacity);
    if (j.contains("cost")) {
      const auto& m = j.at("cost");
      auto getc = [&](const char* key, double& dst) {
        if (m.contains(key)) dst = m.at(key).get<double>();
      };
      getc("exec_overhead_s", c.cost.exec_overhead_s);
      getc("dut_step_s", c.cost.dut_step_s);
      getc("golden_step_s", c.cost.golden_step_s);
      getc("extract_slot_s", c.cost.extract_slot_s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace distillfuzz
