#pragma once

// Ablation matrix: the same budget and seed run under each switch set, with
// deltas against the full configuration.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillfuzz/campaign.hpp"
#include "distillfuzz/config.hpp"

namespace distillfuzz {

struct MatrixEntry {
  std::string name;
  CampaignConfig config;
};

inline constexpr std::size_t kDefaultSimpleCap = 1000;

inline std::vector<std::string> matrix_names() {
  return {"full", "-V", "-S", "-M", "-SM", "-RV", "-R", "simple-cap"};
}

// Derives a named ablation from base; nullopt for an unknown name.
inline std::optional<CampaignConfig> ablation(const CampaignConfig& base, const std::string& name) {
  CampaignConfig c = base;
  c.no_vaco = c.no_seedsel = c.no_mutsel = c.no_relations = false;
  c.simple_cap = 0;
  if (name == "full") return c;
  if (name == "-V") c.no_vaco = true;
  else if (name == "-S") c.no_seedsel = true;
  else if (name == "-M") c.no_mutsel = true;
  else if (name == "-SM") c.no_seedsel = c.no_mutsel = true;
  else if (name == "-RV") c.no_relations = c.no_vaco = true;
  else if (name == "-R") c.no_relations = true;
  else if (name == "simple-cap") c.simple_cap = base.simple_cap ? base.simple_cap : kDefaultSimpleCap;
  else return std::nullopt;
  return c;
}

inline std::vector<MatrixEntry> make_matrix(const CampaignConfig& base,
                                            const std::vector<std::string>& names) {
  std::vector<MatrixEntry> out;
  for (const auto& n : names) {
    auto c = ablation(base, n);
    if (!c) throw ConfigError("unknown matrix config: " + n);
    validate(*c);
    out.push_back({n, *c});
  }
  return out;
}

struct MatrixRow {
  std::string name;
  std::optional<CampaignResult> result;
  std::string error;  // set when the campaign failed
};

struct MatrixSummary {
  std::vector<MatrixRow> rows;

  const CampaignResult* find(const std::string& name) const {
    for (const auto& r : rows)
      if (r.name == name && r.result) return &*r.result;
    return nullptr;
  }
};

// Runs entries in order; a failing campaign is recorded and the rest still run.
inline MatrixSummary run_matrix(const std::vector<MatrixEntry>& entries) {
  MatrixSummary s;
  for (const auto& e : entries) {
    MatrixRow row{e.name, std::nullopt, {}};
    try {
      row.result = run_campaign(e.config);
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

// (other - full) / full; 0 when full is 0.
inline double relative_delta(double other, double full) {
  return full != 0 ? (other - full) / full : 0.0;
}

inline nlohmann::json matrix_json(const MatrixSummary& s) {
  const CampaignResult* full = s.find("full");
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    nlohmann::json j{{"name", r.name}};
    if (!r.result) {
      j["error"] = r.error;
      rows.push_back(j);
      continue;
    }
    const auto& c = *r.result;
    j["coverage"] = c.coverage;
    j["corpus_mean_len"] = c.corpus_mean_len();
    j["distinct_mismatches"] = c.mismatches.size();
    j["raw_mismatches"] = c.raw_mismatches;
    j["exec_speed"] = c.exec_speed();
    if (full) {
      j["delta"] = {
          {"coverage", relative_delta(double(c.coverage), double(full->coverage))},
          {"corpus_mean_len", relative_delta(c.corpus_mean_len(), full->corpus_mean_len())},
          {"distinct_mismatches",
           relative_delta(double(c.mismatches.size()), double(full->mismatches.size()))},
          {"exec_speed", relative_delta(c.exec_speed(), full->exec_speed())},
      };
    }
    rows.push_back(j);
  }
  return nlohmann::json{{"rows", rows}};
}

inline std::string matrix_table(const MatrixSummary& s) {
  const CampaignResult* full = s.find("full");
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-11s %10s %8s %10s %8s %10s %8s %11s\n", "config", "coverage",
                "d%", "mean_len", "d%", "mismatch", "d%", "execs/s");
  out += buf;
  for (const auto& r : s.rows) {
    if (!r.result) {
      out += r.name + "  FAILED: " + r.error + "\n";
      continue;
    }
    const auto& c = *r.result;
    auto pct = [&](double o, double f) { return full ? 100.0 * relative_delta(o, f) : 0.0; };
    std::snprintf(buf, sizeof buf, "%-11s %10zu %+7.1f%% %10.2f %+7.1f%% %10zu %+7.1f%% %11.1f\n",
                  r.name.c_str(), c.coverage,
                  pct(double(c.coverage), full ? double(full->coverage) : 0),
                  c.corpus_mean_len(), pct(c.corpus_mean_len(), full ? full->corpus_mean_len() : 0),
                  c.mismatches.size(),
                  pct(double(c.mismatches.size()), full ? double(full->mismatches.size()) : 0),
                  c.exec_speed());
    out += buf;
  }
  return out;
}

}  // namespace distillfuzz
