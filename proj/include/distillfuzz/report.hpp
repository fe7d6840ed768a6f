#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "distillfuzz/asm_text.hpp"
#include "distillfuzz/campaign.hpp"

namespace distillfuzz {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kStatsHeader =
    "timestamp,coverage,mean_len,execs,mismatches,ist_distinct,est_distinct,vaco_trigger";

// Fixed column order and number formatting; independent of locale.
inline std::string stats_csv(const CampaignStats& stats) {
  std::string out = kStatsHeader;
  out += '\n';
  char buf[192];
  for (const auto& r : stats.rows) {
    std::snprintf(buf, sizeof buf, "%llu,%zu,%.3f,%llu,%llu,%zu,%zu,%d\n",
                  static_cast<unsigned long long>(r.timestamp), r.coverage, r.mean_len,
                  static_cast<unsigned long long>(r.execs),
                  static_cast<unsigned long long>(r.mismatches), r.ist_distinct, r.est_distinct,
                  r.vaco_trigger ? 1 : 0);
    out += buf;
  }
  return out;
}

inline std::string key_hex(std::uint64_t key) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
  return buf;
}

inline nlohmann::json summary_json(const CampaignResult& r) {
  nlohmann::json bugs = nlohmann::json::array();
  for (auto b : r.bugs_found()) bugs.push_back(bug_name(b));
  nlohmann::json muts;
  for (std::size_t k = 0; k < r.mutations.size(); ++k)
    muts[to_string(static_cast<MutationKind>(k))] = r.mutations[k];
  return nlohmann::json{
      {"config", to_json(r.config)},
      {"coverage", r.coverage},
      {"execs", r.execs},
      {"elapsed_s", r.elapsed_s},
      {"exec_speed", r.exec_speed()},
      {"corpus_size", r.corpus.size()},
      {"corpus_mean_len", r.corpus_mean_len()},
      {"final_mean_len", r.stats.rows.empty() ? 0.0 : r.stats.rows.back().mean_len},
      {"raw_mismatches", r.raw_mismatches},
      {"distinct_mismatches", r.mismatches.size()},
      {"bugs_attributed", bugs},
      {"vaco_triggers", r.vaco_triggers},
      {"distills", r.distills},
      {"distilled_seeds", r.distill_admitted},
      {"retired_seeds", r.retired},
      {"ist_distinct", r.ist_distinct},
      {"est_distinct", r.est_distinct},
      {"mutations", muts},
  };
}

inline nlohmann::json mismatch_json(const MismatchEntry& e) {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : e.report.fields_diverged)
    fields.push_back({{"name", f.name}, {"golden", f.golden}, {"dut", f.dut}});
  nlohmann::json bugs = nlohmann::json::array();
  for (auto b : e.attributed) bugs.push_back(bug_name(b));
  return nlohmann::json{
      {"dedup_key", key_hex(e.report.dedup_key)},
      {"first_divergence_pc", e.report.first_divergence_pc},
      {"fields_diverged", fields},
      {"hits", e.hits},
      {"first_exec", e.first_exec},
      {"attributed_bugs", bugs},
      {"input", render(e.report.input)},
  };
}

namespace report_detail {

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw ReportError("cannot open " + p.string() + " for writing");
  f << body;
  f.flush();
  if (!f) throw ReportError("write failed: " + p.string());
}

inline void make_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw ReportError("cannot create " + p.string() + ": " + ec.message());
}

}  // namespace report_detail

inline void emit_stats(const CampaignStats& stats, const std::filesystem::path& dir) {
  report_detail::make_dir(dir);
  report_detail::write_file(dir / "stats.csv", stats_csv(stats));
}

// Writes stats.csv, summary.json, corpus/*.txt and mismatches/*.json.
inline void emit_report(const CampaignResult& r, const std::filesystem::path& dir) {
  using report_detail::make_dir;
  using report_detail::write_file;
  emit_stats(r.stats, dir);
  write_file(dir / "summary.json", summary_json(r).dump(2) + "\n");

  make_dir(dir / "corpus");
  for (const auto& s : r.corpus) {
    char name[32];
    std::snprintf(name, sizeof name, "%06llu.txt", static_cast<unsigned long long>(s.id));
    std::ostringstream body;
    body << "# id " << s.id << " cov " << s.cov << " len " << s.len << '\n' << render(s.seq);
    write_file(dir / "corpus" / name, body.str());
  }
  make_dir(dir / "mismatches");
  for (const auto& [key, e] : r.mismatches)
    write_file(dir / "mismatches" / (key_hex(key) + ".json"), mismatch_json(e).dump(2) + "\n");
}

}  // namespace distillfuzz
