// distillfuzz command-line driver.
//
//   distillfuzz fuzz --budget 30m --rng-seed 7 --out run/
//   distillfuzz matrix --budget 10m --out matrix/
//   distillfuzz run input.txt --bugs B12 --trace
//   distillfuzz coverage input.txt
//   distillfuzz groups a.txt b.txt
//
// Exit codes: 0 clean, 1 configuration or input error, 2 internal invariant failure.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "distillfuzz/distillfuzz.hpp"

using namespace distillfuzz;

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

InputSequence load_sequence(const std::string& path) {
  auto r = parse_sequence(slurp(path), kUncapped);
  if (auto* e = std::get_if<ParseError>(&r))
    throw InputError(path + ":" + std::to_string(e->line) + ": " + e->message);
  return std::get<InputSequence>(std::move(r));
}

// Campaign flags shared by fuzz and matrix. String-typed values are parsed
// after CLI11 so that errors carry our wording.
struct CampaignFlags {
  std::string budget = "1800";
  std::string bugs = "B1..B12";
  std::string config_file;
  CampaignConfig cfg;

  void attach(CLI::App* app, bool ablations) {
    app->add_option("--budget", budget, "virtual time budget: 90, 90s, 30m, 24h")->capture_default_str();
    app->add_option("--bugs", bugs, "planted bugs, e.g. B1..B12, B3,B7, none")->capture_default_str();
    app->add_option("--config", config_file, "start from the config in a summary.json");
    app->add_option("--rng-seed", cfg.rng_seed)->capture_default_str();
    app->add_option("--rho", cfg.rho, "pheromone evaporation")->capture_default_str();
    app->add_option("--omega", cfg.omega, "seed score weight")->capture_default_str();
    app->add_option("--len-threshold", cfg.len_threshold)->capture_default_str();
    app->add_option("--intr-prob", cfg.intr_prob)->capture_default_str();
    app->add_option("--max-intr", cfg.max_intr)->capture_default_str();
    app->add_option("--max-exc", cfg.max_exc)->capture_default_str();
    app->add_option("--max-iter", cfg.max_iter, "distill iteration cap")->capture_default_str();
    app->add_option("--vaco-window", cfg.vaco_window)->capture_default_str();
    app->add_option("--simple-cap", cfg.simple_cap, "length cap baseline, 0 = off")
        ->capture_default_str();
    if (ablations) {
      app->add_flag("--no-vaco", cfg.no_vaco);
      app->add_flag("--no-seedsel", cfg.no_seedsel);
      app->add_flag("--no-mutsel", cfg.no_mutsel);
      app->add_flag("--no-relations", cfg.no_relations);
    }
  }

  // Without --config every flag applies; with it, only flags given explicitly
  // override the file.
  CampaignConfig resolve(CLI::App* app) const {
    CampaignConfig c = cfg;
    const bool from_file = !config_file.empty();
    if (from_file) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(slurp(config_file));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config_file + ": " + e.what());
      }
      c = config_from_json(j.contains("config") ? j.at("config") : j);
      const CampaignConfig& f = cfg;
      const std::pair<const char*, std::function<void()>> overrides[] = {
          {"--rng-seed", [&] { c.rng_seed = f.rng_seed; }},
          {"--rho", [&] { c.rho = f.rho; }},
          {"--omega", [&] { c.omega = f.omega; }},
          {"--len-threshold", [&] { c.len_threshold = f.len_threshold; }},
          {"--intr-prob", [&] { c.intr_prob = f.intr_prob; }},
          {"--max-intr", [&] { c.max_intr = f.max_intr; }},
          {"--max-exc", [&] { c.max_exc = f.max_exc; }},
          {"--max-iter", [&] { c.max_iter = f.max_iter; }},
          {"--vaco-window", [&] { c.vaco_window = f.vaco_window; }},
          {"--simple-cap", [&] { c.simple_cap = f.simple_cap; }},
          {"--no-vaco", [&] { c.no_vaco = true; }},
          {"--no-seedsel", [&] { c.no_seedsel = true; }},
          {"--no-mutsel", [&] { c.no_mutsel = true; }},
          {"--no-relations", [&] { c.no_relations = true; }},
      };
      for (const auto& [name, apply] : overrides)
        if (app->get_option_no_throw(name) && app->count(name) > 0) apply();
    }
    if (!from_file || app->count("--budget")) {
      auto b = parse_budget(budget);
      if (!b) throw ConfigError("bad --budget: " + budget);
      c.budget_s = *b;
    }
    if (!from_file || app->count("--bugs")) {
      auto bs = parse_bug_set(bugs);
      if (!bs) throw ConfigError("bad --bugs: " + bugs);
      c.bugs = *bs;
    }
    validate(c);
    return c;
  }
};

int cmd_fuzz(CLI::App* app, const CampaignFlags& flags, const std::string& out) {
  const auto cfg = flags.resolve(app);
  const auto r = run_campaign(cfg);
  if (!out.empty()) emit_report(r, out);
  std::printf("coverage %zu  execs %llu  corpus %zu (mean len %.2f)  mismatches %zu distinct / %llu raw\n",
              r.coverage, static_cast<unsigned long long>(r.execs), r.corpus.size(),
              r.corpus_mean_len(), r.mismatches.size(),
              static_cast<unsigned long long>(r.raw_mismatches));
  std::string bugs;
  for (auto b : r.bugs_found()) bugs += (bugs.empty() ? "" : ",") + bug_name(b);
  std::printf("bugs attributed: %s\n", bugs.empty() ? "none" : bugs.c_str());
  return 0;
}

int cmd_matrix(CLI::App* app, const CampaignFlags& flags, const std::vector<std::string>& names,
               const std::string& out) {
  const auto base = flags.resolve(app);
  const auto entries = make_matrix(base, names);
  const auto summary = run_matrix(entries);
  std::fputs(matrix_table(summary).c_str(), stdout);
  if (!out.empty()) {
    report_detail::make_dir(out);
    report_detail::write_file(std::filesystem::path(out) / "matrix.json",
                              matrix_json(summary).dump(2) + "\n");
    for (const auto& row : summary.rows)
      if (row.result) emit_report(*row.result, std::filesystem::path(out) / row.name);
  }
  for (const auto& row : summary.rows)
    if (!row.result) return 2;
  return 0;
}

// One line per attempted instruction: pc opcode priv minstret, with the
// cause when it trapped; deliveries are marked separately.
struct TraceObserver : NullObserver {
  template <class M>
  void on_instruction(const InstrEffect& e, const M& m) {
    static constexpr char kPriv[] = {'U', 'S', 'M'};
    std::printf("%u %s %c %u", static_cast<unsigned>(e.index), std::string(mnemonic(e.instr.op)).c_str(),
                kPriv[static_cast<unsigned>(e.priv_before)], m.state().csr(Csr::kMinstret));
    if (e.trap_cause) std::printf(" trap 0x%x", e.trap_cause);
    std::printf("\n");
  }
  template <class M>
  void on_delivery(const TrapRecord& rec, const M&) {
    std::printf("  -> deliver 0x%x depth %u\n", rec.cause, static_cast<unsigned>(rec.depth));
  }
};

void print_trace(const InputSequence& seq, std::uint64_t budget, BugSet bugs) {
  TraceObserver obs;
  Machine<TraceObserver>(seq, bugs, obs).run(budget);
}

int cmd_run(const std::string& file, const std::string& bug_list, bool trace) {
  const auto seq = load_sequence(file);
  auto bugs = parse_bug_set(bug_list);
  if (!bugs) throw ConfigError("bad --bugs: " + bug_list);
  const auto budget = budget_for(seq);
  const auto g = run_golden(seq, budget);
  const auto d = run_dut(seq, budget, *bugs);
  if (trace) {
    std::printf("# golden\n");
    print_trace(seq, budget, BugSet::none());
    std::printf("# dut\n");
    print_trace(seq, budget, *bugs);
  }
  std::printf("retired golden %llu dut %llu  coverage %zu\n", (unsigned long long)g.retired,
              (unsigned long long)d.outcome.retired, d.coverage.count());
  auto rep = cross_check(g, d.outcome, seq);
  if (!rep) {
    std::printf("no mismatch\n");
    return 0;
  }
  std::printf("mismatch key %s at pc %u\n", key_hex(rep->dedup_key).c_str(),
              rep->first_divergence_pc);
  for (const auto& f : rep->fields_diverged)
    std::printf("  %-12s golden %s  dut %s\n", f.name.c_str(), f.golden.c_str(), f.dut.c_str());
  return 0;
}

int cmd_coverage(const std::string& file) {
  const auto seq = load_sequence(file);
  const auto d = run_dut(seq, budget_for(seq), BugSet::none());
  for (auto h : d.coverage.sorted()) std::printf("%08x\n", h);
  return 0;
}

int cmd_groups(const std::vector<std::string>& files) {
  std::vector<ExecutedInput> history;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto seq = load_sequence(files[i]);
    const auto cov = run_dut(seq, budget_for(seq), BugSet::none()).coverage.count();
    history.push_back(replay(i, seq, cov));
  }
  for (const auto& g : extract(history)) {
    std::printf("%s\n", describe(g).c_str());
    for (const auto& s : g.body) std::printf("    %s\n", render(s).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instruction-sequence fuzzer with ant-colony input distillation"};
  app.require_subcommand(1);

  CampaignFlags fuzz_flags, matrix_flags;
  std::string fuzz_out, matrix_out;
  auto* fuzz = app.add_subcommand("fuzz", "run one campaign");
  fuzz_flags.attach(fuzz, true);
  fuzz->add_option("--out", fuzz_out, "report directory");

  std::vector<std::string> names = matrix_names();
  auto* matrix = app.add_subcommand("matrix", "run the ablation matrix");
  matrix_flags.attach(matrix, false);
  matrix->add_option("--configs", names, "subset of: full -V -S -M -SM -RV -R simple-cap")
      ->delimiter(',');
  matrix->add_option("--out", matrix_out, "directory for matrix.json and per-config reports");

  std::string run_file, run_bugs = "none";
  bool trace = false;
  auto* run = app.add_subcommand("run", "execute one input on both models and cross-check");
  run->add_option("file", run_file)->required();
  run->add_option("--bugs", run_bugs)->capture_default_str();
  run->add_flag("--trace", trace, "print the commit stream of both models");

  std::string cov_file;
  auto* cov = app.add_subcommand("coverage", "print the control-state hashes an input reaches");
  cov->add_option("file", cov_file)->required();

  std::vector<std::string> group_files;
  auto* groups = app.add_subcommand("groups", "print instruction groups extracted from inputs");
  groups->add_option("files", group_files)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*fuzz) return cmd_fuzz(fuzz, fuzz_flags, fuzz_out);
    if (*matrix) return cmd_matrix(matrix, matrix_flags, names, matrix_out);
    if (*run) return cmd_run(run_file, run_bugs, trace);
    if (*cov) return cmd_coverage(cov_file);
    if (*groups) return cmd_groups(group_files);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ReportError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 0;
}
