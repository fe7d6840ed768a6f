#pragma once

// The fuzzing loop. One control loop owns the pool, coverage, dictionary and
// statistics; time is virtual and advances by the cost model's charge for
// every execution, so a campaign is a pure function of its configuration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "distillfuzz/codec.hpp"
#include "distillfuzz/config.hpp"
#include "distillfuzz/coverage.hpp"
#include "distillfuzz/crosscheck.hpp"
#include "distillfuzz/events.hpp"
#include "distillfuzz/generate.hpp"
#include "distillfuzz/machine.hpp"
#include "distillfuzz/mutation.hpp"
#include "distillfuzz/relations.hpp"
#include "distillfuzz/seeds.hpp"
#include "distillfuzz/vaco.hpp"

namespace distillfuzz {

struct StatsRow {
  std::uint64_t timestamp = 0;
  std::size_t coverage = 0;
  double mean_len = 0;
  std::uint64_t execs = 0;
  std::uint64_t mismatches = 0;
  std::size_t ist_distinct = 0;
  std::size_t est_distinct = 0;
  bool vaco_trigger = false;
  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

struct CampaignStats {
  std::vector<StatsRow> rows;
};

struct MismatchEntry {
  MismatchReport report;
  std::uint64_t first_exec = 0;
  std::uint64_t hits = 0;
  std::vector<Bug> attributed;  // single bugs that reproduce a divergence on this input
};

struct CampaignResult {
  CampaignConfig config;
  CampaignStats stats;
  std::vector<SeedRecord> corpus;
  std::map<std::uint64_t, MismatchEntry> mismatches;
  std::uint64_t raw_mismatches = 0;
  std::uint64_t execs = 0;
  std::uint64_t vaco_triggers = 0;
  std::uint64_t distills = 0;
  std::uint64_t distill_admitted = 0;
  std::size_t coverage = 0;
  double elapsed_s = 0;
  std::size_t ist_distinct = 0;
  std::size_t est_distinct = 0;
  std::array<std::uint64_t, 4> mutations{};  // by MutationKind actually applied
  std::size_t retired = 0;

  double corpus_mean_len() const {
    if (corpus.empty()) return 0;
    double s = 0;
    for (const auto& r : corpus) s += static_cast<double>(r.len);
    return s / static_cast<double>(corpus.size());
  }
  double exec_speed() const { return elapsed_s > 0 ? static_cast<double>(execs) / elapsed_s : 0; }
  std::vector<std::uint64_t> dedup_keys() const {
    std::vector<std::uint64_t> k;
    for (const auto& [key, e] : mismatches) k.push_back(key);
    return k;
  }
  std::vector<Bug> bugs_found() const {
    std::vector<bool> hit(kNumBugs + 1, false);
    for (const auto& [key, e] : mismatches)
      for (auto b : e.attributed) hit[static_cast<unsigned>(b)] = true;
    std::vector<Bug> out;
    for (unsigned i = 1; i <= kNumBugs; ++i)
      if (hit[i]) out.push_back(static_cast<Bug>(i));
    return out;
  }
};

// Single bugs whose solo DUT run still diverges from the reference on s.
inline std::vector<Bug> attribute_bugs(const InputSequence& s, BugSet enabled) {
  const auto budget = budget_for(s);
  const auto g = run_golden(s, budget);
  std::vector<Bug> out;
  for (auto b : enabled.list())
    if (cross_check(g, run_dut(s, budget, BugSet::only(b)).outcome, s)) out.push_back(b);
  return out;
}

inline constexpr double kSpeedSmoothing = 0.3;
inline constexpr std::size_t kRingSamplesPerExec = 16;

class Campaign {
 public:
  explicit Campaign(CampaignConfig cfg)
      : cfg_(std::move(cfg)),
        rng_(cfg_.rng_seed),
        window_(cfg_.vaco_window),
        dict_(cfg_.dict_capacity),
        mcfg_{cfg_.simple_cap > 0 ? cfg_.simple_cap : cfg_.len_threshold, cfg_.omega, 0.8},
        plan_{cfg_.intr_prob, cfg_.max_intr, cfg_.max_exc} {
    validate(cfg_);
  }

  CampaignResult run() {
    if (cfg_.budget_s > 0) {
      seed_pool();
      while (now_ < cfg_.budget_s) fuzz_round();
    }
    CampaignResult r;
    r.config = cfg_;
    r.stats = std::move(stats_);
    for (std::size_t i = 0; i < pool_.size(); ++i)
      if (!retired_[i]) r.corpus.push_back(std::move(pool_[i]));
    r.mismatches = std::move(mismatches_);
    r.raw_mismatches = raw_mismatches_;
    r.execs = execs_;
    r.vaco_triggers = triggers_;
    r.distills = distills_;
    r.distill_admitted = distill_admitted_;
    r.coverage = cov_.count();
    r.elapsed_s = std::min(now_, cfg_.budget_s);
    r.ist_distinct = transitions_.ist_distinct();
    r.est_distinct = transitions_.est_distinct();
    r.mutations = mutations_;
    r.retired = retired_count_;
    return r;
  }

 private:
  bool simple() const { return cfg_.simple_cap > 0; }
  bool relations_on() const { return !cfg_.no_relations && !simple(); }
  bool vaco_on() const { return !cfg_.no_vaco && !simple(); }
  bool track_history() const { return (relations_on() || vaco_on()); }

  struct ExecResult {
    std::size_t gain = 0;
    double cost = 0;
  };

  void advance(double dt) {
    now_ += dt;
    while (next_flush_ <= now_ && static_cast<double>(next_flush_) <= cfg_.budget_s) {
      StatsRow row;
      row.timestamp = next_flush_;
      row.coverage = cov_.count();
      if (interval_count_ > 0) last_mean_len_ = interval_len_sum_ / static_cast<double>(interval_count_);
      row.mean_len = last_mean_len_;
      row.execs = execs_;
      row.mismatches = raw_mismatches_;
      row.ist_distinct = transitions_.ist_distinct();
      row.est_distinct = transitions_.est_distinct();
      row.vaco_trigger = trigger_in_interval_;
      stats_.rows.push_back(row);
      interval_len_sum_ = 0;
      interval_count_ = 0;
      trigger_in_interval_ = false;
      ++next_flush_;
    }
  }

  ExecResult execute(const InputSequence& s) {
    const auto budget = budget_for(s);
    const auto g = run_golden(s, budget);
    auto d = run_dut(s, budget, cfg_.bugs);
    ExecResult r;
    r.gain = cov_.merge(d.coverage);
    r.cost = cfg_.cost.exec_overhead_s + cfg_.cost.dut_step_s * static_cast<double>(d.outcome.steps) +
             cfg_.cost.golden_step_s * static_cast<double>(g.steps);
    ++execs_;
    interval_len_sum_ += static_cast<double>(s.length());
    ++interval_count_;
    transitions_.observe(s);

    const auto code = s.instructions();
    for (std::size_t i = 0; i < std::min(code.size(), kRingSamplesPerExec); ++i)
      ring_.push(code.size() <= kRingSamplesPerExec ? code[i] : code[rng_.below(code.size())]);

    if (auto rep = cross_check(g, d.outcome, s)) {
      ++raw_mismatches_;
      auto it = mismatches_.find(rep->dedup_key);
      if (it == mismatches_.end()) {
        MismatchEntry e{*rep, execs_, 1, attribute_bugs(s, cfg_.bugs)};
        mismatches_.emplace(rep->dedup_key, std::move(e));
      } else {
        ++it->second.hits;
      }
    }
    advance(r.cost);
    return r;
  }

  void admit(const InputSequence& s, const ExecResult& r) {
    const std::uint64_t id = next_id_++;
    pool_.push_back(SeedRecord::make(s, id, static_cast<double>(r.gain), 1.0 / r.cost));
    pool_.back().score = score_seed(pool_.back(), cfg_.omega);
    pass_mark_.push_back(0);
    retired_.push_back(false);
    if (track_history()) {
      history_.push_back(replay(id, s, r.gain));
      if (history_.size() > cfg_.history) history_.pop_front();
    }
  }

  void seed_pool() {
    for (std::size_t i = 0; i < cfg_.initial_seeds && now_ < cfg_.budget_s; ++i) {
      auto s = insert_events(random_sequence(rng_, cfg_.initial_len), plan_, rng_);
      const auto r = execute(s);
      if (r.gain > 0) admit(s, r);
    }
  }

  std::vector<InstructionGroup> singleton_groups() const {
    std::vector<InstructionGroup> out;
    std::vector<const ExecutedInput*> order;
    for (const auto& h : history_) order.push_back(&h);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
      return a->cov_gain != b->cov_gain ? a->cov_gain > b->cov_gain : a->id < b->id;
    });
    for (const auto* h : order)
      for (std::size_t i = 0; i < h->seq.size(); ++i) {
        if (!is_instruction(h->seq.slots()[i])) continue;
        InstructionGroup g;
        g.kind = GroupKind::kHardware;
        g.members.push_back({h->id, i});
        g.span_len = 1;
        g.cov_score = static_cast<double>(h->cov_gain);
        g.body.push_back(h->seq.slots()[i]);
        out.push_back(std::move(g));
      }
    return out;
  }

  void on_trigger(double base_avg_cov) {
    ++triggers_;
    trigger_in_interval_ = true;
    if (history_.empty()) return;
    std::vector<InstructionGroup> groups;
    if (relations_on()) {
      double slots = 0;
      for (const auto& h : history_) slots += static_cast<double>(h.seq.size());
      groups = extract(std::vector<ExecutedInput>(history_.begin(), history_.end()));
      advance(cfg_.cost.extract_slot_s * slots);
    } else if (vaco_on()) {
      groups = singleton_groups();
    }
    if (!vaco_on() || groups.empty() || now_ >= cfg_.budget_s) return;

    ++distills_;
    const std::size_t cov_before = cov_.count();
    ExecResult last;
    auto exec = [&](const InputSequence& s) {
      last = execute(s);
      return static_cast<double>(cov_.count());
    };
    DistillConfig dc{cfg_.rho, cfg_.max_iter, plan_.caps()};
    auto res = distill(groups, exec, base_avg_cov, dc, rng_);
    for (auto j : res.appended) {
      Token t;
      for (const auto& s : groups[j].body)
        if (const auto* in = std::get_if<Instruction>(&s)) t.push_back(*in);
      dict_.add(std::move(t));
    }
    // A distilled input that recovered average coverage joins the pool even
    // without new coverage of its own, credited with its groups' mean score.
    const std::size_t gain = cov_.count() - cov_before;
    if (gain == 0 && !res.recovered) return;
    double credit = 0;
    for (auto j : res.appended) credit += groups[j].cov_score;
    credit /= static_cast<double>(res.appended.size());
    const auto cov = gain > 0 ? gain : std::max<std::size_t>(1, static_cast<std::size_t>(credit));
    // The distilled input stands in for the inputs it was distilled from.
    for (const auto& h : history_) retire_seed(h.id);
    history_.clear();
    admit(res.seq, ExecResult{cov, last.cost});
    ++distill_admitted_;
  }

  void retire_seed(std::uint64_t id) {
    if (!retired_[id]) {
      retired_[id] = true;
      ++retired_count_;
    }
  }

  // Without seed selection the parent is a uniform pick. Otherwise seeds are
  // taken in score order, each at most once per pass over the pool; a seed
  // admitted mid-pass is eligible in the same pass.
  std::size_t select_parent() {
    if (cfg_.no_seedsel) {
      std::size_t i;
      do i = rng_.below(pool_.size());
      while (retired_[i]);
      return i;
    }
    for (auto& r : pool_) r.score = score_seed(r, cfg_.omega);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (retired_[i] || pass_mark_[i] == pass_) continue;
      if (!best || pool_[i].score > pool_[*best].score ||
          (pool_[i].score == pool_[*best].score && pool_[i].id > pool_[*best].id))
        best = i;
    }
    if (!best) {
      ++pass_;
      return select_parent();
    }
    pass_mark_[*best] = pass_;
    return *best;
  }

  void fuzz_round() {
    if (pool_.empty()) {
      auto s = insert_events(random_sequence(rng_, cfg_.initial_len), plan_, rng_);
      const auto r = execute(s);
      if (r.gain > 0) admit(s, r);
      return;
    }
    const bool decreasing = window_.decreasing();
    if (decreasing) {
      on_trigger(window_.samples().back().ratio());
      window_.clear();
      if (now_ >= cfg_.budget_s) return;
    }

    const std::size_t idx = select_parent();
    const InputSequence parent = pool_[idx].seq;
    ++pool_[idx].picks;
    const MutationKind want = cfg_.no_mutsel
                                  ? MutationKind::kBasic
                                  : choose_mutation(decreasing, parent.length(), mcfg_.l);
    auto m = mutate(parent, want, mcfg_, MutationContext{&dict_, &ring_}, rng_);
    ++mutations_[static_cast<std::size_t>(m.applied)];
    const auto child = insert_events(m.seq, plan_, rng_);
    const auto r = execute(child);

    auto& rec = pool_[idx];
    rec.speed = (1 - kSpeedSmoothing) * rec.speed + kSpeedSmoothing * (1.0 / r.cost);
    window_.push(static_cast<double>(cov_.count()), child.length());
    if (r.gain > 0 && (!simple() || child.length() <= cfg_.simple_cap)) admit(child, r);
  }

  CampaignConfig cfg_;
  Rng rng_;
  double now_ = 0;
  std::uint64_t next_flush_ = 1;
  CoverageMap cov_;
  std::vector<SeedRecord> pool_;
  std::vector<std::uint64_t> pass_mark_;
  std::vector<bool> retired_;
  std::size_t retired_count_ = 0;
  std::uint64_t pass_ = 1;
  std::uint64_t next_id_ = 0;
  std::deque<ExecutedInput> history_;
  TrendWindow window_;
  Dictionary dict_;
  InstructionRing ring_;
  MutationConfig mcfg_;
  EventPlan plan_;
  TransitionTracker transitions_;

  CampaignStats stats_;
  double interval_len_sum_ = 0;
  std::uint64_t interval_count_ = 0;
  double last_mean_len_ = 0;
  bool trigger_in_interval_ = false;

  std::map<std::uint64_t, MismatchEntry> mismatches_;
  std::uint64_t raw_mismatches_ = 0;
  std::uint64_t execs_ = 0;
  std::uint64_t triggers_ = 0;
  std::uint64_t distills_ = 0;
  std::uint64_t distill_admitted_ = 0;
  std::array<std::uint64_t, 4> mutations_{};
};

inline CampaignResult run_campaign(const CampaignConfig& cfg) { return Campaign(cfg).run(); }

}  // namespace distillfuzz
