// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. All budgets, seeds and tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "distillfuzz/distillfuzz.hpp"

using namespace distillfuzz;

namespace {

constexpr double kLongBudget = 1800;          // criteria 3, 4, 8
constexpr double kRecallBudget = 600;         // criterion 2
constexpr std::uint64_t kRecallSeed = 0xC0FFEE;
constexpr std::size_t kRecallMin = 8;
constexpr std::size_t kSoundnessInputs = 10000;
constexpr double kSoundnessSeconds = 120;
constexpr double kLengthReduction = 0.30;     // full at least 30% shorter than -V
constexpr double kCoverageFloor = 0.95;       // full keeps 95% of -V coverage
constexpr std::size_t kCap = 1000;
constexpr double kCapStick = 0.95;            // "at the cap" = mean_len >= 95% of it
constexpr std::size_t kDiversityInputs = 1000;
constexpr double kDeterminismBudget = 60;
const std::vector<std::uint64_t> kRepSeeds = {1, 2, 3};

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

InputSequence parse(std::string_view text) {
  auto r = parse_sequence(text, kUncapped);
  if (auto* e = std::get_if<ParseError>(&r)) throw std::runtime_error(e->message);
  return std::get<InputSequence>(std::move(r));
}

bool diverges(const InputSequence& s, BugSet bugs) {
  const auto b = budget_for(s);
  return cross_check(run_golden(s, b), run_dut(s, b, bugs).outcome, s).has_value();
}

// Campaign results shared between criteria, keyed by configuration and seed.
std::map<std::pair<std::string, std::uint64_t>, CampaignResult> cache;

const CampaignResult& campaign(const std::string& name, std::uint64_t seed) {
  auto key = std::make_pair(name, seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  CampaignConfig base;
  base.budget_s = kLongBudget;
  base.rng_seed = seed;
  base.simple_cap = kCap;
  auto cfg = ablation(base, name);
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_campaign(*cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  [%s seed %llu] coverage %zu corpus_len %.1f execs %llu wall %.0fs\n", name.c_str(),
              static_cast<unsigned long long>(seed), r.coverage, r.corpus_mean_len(),
              static_cast<unsigned long long>(r.execs), wall);
  std::fflush(stdout);
  return cache.emplace(key, std::move(r)).first->second;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0 : s / static_cast<double>(v.size());
}

// Maximum matching between mismatch keys and the bugs each is attributed to.
std::size_t max_matching(const std::vector<std::vector<Bug>>& adj) {
  std::map<Bug, std::size_t> owner;
  std::function<bool(std::size_t, std::set<Bug>&)> augment = [&](std::size_t k,
                                                                std::set<Bug>& seen) {
    for (auto b : adj[k]) {
      if (!seen.insert(b).second) continue;
      auto it = owner.find(b);
      if (it == owner.end() || augment(it->second, seen)) {
        owner[b] = k;
        return true;
      }
    }
    return false;
  };
  std::size_t n = 0;
  for (std::size_t k = 0; k < adj.size(); ++k) {
    std::set<Bug> seen;
    n += augment(k, seen) ? 1 : 0;
  }
  return n;
}

void soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(0x5EED);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < kSoundnessInputs; ++i) {
    const auto s = insert_events(random_sequence(rng, 1 + rng.below(64)), EventPlan{}, rng);
    mismatches += diverges(s, BugSet::none()) ? 1 : 0;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(1, "differential soundness", mismatches == 0 && secs < kSoundnessSeconds,
         fmt("%zu mismatches over %zu inputs in %.1fs (limit %.0fs)", mismatches, kSoundnessInputs,
             secs, kSoundnessSeconds));
}

void recall() {
  std::size_t witnesses = 0;
  for (const auto& w : kBugWitnesses) {
    const auto t = parse(w.trigger), n = parse(w.near_miss);
    const bool ok = diverges(t, BugSet::only(w.bug)) && !diverges(t, BugSet::none()) &&
                    !diverges(n, BugSet::only(w.bug));
    witnesses += ok ? 1 : 0;
  }
  CampaignConfig cfg;
  cfg.budget_s = kRecallBudget;
  cfg.rng_seed = kRecallSeed;
  const auto r = run_campaign(cfg);
  std::vector<std::vector<Bug>> adj;
  for (const auto& [key, e] : r.mismatches) adj.push_back(e.attributed);
  const auto matched = max_matching(adj);
  report(2, "bug recall",
         matched >= kRecallMin && r.mismatches.size() >= kRecallMin && witnesses == kNumBugs,
         fmt("%zu distinct keys, %zu matched to distinct bugs (need %zu); witnesses %zu/%zu",
             r.mismatches.size(), matched, kRecallMin, witnesses, kNumBugs));
}

void distillation_direction() {
  std::vector<double> fl, vl, fc, vc;
  for (auto s : kRepSeeds) {
    const auto& f = campaign("full", s);
    const auto& v = campaign("-V", s);
    fl.push_back(f.corpus_mean_len());
    vl.push_back(v.corpus_mean_len());
    fc.push_back(static_cast<double>(f.coverage));
    vc.push_back(static_cast<double>(v.coverage));
  }
  const double reduction = 1 - mean(fl) / mean(vl);
  const double cov_ratio = mean(fc) / mean(vc);
  report(3, "distillation direction", reduction >= kLengthReduction && cov_ratio >= kCoverageFloor,
         fmt("corpus length full %.1f vs -V %.1f (%.0f%% lower, need %.0f%%); coverage ratio %.3f "
             "(need %.2f); %zu seeds",
             mean(fl), mean(vl), 100 * reduction, 100 * kLengthReduction, cov_ratio, kCoverageFloor,
             kRepSeeds.size()));
}

void simple_cap() {
  const auto seed = kRepSeeds.front();
  const auto& c = campaign("simple-cap", seed);
  const auto& f = campaign("full", seed);
  auto per_len = [](const CampaignResult& r) {
    const double len = r.corpus_mean_len();
    return len > 0 ? static_cast<double>(r.coverage) / len : 0.0;
  };
  // Reaches the cap and stays there: every row from the first one at the cap on.
  std::optional<std::size_t> first;
  bool sticks = true;
  double peak = 0;
  for (std::size_t i = 0; i < c.stats.rows.size(); ++i) {
    const double m = c.stats.rows[i].mean_len;
    peak = std::max(peak, m);
    const bool at_cap = m >= kCapStick * static_cast<double>(kCap);
    if (!first && at_cap) first = i + 1;
    if (first && !at_cap) sticks = false;
  }
  const bool plateau = first.has_value() && sticks;
  const bool below = per_len(c) < per_len(f);
  report(4, "simple-cap inferiority", plateau && below,
         fmt("coverage per corpus length cap %.1f vs full %.1f; executed mean length peak %.1f "
             "(cap %zu), %s",
             per_len(c), per_len(f), peak, kCap,
             !first ? "never at the cap" : sticks ? "stays at the cap" : "leaves the cap"));
}

void diversity() {
  const bool worked = fold_transition({3, 7}) == 1 && fold_transition({2}) == 4;
  Rng gen(0xD1CE);
  std::vector<InputSequence> base;
  for (std::size_t i = 0; i < kDiversityInputs; ++i) base.push_back(random_sequence(gen, 20));
  auto distinct = [&](std::size_t cap) {
    Rng rng(0xE7E7);
    std::set<std::uint16_t> seen;
    for (const auto& s : base) seen.insert(compute_ist(insert_events(s, EventPlan{0.5, cap, cap}, rng)));
    return seen.size();
  };
  const auto three = distinct(3), one = distinct(1);
  report(5, "multi-event diversity", worked && three > one,
         fmt("distinct IST caps=3 %zu vs caps=1 %zu over %zu inputs; worked values %s", three, one,
             kDiversityInputs, worked ? "exact" : "WRONG"));
}

void formulas() {
  std::vector<std::string> bad;
  auto st = update_pheromone(PheromoneState::initial(1, 0.5), {{0, 4}});
  if (st.pher[0] != 0.75) bad.push_back("pheromone");

  Rng rng(42);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(64);
    auto ps = PheromoneState::initial(n, 0.5);
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < n; ++j) {
      ps.pher[j] = 1e-3 + rng.unit();
      ps.heur[j] = rng.unit();
      cand.push_back(j);
    }
    double sum = 0;
    for (const auto& [j, p] : probability_table(ps, cand)) sum += p;
    worst = std::max(worst, std::fabs(sum - 1));
  }
  if (worst > 1e-12) bad.push_back("normalization");

  const ProbabilityTable table = {{0, 0.75}, {1, 0.25}};
  int a = 0;
  for (int i = 0; i < 100000; ++i) a += roulette_select(table, rng) == 0;
  const double freq = a / 1e5;
  if (std::fabs(freq - 0.75) > 0.01) bad.push_back("roulette");

  if (score_seed(2.0, 100, 0.5, 2, 1, 3, 10) != 10.6) bad.push_back("score");

  using K = MutationKind;
  const K expect[2][3] = {{K::kInsertion, K::kBasic, K::kDeletion},
                          {K::kDictionary, K::kDictionary, K::kDictionary}};
  const std::size_t lens[3] = {399, 400, 401};
  for (int d = 0; d < 2; ++d)
    for (int i = 0; i < 3; ++i)
      if (choose_mutation(d == 1, lens[i], 400) != expect[d][i]) bad.push_back("dispatch");

  std::string names;
  for (const auto& b : bad) names += " " + b;
  report(6, "formula suites", bad.empty(),
         fmt("pheromone %.2f, max |sum p - 1| %.1e, roulette %.4f, score %.4f, dispatch 6 cases%s%s",
             st.pher[0], worst, freq, score_seed(2.0, 100, 0.5, 2, 1, 3, 10),
             bad.empty() ? "" : "; failed:", names.c_str()));
}

void determinism() {
  CampaignConfig cfg;
  cfg.budget_s = kDeterminismBudget;
  cfg.rng_seed = 2024;
  const auto a = run_campaign(cfg);
  const auto b = run_campaign(cfg);
  const bool csv = stats_csv(a.stats) == stats_csv(b.stats);
  const bool keys = a.dedup_keys() == b.dedup_keys();
  const bool summary = summary_json(a).dump() == summary_json(b).dump();
  report(7, "determinism", csv && keys && summary,
         fmt("stats.csv %s, %zu dedup keys %s, summary %s", csv ? "identical" : "DIFFERS",
             a.dedup_keys().size(), keys ? "identical" : "DIFFER", summary ? "identical" : "DIFFERS"));
}

void ablations() {
  bool all = true;
  std::string detail;
  for (const std::string name : {"-S", "-M", "-SM"}) {
    std::size_t cov_wins = 0, len_wins = 0, both = 0;
    for (auto s : kRepSeeds) {
      const auto& f = campaign("full", s);
      const auto& o = campaign(name, s);
      const bool c = f.coverage >= o.coverage;
      const bool l = f.corpus_mean_len() <= o.corpus_mean_len();
      cov_wins += c;
      len_wins += l;
      both += c && l;
    }
    const bool ok = 2 * both > kRepSeeds.size();
    all = all && ok;
    detail += fmt("%s%s coverage %zu/%zu length %zu/%zu", detail.empty() ? "" : "; ", name.c_str(),
                  cov_wins, kRepSeeds.size(), len_wins, kRepSeeds.size());
  }
  report(8, "ablation direction", all, detail + " (majority must win both)");
}

}  // namespace

int main() {
  soundness();
  recall();
  distillation_direction();
  simple_cap();
  diversity();
  formulas();
  determinism();
  ablations();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
