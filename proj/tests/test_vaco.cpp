#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "distillfuzz/vaco.hpp"

using namespace distillfuzz;

namespace {

InstructionGroup group(std::size_t n, double score, Opcode op = Opcode::kNop) {
  InstructionGroup g;
  g.kind = GroupKind::kHardware;
  g.cov_score = score;
  g.span_len = n;
  for (std::size_t i = 0; i < n; ++i) {
    g.members.push_back({0, i});
    g.body.push_back(Instruction{op});
  }
  return g;
}

double sum(const ProbabilityTable& t) {
  double s = 0;
  for (const auto& [j, p] : t) s += p;
  return s;
}

std::deque<TrendSample> ratios(std::vector<double> r) {
  std::deque<TrendSample> w;
  for (double v : r) w.push_back({v, 1});
  return w;
}

}  // namespace

TEST(Trigger, Examples) {
  EXPECT_TRUE(should_trigger(ratios({10, 9, 8, 7, 6})));
  EXPECT_FALSE(should_trigger(ratios({10, 9, 9, 8, 7})));
  EXPECT_FALSE(should_trigger(ratios({10, 9, 8, 7})));
  EXPECT_TRUE(should_trigger(ratios({1, 10, 9, 8, 7, 6})));  // only the last k count
}

TEST(Trigger, WindowUsesRatio) {
  TrendWindow w(3);
  w.push(100, 10);
  w.push(100, 20);
  EXPECT_FALSE(w.decreasing());
  w.push(100, 40);
  EXPECT_TRUE(w.decreasing());
  w.clear();
  EXPECT_FALSE(w.decreasing());
}

TEST(Pheromone, OneWalker) {
  auto st = update_pheromone(PheromoneState::initial(2, 0.5), {{0, 4}});
  EXPECT_DOUBLE_EQ(st.pher[0], 0.75);
  EXPECT_DOUBLE_EQ(st.pher[1], 0.5);
}

TEST(Pheromone, EvaporationOnly) {
  auto st = update_pheromone(PheromoneState::initial(3, 0.3), {});
  for (double p : st.pher) EXPECT_DOUBLE_EQ(p, 0.7);
}

TEST(Pheromone, NoEvaporation) {
  PheromoneState st{{1.0, 2.0}, {0, 0}, 0.0};
  st = update_pheromone(st, {{1, 2}, {1, 4}, {0, 1}});
  EXPECT_DOUBLE_EQ(st.pher[0], 2.0);
  EXPECT_DOUBLE_EQ(st.pher[1], 2.75);
}

TEST(Pheromone, StaysPositiveAndRejectsZeroLength) {
  auto st = PheromoneState::initial(4, 0.9);
  for (int i = 0; i < 200; ++i) st = update_pheromone(std::move(st), {{static_cast<std::size_t>(i % 2), 3}});
  for (double p : st.pher) EXPECT_GT(p, 0);
  EXPECT_THROW(update_pheromone(st, {{0, 0}}), std::invalid_argument);
}

TEST(Probability, TwoThirdsOneThird) {
  PheromoneState st{{1, 1}, {2, 1}, 0.5};
  auto t = probability_table(st, {0, 1});
  EXPECT_NEAR(t[0].second, 2.0 / 3, 1e-15);
  EXPECT_NEAR(t[1].second, 1.0 / 3, 1e-15);
}

TEST(Probability, SingleCandidateAndUniformFallback) {
  PheromoneState st{{1, 1, 1}, {0, 0, 0}, 0.5};
  auto one = probability_table(PheromoneState{{3}, {0.2}, 0.5}, {0});
  EXPECT_DOUBLE_EQ(one[0].second, 1.0);
  auto u = probability_table(st, {0, 2});
  EXPECT_DOUBLE_EQ(u[0].second, 0.5);
  EXPECT_DOUBLE_EQ(u[1].second, 0.5);
  EXPECT_THROW(probability_table(st, {}), std::invalid_argument);
}

TEST(Probability, NormalizedForRandomStates) {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    PheromoneState st = PheromoneState::initial(n, 0.5);
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < n; ++j) {
      st.pher[j] = 1e-6 + rng.unit() * 10;
      st.heur[j] = rng.chance(0.2) ? 0 : rng.unit();
      if (rng.chance(0.7)) cand.push_back(j);
    }
    if (cand.empty()) cand.push_back(0);
    EXPECT_NEAR(sum(probability_table(st, cand)), 1.0, 1e-12);
  }
}

TEST(Roulette, Frequency) {
  Rng rng(99);
  const ProbabilityTable t = {{7, 0.75}, {9, 0.25}};
  const int n = 100000;
  int a = 0;
  for (int i = 0; i < n; ++i) a += roulette_select(t, rng) == 7;
  EXPECT_NEAR(static_cast<double>(a) / n, 0.75, 0.01);
}

TEST(Roulette, ZeroEntryNeverChosenAndCertainty) {
  Rng rng(5);
  const ProbabilityTable t = {{0, 0.0}, {1, 0.5}, {2, 0.0}, {3, 0.5}};
  for (int i = 0; i < 20000; ++i) {
    const auto j = roulette_select(t, rng);
    EXPECT_TRUE(j == 1 || j == 3);
  }
  for (int i = 0; i < 100; ++i) EXPECT_EQ(roulette_select({{4, 1.0}}, rng), 4u);
  EXPECT_THROW(roulette_select({}, rng), std::invalid_argument);
}

TEST(Distill, StopsAsSoonAsAverageRecovers) {
  Rng rng(1);
  int calls = 0;
  auto exec = [&](const InputSequence&) { ++calls; return 300.0; };
  auto r = distill({group(3, 5)}, exec, 50.0, DistillConfig{}, rng);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(r.recovered);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.length, 3u);
  EXPECT_EQ(r.seq.length(), 3u);
}

TEST(Distill, RunsToMaxIterWithUnreachableBase) {
  Rng rng(2);
  std::vector<InstructionGroup> gs;
  for (int i = 0; i < 20; ++i) gs.push_back(group(1 + i % 3, 1 + i));
  std::vector<std::size_t> lengths;
  auto exec = [&](const InputSequence& s) { lengths.push_back(s.length()); return 10.0; };
  DistillConfig cfg;
  cfg.max_iter = 7;
  auto r = distill(gs, exec, std::numeric_limits<double>::infinity(), cfg, rng);
  EXPECT_FALSE(r.recovered);
  EXPECT_EQ(r.iterations, 7u);
  ASSERT_EQ(lengths.size(), 7u);
  // Length grows by exactly the appended group's span each iteration.
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::size_t before = i ? lengths[i - 1] : 0;
    EXPECT_EQ(lengths[i] - before, gs[r.appended[i]].span_len);
  }
  std::set<std::size_t> uniq(r.appended.begin(), r.appended.end());
  EXPECT_EQ(uniq.size(), r.appended.size());
}

TEST(Distill, StopsWhenGroupsRunOut) {
  Rng rng(3);
  auto exec = [](const InputSequence&) { return 0.0; };
  auto r = distill({group(1, 1), group(2, 1)}, exec, 1e9, DistillConfig{}, rng);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_EQ(r.length, 3u);
}

TEST(Distill, NoGroupsThrows) {
  Rng rng(4);
  EXPECT_THROW(distill({}, [](const InputSequence&) { return 0.0; }, 0, DistillConfig{}, rng),
               NoGroups);
}

TEST(Distill, PheromoneFavoursTheWalkedGroupAfterOneRound) {
  // Two groups with equal heuristic: after the walked group deposits and
  // both evaporate, the walked one has strictly more mass.
  auto st = PheromoneState::initial(2, 0.5);
  st.heur = {1.0, 1.0};
  st = update_pheromone(st, {{0, 2}});
  auto t = probability_table(st, {0, 1});
  EXPECT_GT(t[0].second, t[1].second);
  EXPECT_NEAR(t[0].second, 1.0 / 1.5, 1e-12);
}

TEST(Distill, CoverageBearingGroupIsPreferred) {
  // Group 1's heuristic is zero, so it can never be the first pick.
  std::vector<InstructionGroup> gs = {group(1, 10), group(1, 0)};
  int first0 = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    auto r = distill(gs, [](const InputSequence&) { return 1e9; }, 1.0, DistillConfig{}, rng);
    first0 += r.appended.front() == 0;
  }
  EXPECT_EQ(first0, 200);
}

TEST(Distill, EventCapsApplyToAppendedBodies) {
  InstructionGroup g = group(2, 1);
  g.body.insert(g.body.begin() + 1, Interrupt{1, Privilege::kMachine});
  g.members.insert(g.members.begin() + 1, {0, 1});
  std::vector<InstructionGroup> gs(5, g);
  Rng rng(8);
  DistillConfig cfg;
  cfg.caps = {2, 0};
  auto r = distill(gs, [](const InputSequence&) { return 0.0; }, 1e9, cfg, rng);
  EXPECT_EQ(r.seq.interrupt_count(), 2u);
  EXPECT_EQ(r.length, 10u);
}
