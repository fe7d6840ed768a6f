#pragma once

// Variant ant-colony distillation. Starting from an empty input, each
// iteration roulette-selects one untraversed instruction group with
// probability proportional to pheromone x heuristic, appends it, executes the
// result, and stops as soon as average coverage (campaign coverage divided by
// input length) climbs above the level recorded when distillation began.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distillfuzz/relations.hpp"
#include "distillfuzz/rng.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

inline constexpr std::size_t kTrendWindow = 5;

struct TrendSample {
  double coverage = 0;
  double length = 1;
  double ratio() const { return coverage / length; }
};

// True iff coverage/length strictly decreases across the last k samples.
inline bool should_trigger(const std::deque<TrendSample>& window, std::size_t k = kTrendWindow) {
  if (k < 2 || window.size() < k) return false;
  for (std::size_t i = window.size() - k + 1; i < window.size(); ++i)
    if (!(window[i].ratio() < window[i - 1].ratio())) return false;
  return true;
}

class TrendWindow {
 public:
  explicit TrendWindow(std::size_t k = kTrendWindow) : k_(k) {}
  void push(double coverage, std::size_t length) {
    samples_.push_back({coverage, static_cast<double>(length)});
    while (samples_.size() > k_) samples_.pop_front();
  }
  bool decreasing() const { return should_trigger(samples_, k_); }
  void clear() { samples_.clear(); }
  const std::deque<TrendSample>& samples() const { return samples_; }
  std::size_t k() const { return k_; }

 private:
  std::size_t k_;
  std::deque<TrendSample> samples_;
};

struct PheromoneState {
  std::vector<double> pher;
  std::vector<double> heur;
  double rho = 0.5;

  static PheromoneState initial(std::size_t n, double rho) {
    return PheromoneState{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0), rho};
  }
};

struct Walk {
  std::size_t group = 0;
  std::size_t length = 1;
};

// pher_j <- (1 - rho) pher_j + sum over walkers of j of 1 / length.
inline PheromoneState update_pheromone(PheromoneState st, const std::vector<Walk>& walked) {
  for (auto& p : st.pher) p *= (1.0 - st.rho);
  for (const auto& w : walked) {
    if (w.length == 0) throw std::invalid_argument("update_pheromone: walker length must be >= 1");
    st.pher.at(w.group) += 1.0 / static_cast<double>(w.length);
  }
  return st;
}

using ProbabilityTable = std::vector<std::pair<std::size_t, double>>;

// p_j = pher_j h_j / sum_k pher_k h_k over the candidates; uniform when every
// product is zero.
inline ProbabilityTable probability_table(const PheromoneState& st,
                                          const std::vector<std::size_t>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("probability_table: no candidates");
  ProbabilityTable out;
  out.reserve(candidates.size());
  double total = 0;
  for (auto j : candidates) {
    const double m = st.pher.at(j) * st.heur.at(j);
    out.emplace_back(j, m);
    total += m;
  }
  if (!(total > 0)) {
    const double u = 1.0 / static_cast<double>(candidates.size());
    for (auto& [j, p] : out) p = u;
    return out;
  }
  for (auto& [j, p] : out) p /= total;
  return out;
}

inline std::size_t roulette_select(const ProbabilityTable& p, Rng& rng) {
  if (p.empty()) throw std::invalid_argument("roulette_select: empty table");
  const double u = rng.unit();
  double acc = 0;
  std::size_t last_live = p.front().first;
  for (const auto& [j, pj] : p) {
    if (pj <= 0) continue;
    last_live = j;
    acc += pj;
    if (u < acc) return j;
  }
  return last_live;  // rounding left u above the final cumulative sum
}

class NoGroups : public std::invalid_argument {
 public:
  NoGroups() : std::invalid_argument("distill: no instruction groups") {}
};

struct DistillConfig {
  double rho = 0.5;
  std::size_t max_iter = 64;
  EventCaps caps;
};

struct DistillResult {
  InputSequence seq;
  std::size_t length = 0;
  std::vector<std::size_t> appended;
  std::size_t iterations = 0;
  bool recovered = false;
};

// exec runs a candidate through the campaign executor and returns campaign
// coverage afterwards.
inline DistillResult distill(const std::vector<InstructionGroup>& groups,
                             const std::function<double(const InputSequence&)>& exec,
                             double base_avg_cov, const DistillConfig& cfg, Rng& rng) {
  if (groups.empty()) throw NoGroups();
  if (cfg.max_iter == 0) throw std::invalid_argument("distill: max_iter must be >= 1");
  auto st = PheromoneState::initial(groups.size(), cfg.rho);
  double max_score = 0;
  for (const auto& g : groups) max_score = std::max(max_score, g.cov_score);
  for (std::size_t j = 0; j < groups.size(); ++j)
    st.heur[j] = max_score > 0 ? groups[j].cov_score / max_score : 0.0;

  std::vector<bool> used(groups.size(), false);
  std::vector<EventSlot> slots;
  std::size_t intrs = 0, excs = 0, length = 0;
  std::vector<std::size_t> appended;
  std::optional<InputSequence> current;
  bool recovered = false;
  std::size_t iter = 0;

  for (; iter < cfg.max_iter; ++iter) {
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < groups.size(); ++j)
      if (!used[j]) candidates.push_back(j);
    if (candidates.empty()) break;

    const auto table = probability_table(st, candidates);
    const std::size_t j = roulette_select(table, rng);
    used[j] = true;
    appended.push_back(j);
    for (const auto& s : groups[j].body) {
      if (std::holds_alternative<Interrupt>(s)) {
        if (intrs >= cfg.caps.max_intr) continue;
        ++intrs;
      } else if (std::holds_alternative<Exception>(s)) {
        if (excs >= cfg.caps.max_exc) continue;
        ++excs;
      } else {
        ++length;
      }
      slots.push_back(s);
    }
    current.emplace(slots, cfg.caps);
    const double cov = exec(*current);
    if (cov / static_cast<double>(length) > base_avg_cov) {
      recovered = true;
      ++iter;
      break;
    }
    st = update_pheromone(std::move(st), {{j, groups[j].span_len}});
  }
  return DistillResult{std::move(*current), length, std::move(appended), iter, recovered};
}

}  // namespace distillfuzz
