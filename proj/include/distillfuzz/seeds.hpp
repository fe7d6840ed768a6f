#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

struct InstrMix {
  std::size_t ld_st = 0;
  std::size_t fp = 0;
  std::size_t jp = 0;
};

inline InstrMix count_mix(const InputSequence& seq) {
  InstrMix m;
  for (const auto& s : seq.slots()) {
    const auto* in = std::get_if<Instruction>(&s);
    if (!in) continue;
    m.ld_st += is_mem(in->op);
    m.fp += is_fp(in->op);
    m.jp += is_jump(in->op);
  }
  return m;
}

struct SeedRecord {
  InputSequence seq;
  std::uint64_t id = 0;      // admission order
  double cov = 0;            // coverage gain at admission
  double speed = 0;          // executions per virtual second, smoothed
  std::size_t ld_st = 0, fp = 0, jp = 0;
  std::size_t len = 0;
  double score = 0;
  std::uint64_t picks = 0;

  static SeedRecord make(InputSequence seq, std::uint64_t id, double cov, double speed) {
    const auto mix = count_mix(seq);
    SeedRecord r{std::move(seq), id, cov, speed, mix.ld_st, mix.fp, mix.jp, 0, 0, 0};
    r.len = r.seq.length();
    return r;
  }
};

// (omega * cov * speed + ld_st * fp * jp) / len
inline double score_seed(double omega, double cov, double speed, std::size_t ld_st,
                         std::size_t fp, std::size_t jp, std::size_t len) {
  if (len == 0) throw std::invalid_argument("score_seed: len must be >= 1");
  const double rtl = static_cast<double>(ld_st) * static_cast<double>(fp) * static_cast<double>(jp);
  return (omega * cov * speed + rtl) / static_cast<double>(len);
}

inline double score_seed(const SeedRecord& r, double omega) {
  return score_seed(omega, r.cov, r.speed, r.ld_st, r.fp, r.jp, r.len);
}

class EmptyPool : public std::invalid_argument {
 public:
  EmptyPool() : std::invalid_argument("select_seed: pool is empty") {}
};

// Index of the highest-scoring seed; equal scores go to the newest admission.
inline std::size_t select_seed_index(const std::vector<SeedRecord>& pool, double omega) {
  if (pool.empty()) throw EmptyPool();
  std::size_t best = 0;
  double best_score = score_seed(pool[0], omega);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double s = score_seed(pool[i], omega);
    if (s > best_score || (s == best_score && pool[i].id > pool[best].id)) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

inline const SeedRecord& select_seed(const std::vector<SeedRecord>& pool, double omega) {
  return pool[select_seed_index(pool, omega)];
}

}  // namespace distillfuzz
