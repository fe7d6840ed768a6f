#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <vector>

#include "distillfuzz/generate.hpp"
#include "distillfuzz/relations.hpp"
#include "distillfuzz/rng.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

enum class MutationKind : std::uint8_t { kDictionary, kInsertion, kDeletion, kBasic };

constexpr const char* to_string(MutationKind k) {
  switch (k) {
    case MutationKind::kDictionary: return "dictionary";
    case MutationKind::kInsertion: return "insertion";
    case MutationKind::kDeletion: return "deletion";
    case MutationKind::kBasic: return "basic";
  }
  return "?";
}

// Conditions in listed order, first match wins; len == l is Basic.
constexpr MutationKind choose_mutation(bool coverage_decreasing, std::size_t len, std::size_t l) {
  if (coverage_decreasing) return MutationKind::kDictionary;
  if (len < l) return MutationKind::kInsertion;
  if (len > l) return MutationKind::kDeletion;
  return MutationKind::kBasic;
}

using Token = std::vector<Instruction>;

// FIFO token store fed by distillation.
class Dictionary {
 public:
  explicit Dictionary(std::size_t capacity = 256) : cap_(capacity) {}
  void add(Token t) {
    if (t.empty() || cap_ == 0) return;
    tokens_.push_back(std::move(t));
    while (tokens_.size() > cap_) tokens_.pop_front();
  }
  bool empty() const { return tokens_.empty(); }
  std::size_t size() const { return tokens_.size(); }
  const Token& at(std::size_t i) const { return tokens_[i]; }

 private:
  std::size_t cap_;
  std::deque<Token> tokens_;
};

// Recently executed instructions, the "previously used" pool for insertion.
class InstructionRing {
 public:
  explicit InstructionRing(std::size_t capacity = 1024) : cap_(capacity) {}
  void push(const Instruction& in) {
    if (ring_.size() < cap_) {
      ring_.push_back(in);
    } else {
      ring_[next_] = in;
      next_ = (next_ + 1) % cap_;
    }
  }
  bool empty() const { return ring_.empty(); }
  std::size_t size() const { return ring_.size(); }
  const Instruction& pick(Rng& rng) const { return ring_[rng.below(ring_.size())]; }

 private:
  std::size_t cap_;
  std::size_t next_ = 0;
  std::vector<Instruction> ring_;
};

struct MutationConfig {
  std::size_t l = 400;
  double omega = 2.0;
  double reuse_prob = 0.8;
};

struct MutationContext {
  const Dictionary* dict = nullptr;
  const InstructionRing* ring = nullptr;
};

struct MutationResult {
  InputSequence seq;
  MutationKind applied;  // differs from the request on fallback
};

namespace mut_detail {

inline InputSequence build(std::vector<Instruction> code) {
  std::vector<EventSlot> slots(code.begin(), code.end());
  return InputSequence(std::move(slots), EventCaps{0, 0});
}

inline std::vector<Instruction> basic(std::vector<Instruction> code, Rng& rng) {
  const auto n = rng.range(1, 4);
  for (std::int64_t i = 0; i < n; ++i) code.push_back(random_instruction(rng));
  return code;
}

// Instructions made unreachable or meaningless by removing [lo, hi]: jumps
// into the slice and the data-flow chains that pass through it.
inline std::set<std::size_t> deletion_closure(const InputSequence& seq,
                                              const std::vector<Instruction>& code, std::size_t lo,
                                              std::size_t hi) {
  std::set<std::size_t> gone;
  for (std::size_t i = lo; i <= hi; ++i) gone.insert(i);
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i].op != Opcode::kJal) continue;
    const std::int64_t t = static_cast<std::int64_t>(i) + code[i].imm;
    if (t >= static_cast<std::int64_t>(lo) && t <= static_cast<std::int64_t>(hi)) gone.insert(i);
  }
  // seq holds instructions only, so slot index == instruction index.
  const auto ex = replay(0, seq, 0);
  for (const auto& g : data_flow_relations(ex)) {
    bool hit = false;
    for (const auto& m : g.members) hit = hit || (m.slot >= lo && m.slot <= hi);
    if (hit)
      for (const auto& m : g.members) gone.insert(m.slot);
  }
  return gone;
}

}  // namespace mut_detail

// Mutates the instruction stream of seed; events are dropped and re-inserted
// by the caller.
inline MutationResult mutate(const InputSequence& seed, MutationKind op, const MutationConfig& cfg,
                             const MutationContext& ctx, Rng& rng) {
  const InputSequence plain = seed.without_events();
  std::vector<Instruction> code = plain.instructions();
  const std::size_t n = code.size();

  switch (op) {
    case MutationKind::kDictionary: {
      if (!ctx.dict || ctx.dict->empty()) break;
      const Token& tok = ctx.dict->at(rng.below(ctx.dict->size()));
      const std::size_t max_cut = (n + 1) / 2;
      const std::size_t cut = 1 + rng.below(max_cut);
      const std::size_t at = rng.below(n - cut + 1);
      std::vector<Instruction> out(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(at));
      out.insert(out.end(), tok.begin(), tok.end());
      out.insert(out.end(), code.begin() + static_cast<std::ptrdiff_t>(at + cut), code.end());
      return {mut_detail::build(std::move(out)), op};
    }
    case MutationKind::kInsertion: {
      const auto k = rng.range(1, 4);
      const std::size_t at = rng.below(n + 1);
      std::vector<Instruction> ins;
      for (std::int64_t i = 0; i < k; ++i) {
        if (ctx.ring && !ctx.ring->empty() && rng.chance(cfg.reuse_prob))
          ins.push_back(ctx.ring->pick(rng));
        else
          ins.push_back(random_instruction(rng));
      }
      code.insert(code.begin() + static_cast<std::ptrdiff_t>(at), ins.begin(), ins.end());
      return {mut_detail::build(std::move(code)), op};
    }
    case MutationKind::kDeletion: {
      if (n < 2) break;
      const std::size_t k = 1 + rng.below(std::min<std::size_t>(4, n - 1));
      const std::size_t lo = rng.below(n - k + 1);
      auto gone = mut_detail::deletion_closure(plain, code, lo, lo + k - 1);
      if (gone.size() >= n) {
        gone.clear();
        for (std::size_t i = lo; i < lo + k; ++i) gone.insert(i);
      }
      std::vector<Instruction> out;
      out.reserve(n - gone.size());
      for (std::size_t i = 0; i < n; ++i)
        if (!gone.count(i)) out.push_back(code[i]);
      return {mut_detail::build(std::move(out)), op};
    }
    case MutationKind::kBasic: break;
  }
  return {mut_detail::build(mut_detail::basic(std::move(code), rng)), MutationKind::kBasic};
}

}  // namespace distillfuzz
