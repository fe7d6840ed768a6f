#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "distillfuzz/rng.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

struct EventPlan {
  double insert_prob = 0.5;
  std::size_t max_intr = 3;
  std::size_t max_exc = 3;

  EventCaps caps() const { return {max_intr, max_exc}; }
  bool valid() const { return insert_prob >= 0.0 && insert_prob <= 1.0; }
};

inline Interrupt random_interrupt(Rng& rng) {
  return Interrupt{static_cast<std::uint8_t>(1 + rng.below(kNumInterrupts)),
                   static_cast<Privilege>(rng.below(3))};
}

inline Exception random_exception(Rng& rng) {
  return Exception{static_cast<std::uint8_t>(1 + rng.below(kNumExceptions))};
}

// Walks the gaps between consecutive instructions and, with insert_prob per
// gap, drops one event there: interrupt or exception with equal odds, ids and
// priority uniform. When one kind is at its cap the other is used; when both
// are, insertion stops. Instruction slots are never moved or changed.
inline InputSequence insert_events(const InputSequence& seq, const EventPlan& plan, Rng& rng) {
  if (!plan.valid()) throw std::invalid_argument("insert_events: insert_prob outside [0,1]");
  std::size_t intrs = seq.interrupt_count();
  std::size_t excs = seq.exception_count();
  if (intrs > plan.max_intr || excs > plan.max_exc)
    throw std::invalid_argument("insert_events: sequence already exceeds event caps");
  if (plan.insert_prob == 0.0) return seq;

  std::vector<EventSlot> out;
  out.reserve(seq.size() + plan.max_intr + plan.max_exc);
  std::size_t instrs_seen = 0;
  const auto& slots = seq.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    out.push_back(slots[i]);
    if (!is_instruction(slots[i])) continue;
    ++instrs_seen;
    if (instrs_seen == seq.length()) continue;  // no gap after the last instruction
    const bool intr_room = intrs < plan.max_intr;
    const bool exc_room = excs < plan.max_exc;
    if (!intr_room && !exc_room) continue;
    if (!rng.chance(plan.insert_prob)) continue;
    bool pick_intr = rng.chance(0.5);
    if (pick_intr && !intr_room) pick_intr = false;
    if (!pick_intr && !exc_room) pick_intr = true;
    if (pick_intr) {
      out.emplace_back(random_interrupt(rng));
      ++intrs;
    } else {
      out.emplace_back(random_exception(rng));
      ++excs;
    }
  }
  return InputSequence(std::move(out), plan.caps());
}

// Shift-xor fold over ordered event ids: acc = id0, then acc = (acc << 1) ^ id.
// A single id folds with an implicit trailing 0, i.e. id << 1.
inline std::uint16_t fold_transition(const std::vector<std::uint8_t>& ids) {
  if (ids.empty()) return 0;
  std::uint32_t acc = ids[0];
  if (ids.size() == 1) return static_cast<std::uint16_t>((acc << 1) ^ 0u);
  for (std::size_t i = 1; i < ids.size(); ++i) acc = ((acc << 1) ^ ids[i]) & 0xFFFFu;
  return static_cast<std::uint16_t>(acc);
}

inline std::uint16_t compute_ist(const InputSequence& seq) {
  return fold_transition(seq.interrupt_ids());
}
inline std::uint16_t compute_est(const InputSequence& seq) {
  return fold_transition(seq.exception_ids());
}

// Distinct IST and EST values seen across executed inputs.
class TransitionTracker {
 public:
  void observe(const InputSequence& seq) {
    ist_.insert(compute_ist(seq));
    est_.insert(compute_est(seq));
  }
  std::size_t ist_distinct() const { return ist_.size(); }
  std::size_t est_distinct() const { return est_.size(); }

 private:
  std::unordered_set<std::uint16_t> ist_, est_;
};

}  // namespace distillfuzz
