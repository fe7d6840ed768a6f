#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "distillfuzz/isa.hpp"

namespace distillfuzz {

struct EventCaps {
  std::size_t max_intr = 3;
  std::size_t max_exc = 3;
  friend bool operator==(const EventCaps&, const EventCaps&) = default;
};

enum class SeqViolation : std::uint8_t {
  kEmpty,          // no instruction slots
  kEventCap,       // more interrupts or exceptions than the caps allow
  kEventId,        // interrupt id outside 1..9 or exception id outside 1..14
  kPrivilege,      // interrupt priority not U/S/M
  kInstruction,    // an instruction fails check()
};

constexpr const char* to_string(SeqViolation v) {
  switch (v) {
    case SeqViolation::kEmpty: return "Empty";
    case SeqViolation::kEventCap: return "EventCap";
    case SeqViolation::kEventId: return "EventId";
    case SeqViolation::kPrivilege: return "Privilege";
    case SeqViolation::kInstruction: return "Instruction";
  }
  return "?";
}

class SequenceError : public std::invalid_argument {
 public:
  SequenceError(SeqViolation v, std::size_t slot)
      : std::invalid_argument(std::string("invalid input sequence: ") + to_string(v) +
                              " at slot " + std::to_string(slot)),
        violation_(v),
        slot_(slot) {}
  SeqViolation violation() const { return violation_; }
  std::size_t slot() const { return slot_; }

 private:
  SeqViolation violation_;
  std::size_t slot_;
};

struct SeqCheckFailure {
  SeqViolation violation;
  std::size_t slot;
};

inline std::optional<SeqCheckFailure> check_slots(const std::vector<EventSlot>& slots,
                                                  const EventCaps& caps) {
  std::size_t instrs = 0, intrs = 0, excs = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    if (const auto* in = std::get_if<Instruction>(&s)) {
      if (check(*in)) return SeqCheckFailure{SeqViolation::kInstruction, i};
      ++instrs;
    } else if (const auto* it = std::get_if<Interrupt>(&s)) {
      if (it->id < 1 || it->id > kNumInterrupts) return SeqCheckFailure{SeqViolation::kEventId, i};
      if (static_cast<std::uint8_t>(it->priority) > 2)
        return SeqCheckFailure{SeqViolation::kPrivilege, i};
      if (++intrs > caps.max_intr) return SeqCheckFailure{SeqViolation::kEventCap, i};
    } else {
      const auto& ex = std::get<Exception>(s);
      if (ex.id < 1 || ex.id > kNumExceptions) return SeqCheckFailure{SeqViolation::kEventId, i};
      if (++excs > caps.max_exc) return SeqCheckFailure{SeqViolation::kEventCap, i};
    }
  }
  if (instrs == 0) return SeqCheckFailure{SeqViolation::kEmpty, slots.size()};
  return std::nullopt;
}

// An executable input: instructions interleaved with interrupt and exception
// slots. Immutable once built; every instance satisfies the invariants.
class InputSequence {
 public:
  explicit InputSequence(std::vector<EventSlot> slots, const EventCaps& caps = {})
      : slots_(std::move(slots)) {
    if (auto bad = check_slots(slots_, caps)) throw SequenceError(bad->violation, bad->slot);
    for (const auto& s : slots_) length_ += is_instruction(s) ? 1 : 0;
  }

  static std::variant<InputSequence, SeqCheckFailure> make(std::vector<EventSlot> slots,
                                                           const EventCaps& caps = {}) {
    if (auto bad = check_slots(slots, caps)) return *bad;
    return InputSequence(std::move(slots), caps);
  }

  const std::vector<EventSlot>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }

  // Number of instruction slots; events do not count.
  std::size_t length() const { return length_; }

  std::vector<Instruction> instructions() const {
    std::vector<Instruction> out;
    out.reserve(length_);
    for (const auto& s : slots_)
      if (const auto* in = std::get_if<Instruction>(&s)) out.push_back(*in);
    return out;
  }

  std::vector<std::uint8_t> interrupt_ids() const {
    std::vector<std::uint8_t> out;
    for (const auto& s : slots_)
      if (const auto* it = std::get_if<Interrupt>(&s)) out.push_back(it->id);
    return out;
  }

  std::vector<std::uint8_t> exception_ids() const {
    std::vector<std::uint8_t> out;
    for (const auto& s : slots_)
      if (const auto* ex = std::get_if<Exception>(&s)) out.push_back(ex->id);
    return out;
  }

  std::size_t interrupt_count() const { return count<Interrupt>(); }
  std::size_t exception_count() const { return count<Exception>(); }

  // Same instructions, events removed.
  InputSequence without_events() const {
    std::vector<EventSlot> out;
    out.reserve(length_);
    for (const auto& s : slots_)
      if (is_instruction(s)) out.push_back(s);
    return InputSequence(std::move(out), EventCaps{0, 0});
  }

  friend bool operator==(const InputSequence& a, const InputSequence& b) {
    return a.slots_ == b.slots_;
  }

 private:
  template <class T>
  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& s : slots_) n += std::holds_alternative<T>(s) ? 1 : 0;
    return n;
  }

  std::vector<EventSlot> slots_;
  std::size_t length_ = 0;
};

// Caps large enough that only the structural invariants apply.
inline constexpr EventCaps kUncapped{static_cast<std::size_t>(-1), static_cast<std::size_t>(-1)};

}  // namespace distillfuzz
