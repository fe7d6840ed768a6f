#pragma once

// Binary framing for input sequences, used for hashing and deduplication.
//
//   "MRVS" | version:u8 | slot_count:u32le | slot*
//   slot := 0 op rd rs1 rs2 imm:i16le rm     (instruction, 8 bytes)
//         | 1 id priority                    (interrupt, 3 bytes)
//         | 2 id                             (exception, 2 bytes)

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "distillfuzz/hash.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

inline constexpr std::array<std::uint8_t, 4> kCodecMagic = {'M', 'R', 'V', 'S'};
inline constexpr std::uint8_t kCodecVersion = 1;

enum class DecodeErrorKind : std::uint8_t {
  kBadMagic,
  kTruncated,
  kBadTag,
  kTrailingBytes,
  kInvariantViolation,
};

struct DecodeError {
  DecodeErrorKind kind;
  std::size_t offset = 0;
  SeqViolation which = SeqViolation::kEmpty;  // meaningful for kInvariantViolation

  friend bool operator==(const DecodeError&, const DecodeError&) = default;
};

inline std::string describe(const DecodeError& e) {
  switch (e.kind) {
    case DecodeErrorKind::kBadMagic: return "bad magic";
    case DecodeErrorKind::kTruncated: return "truncated at byte " + std::to_string(e.offset);
    case DecodeErrorKind::kBadTag: return "unknown slot tag at byte " + std::to_string(e.offset);
    case DecodeErrorKind::kTrailingBytes:
      return "trailing bytes after byte " + std::to_string(e.offset);
    case DecodeErrorKind::kInvariantViolation:
      return std::string("invariant violation: ") + to_string(e.which);
  }
  return "?";
}

inline std::vector<std::uint8_t> encode(const InputSequence& seq) {
  std::vector<std::uint8_t> out(kCodecMagic.begin(), kCodecMagic.end());
  out.push_back(kCodecVersion);
  const auto n = static_cast<std::uint32_t>(seq.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  for (const auto& slot : seq.slots()) {
    if (const auto* in = std::get_if<Instruction>(&slot)) {
      const auto imm = static_cast<std::uint16_t>(in->imm);
      out.insert(out.end(), {0, static_cast<std::uint8_t>(in->op), in->rd, in->rs1, in->rs2,
                             static_cast<std::uint8_t>(imm & 0xFF),
                             static_cast<std::uint8_t>(imm >> 8), in->rm});
    } else if (const auto* it = std::get_if<Interrupt>(&slot)) {
      out.insert(out.end(), {1, it->id, static_cast<std::uint8_t>(it->priority)});
    } else {
      out.insert(out.end(), {2, std::get<Exception>(slot).id});
    }
  }
  return out;
}

using DecodeResult = std::variant<InputSequence, DecodeError>;

inline DecodeResult decode(std::span<const std::uint8_t> bytes, const EventCaps& caps = {}) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) { return pos + n <= bytes.size(); };

  if (bytes.size() < kCodecMagic.size()) return DecodeError{DecodeErrorKind::kTruncated, 0};
  for (std::size_t i = 0; i < kCodecMagic.size(); ++i)
    if (bytes[i] != kCodecMagic[i]) return DecodeError{DecodeErrorKind::kBadMagic, i};
  pos = kCodecMagic.size();
  if (!need(1)) return DecodeError{DecodeErrorKind::kTruncated, pos};
  if (bytes[pos] != kCodecVersion) return DecodeError{DecodeErrorKind::kBadMagic, pos};
  ++pos;
  if (!need(4)) return DecodeError{DecodeErrorKind::kTruncated, pos};
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) count |= std::uint32_t{bytes[pos + i]} << (8 * i);
  pos += 4;

  std::vector<EventSlot> slots;
  slots.reserve(std::min<std::size_t>(count, (bytes.size() - pos) / 2));
  for (std::uint32_t k = 0; k < count; ++k) {
    if (!need(1)) return DecodeError{DecodeErrorKind::kTruncated, pos};
    const std::uint8_t tag = bytes[pos];
    switch (tag) {
      case 0: {
        if (!need(8)) return DecodeError{DecodeErrorKind::kTruncated, pos};
        Instruction in;
        in.op = static_cast<Opcode>(bytes[pos + 1]);
        in.rd = bytes[pos + 2];
        in.rs1 = bytes[pos + 3];
        in.rs2 = bytes[pos + 4];
        in.imm = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(bytes[pos + 5] | (bytes[pos + 6] << 8)));
        in.rm = bytes[pos + 7];
        slots.emplace_back(in);
        pos += 8;
        break;
      }
      case 1:
        if (!need(3)) return DecodeError{DecodeErrorKind::kTruncated, pos};
        slots.emplace_back(Interrupt{bytes[pos + 1], static_cast<Privilege>(bytes[pos + 2])});
        pos += 3;
        break;
      case 2:
        if (!need(2)) return DecodeError{DecodeErrorKind::kTruncated, pos};
        slots.emplace_back(Exception{bytes[pos + 1]});
        pos += 2;
        break;
      default: return DecodeError{DecodeErrorKind::kBadTag, pos};
    }
  }
  if (pos != bytes.size()) return DecodeError{DecodeErrorKind::kTrailingBytes, pos};

  auto made = InputSequence::make(std::move(slots), caps);
  if (auto* bad = std::get_if<SeqCheckFailure>(&made))
    return DecodeError{DecodeErrorKind::kInvariantViolation, bad->slot, bad->violation};
  return std::get<InputSequence>(std::move(made));
}

// Stable identity of a sequence, shared by corpus dedup and report keys.
inline std::uint64_t sequence_hash(const InputSequence& seq) {
  Fnv1a64 h;
  for (auto b : encode(seq)) h.byte(b);
  return h.value();
}

}  // namespace distillfuzz
