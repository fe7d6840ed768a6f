#pragma once

// Random well-formed instructions and sequences. Operand distributions lean
// toward values that exercise interesting paths: small immediates, aligned
// addresses with occasional misalignment, short forward jumps, implemented
// CSR numbers with occasional unimplemented ones.

#include <array>
#include <cstdint>
#include <vector>

#include "distillfuzz/rng.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

namespace gen_detail {
// Relative weights per opcode, in Opcode order.
inline constexpr std::array<unsigned, kNumOpcodes> kOpWeights = {
    20, 14, 10, 10, 10, 10, 12, 12,  // add sub xor or and shl shr mul
    12, 12, 10, 4,                   // load store beq jal
    12, 12, 8,                       // fadd fdiv fsqrt
    12, 8,                           // csrrw csrrs
    2, 1, 2, 6};                     // ecall ebreak mret nop

inline constexpr unsigned total_weight() {
  unsigned t = 0;
  for (auto w : kOpWeights) t += w;
  return t;
}

inline Opcode pick_opcode(Rng& rng) {
  auto r = static_cast<unsigned>(rng.below(total_weight()));
  for (std::size_t i = 0; i < kNumOpcodes; ++i) {
    if (r < kOpWeights[i]) return static_cast<Opcode>(i);
    r -= kOpWeights[i];
  }
  return Opcode::kNop;
}

inline std::int16_t small_imm(Rng& rng) {
  const auto roll = rng.below(10);
  if (roll < 4) return 0;
  if (roll < 8) return static_cast<std::int16_t>(rng.range(-8, 8));
  return static_cast<std::int16_t>(rng.range(-32768, 32767));
}
}  // namespace gen_detail

inline Instruction random_instruction(Rng& rng) {
  using namespace gen_detail;
  Instruction in;
  in.op = pick_opcode(rng);
  auto xr = [&] { return static_cast<std::uint8_t>(rng.below(kNumRegs)); };
  auto fr = [&] { return static_cast<std::uint8_t>(rng.below(kNumFRegs)); };
  switch (in.op) {
    case Opcode::kLoad:
    case Opcode::kStore: {
      (in.op == Opcode::kLoad ? in.rd : in.rs2) = xr();
      in.rs1 = rng.chance(0.5) ? 0 : xr();
      std::int16_t off = static_cast<std::int16_t>(4 * rng.range(-16, 64));
      if (rng.chance(0.15)) off = static_cast<std::int16_t>(off + rng.range(1, 3));
      in.imm = off;
      break;
    }
    case Opcode::kBeq:
      in.rs1 = xr();
      in.rs2 = xr();
      in.imm = static_cast<std::int16_t>(rng.chance(0.85) ? rng.range(1, 4) : rng.range(-3, -1));
      break;
    case Opcode::kJal:
      in.rd = xr();
      in.imm = static_cast<std::int16_t>(rng.chance(0.9) ? rng.range(1, 4) : rng.range(-3, -1));
      break;
    case Opcode::kFadd:
    case Opcode::kFdiv:
      in.rd = fr();
      in.rs1 = fr();
      in.rs2 = fr();
      in.rm = static_cast<std::uint8_t>(rng.below(8));
      break;
    case Opcode::kFsqrt:
      in.rd = fr();
      in.rs1 = fr();
      in.rm = static_cast<std::uint8_t>(rng.below(8));
      break;
    case Opcode::kCsrrw:
    case Opcode::kCsrrs:
      in.rd = xr();
      in.rs1 = xr();
      in.imm = static_cast<std::int16_t>(rng.chance(0.05) ? rng.range(kNumCsrs, kMaxCsrNumber)
                                                          : rng.below(kNumCsrs));
      break;
    case Opcode::kEcall:
    case Opcode::kEbreak:
    case Opcode::kMret:
    case Opcode::kNop: break;
    default:
      in.rd = xr();
      in.rs1 = xr();
      in.rs2 = xr();
      in.imm = small_imm(rng);
      break;
  }
  return in;
}

inline std::vector<EventSlot> random_instruction_slots(Rng& rng, std::size_t n) {
  std::vector<EventSlot> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(random_instruction(rng));
  return out;
}

inline InputSequence random_sequence(Rng& rng, std::size_t n) {
  return InputSequence(random_instruction_slots(rng, n), EventCaps{0, 0});
}

}  // namespace distillfuzz
