#pragma once

// MiniRV: a 21-opcode toy ISA with 16 integer registers, 8 binary32
// registers, 64 KiB of word-addressed memory and a handful of machine CSRs.
// The program counter counts instructions, not bytes.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

namespace distillfuzz {

inline constexpr std::size_t kNumRegs = 16;
inline constexpr std::size_t kNumFRegs = 8;
inline constexpr std::uint32_t kMemBytes = 64 * 1024;
inline constexpr std::uint8_t kNumInterrupts = 9;   // I1..I9
inline constexpr std::uint8_t kNumExceptions = 14;  // E1..E14

enum class Opcode : std::uint8_t {
  kAdd,
  kSub,
  kXor,
  kOr,
  kAnd,
  kShl,
  kShr,
  kMul,
  kLoad,
  kStore,
  kBeq,
  kJal,
  kFadd,
  kFdiv,
  kFsqrt,
  kCsrrw,
  kCsrrs,
  kEcall,
  kEbreak,
  kMret,
  kNop,
};
inline constexpr std::size_t kNumOpcodes = 21;

inline constexpr std::array<std::string_view, kNumOpcodes> kOpcodeNames = {
    "add",  "sub",  "xor",   "or",    "and",   "shl",   "shr",
    "mul",  "load", "store", "beq",   "jal",   "fadd",  "fdiv",
    "fsqrt", "csrrw", "csrrs", "ecall", "ebreak", "mret", "nop"};

constexpr std::string_view mnemonic(Opcode op) {
  return kOpcodeNames[static_cast<std::size_t>(op)];
}

inline std::optional<Opcode> opcode_from_mnemonic(std::string_view s) {
  for (std::size_t i = 0; i < kNumOpcodes; ++i)
    if (kOpcodeNames[i] == s) return static_cast<Opcode>(i);
  return std::nullopt;
}

enum class Privilege : std::uint8_t { kUser = 0, kSupervisor = 1, kMachine = 2 };

constexpr char privilege_letter(Privilege p) {
  switch (p) {
    case Privilege::kUser: return 'U';
    case Privilege::kSupervisor: return 'S';
    case Privilege::kMachine: return 'M';
  }
  return '?';
}

enum class Csr : std::uint8_t {
  kMstatus,
  kMcause,
  kMtvec,
  kMepc,
  kMinstret,
  kMtime,
  kMtimecmp,
  kMscratch,  // bumped by every trap handler
};
inline constexpr std::size_t kNumCsrs = 8;

inline constexpr std::array<std::string_view, kNumCsrs> kCsrNames = {
    "mstatus", "mcause", "mtvec", "mepc",
    "minstret", "mtime", "mtimecmp", "mscratch"};

inline std::optional<Csr> csr_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kNumCsrs; ++i)
    if (kCsrNames[i] == s) return static_cast<Csr>(i);
  return std::nullopt;
}

constexpr bool is_fp(Opcode op) {
  return op == Opcode::kFadd || op == Opcode::kFdiv || op == Opcode::kFsqrt;
}
constexpr bool is_alu(Opcode op) {
  return static_cast<std::uint8_t>(op) <= static_cast<std::uint8_t>(Opcode::kMul);
}
constexpr bool is_csr(Opcode op) {
  return op == Opcode::kCsrrw || op == Opcode::kCsrrs;
}
constexpr bool is_jump(Opcode op) {
  return op == Opcode::kJal || op == Opcode::kBeq;
}
constexpr bool is_mem(Opcode op) {
  return op == Opcode::kLoad || op == Opcode::kStore;
}

// rm values 5 and 6 are reserved; 7 selects the dynamic mode, which this
// model pins to round-to-nearest-even.
constexpr bool is_valid_rounding_mode(std::uint8_t rm) { return rm <= 4 || rm == 7; }

struct Instruction {
  Opcode op = Opcode::kNop;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int16_t imm = 0;
  std::uint8_t rm = 0;

  friend constexpr bool operator==(const Instruction&, const Instruction&) = default;
};

// Which encoding fields an opcode uses. Unused fields must be zero so that
// every instruction has exactly one text and one binary form.
struct FieldUse {
  bool rd, rs1, rs2, imm, rm;
  std::uint8_t reg_limit;  // 16 for integer operands, 8 for FP operands
};

constexpr FieldUse field_use(Opcode op) {
  switch (op) {
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kXor:
    case Opcode::kOr:
    case Opcode::kAnd:
    case Opcode::kShl:
    case Opcode::kShr:
    case Opcode::kMul: return {true, true, true, true, false, 16};
    case Opcode::kLoad: return {true, true, false, true, false, 16};
    case Opcode::kStore:
    case Opcode::kBeq: return {false, true, true, true, false, 16};
    case Opcode::kJal: return {true, false, false, true, false, 16};
    case Opcode::kFadd:
    case Opcode::kFdiv: return {true, true, true, false, true, 8};
    case Opcode::kFsqrt: return {true, true, false, false, true, 8};
    case Opcode::kCsrrw:
    case Opcode::kCsrrs: return {true, true, false, true, false, 16};
    case Opcode::kEcall:
    case Opcode::kEbreak:
    case Opcode::kMret:
    case Opcode::kNop: return {false, false, false, false, false, 16};
  }
  return {};
}

// CSR instructions carry the CSR number in imm; 0..7 are implemented, the
// rest of 0..4095 encode but trap as illegal when executed.
inline constexpr std::int16_t kMaxCsrNumber = 4095;

enum class InstrViolation : std::uint8_t {
  kOpcodeRange,
  kRegisterRange,
  kRoundingModeRange,
  kCsrNumberRange,
  kNonCanonical,
};

constexpr std::optional<InstrViolation> check(const Instruction& in) {
  if (static_cast<std::size_t>(in.op) >= kNumOpcodes) return InstrViolation::kOpcodeRange;
  const FieldUse use = field_use(in.op);
  if ((!use.rd && in.rd) || (!use.rs1 && in.rs1) || (!use.rs2 && in.rs2) ||
      (!use.imm && in.imm) || (!use.rm && in.rm))
    return InstrViolation::kNonCanonical;
  if (in.rd >= use.reg_limit || in.rs1 >= use.reg_limit || in.rs2 >= use.reg_limit)
    return InstrViolation::kRegisterRange;
  if (in.rm > 7) return InstrViolation::kRoundingModeRange;
  if (is_csr(in.op) && (in.imm < 0 || in.imm > kMaxCsrNumber))
    return InstrViolation::kCsrNumberRange;
  return std::nullopt;
}

struct Interrupt {
  std::uint8_t id = 1;  // 1..9
  Privilege priority = Privilege::kMachine;
  friend constexpr bool operator==(const Interrupt&, const Interrupt&) = default;
};

struct Exception {
  std::uint8_t id = 1;  // 1..14
  friend constexpr bool operator==(const Exception&, const Exception&) = default;
};

using EventSlot = std::variant<Instruction, Interrupt, Exception>;

constexpr bool is_instruction(const EventSlot& s) {
  return std::holds_alternative<Instruction>(s);
}

// Fixed exception bindings; every other id is reachable only through an
// explicit exception slot.
inline constexpr std::uint8_t kExcIllegalInstruction = 2;
inline constexpr std::uint8_t kExcMisalignedLoad = 4;
inline constexpr std::uint8_t kExcMisalignedStore = 6;
inline constexpr std::uint8_t kExcEcall = 11;
// The machine timer raises I7 at machine priority.
inline constexpr std::uint8_t kTimerInterrupt = 7;

inline constexpr std::uint32_t kInterruptBit = 0x80000000u;

constexpr std::uint32_t interrupt_cause(std::uint8_t id) { return kInterruptBit | id; }
constexpr std::uint32_t exception_cause(std::uint8_t id) { return id; }

}  // namespace distillfuzz
