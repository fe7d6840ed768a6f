#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "distillfuzz/binary32.hpp"
#include "distillfuzz/hash.hpp"
#include "distillfuzz/isa.hpp"

namespace distillfuzz {

namespace mstatus {
inline constexpr std::uint32_t kMie = 1u << 3;
inline constexpr std::uint32_t kMpie = 1u << 7;
inline constexpr unsigned kMppShift = 11;
inline constexpr std::uint32_t kMppMask = 3u << kMppShift;
inline constexpr unsigned kFsShift = 13;
inline constexpr std::uint32_t kFsMask = 3u << kFsShift;
inline constexpr std::uint32_t kWritable = kMie | kMpie | kMppMask | kFsMask;

inline constexpr std::uint32_t kFsOff = 0;
inline constexpr std::uint32_t kFsInitial = 1;
inline constexpr std::uint32_t kFsDirty = 3;

constexpr Privilege mpp(std::uint32_t v) {
  return static_cast<Privilege>((v & kMppMask) >> kMppShift);
}
constexpr std::uint32_t with_mpp(std::uint32_t v, Privilege p) {
  return (v & ~kMppMask) | (static_cast<std::uint32_t>(p) << kMppShift);
}
constexpr std::uint32_t fs(std::uint32_t v) { return (v & kFsMask) >> kFsShift; }
constexpr std::uint32_t with_fs(std::uint32_t v, std::uint32_t f) {
  return (v & ~kFsMask) | ((f & 3u) << kFsShift);
}

// Software write: only the implemented fields change, and the unused MPP
// encoding 3 collapses to M.
constexpr std::uint32_t legalize_write(std::uint32_t old, std::uint32_t v) {
  std::uint32_t out = (old & ~kWritable) | (v & kWritable);
  if (((out & kMppMask) >> kMppShift) == 3) out = with_mpp(out, Privilege::kMachine);
  return out;
}
}  // namespace mstatus

inline constexpr std::array<float, kNumFRegs> kInitialFregs = {1.0f, 3.0f,  0.1f, 7.0f,
                                                                -2.5f, 10.0f, 0.3f, 2.0f};
inline constexpr std::uint32_t kDefaultMtvec = 0x100;
// mtimecmp holding all-ones means the timer is disarmed.
inline constexpr std::uint32_t kTimerDisarmed = 0xFFFFFFFFu;

struct Flags {
  bool carry = false;
  bool overflow = false;
  friend bool operator==(const Flags&, const Flags&) = default;
};

// One active trap handler. The micro-routine is three steps: save the cause,
// bump mscratch, MRET. mepc/mcause/mstatus are captured at entry and reloaded
// at MRET so a nested trap cannot corrupt the outer return path.
struct HandlerFrame {
  std::uint32_t cause = 0;
  std::uint8_t rank = 0;  // interrupts: priority level; exceptions: 3
  bool synchronous = false;
  std::uint8_t step = 0;
  std::uint32_t saved_mepc = 0;
  std::uint32_t saved_mcause = 0;
  std::uint32_t saved_mstatus = 0;
  friend bool operator==(const HandlerFrame&, const HandlerFrame&) = default;
};
inline constexpr std::uint8_t kExceptionRank = 3;
inline constexpr std::uint8_t kHandlerSteps = 3;

struct ArchState {
  std::array<std::uint32_t, kNumRegs> regs{};
  std::array<std::uint32_t, kNumFRegs> fregs{};  // binary32 bit patterns
  std::uint32_t pc = 0;
  Privilege priv = Privilege::kMachine;
  std::array<std::uint32_t, kNumCsrs> csrs{};
  std::map<std::uint16_t, std::uint32_t> mem;  // word index -> value; zero words absent
  bool halted = false;
  Flags flags;
  std::vector<HandlerFrame> handlers;

  std::uint32_t csr(Csr c) const { return csrs[static_cast<std::size_t>(c)]; }
  std::uint32_t& csr(Csr c) { return csrs[static_cast<std::size_t>(c)]; }

  std::uint32_t load_word(std::uint32_t addr) const {
    auto it = mem.find(static_cast<std::uint16_t>(addr >> 2));
    return it == mem.end() ? 0 : it->second;
  }
  void store_word(std::uint32_t addr, std::uint32_t v) {
    const auto w = static_cast<std::uint16_t>(addr >> 2);
    if (v == 0)
      mem.erase(w);
    else
      mem[w] = v;
  }

  std::uint64_t mem_digest() const {
    Fnv1a64 h;
    for (const auto& [w, v] : mem) {
      h.u32(w);
      h.u32(v);
    }
    return h.value();
  }

  static ArchState initial() {
    ArchState s;
    for (std::size_t i = 0; i < kNumFRegs; ++i) s.fregs[i] = f32_bits(kInitialFregs[i]);
    std::uint32_t ms = mstatus::kMie;
    ms = mstatus::with_mpp(ms, Privilege::kUser);
    ms = mstatus::with_fs(ms, mstatus::kFsInitial);
    s.csr(Csr::kMstatus) = ms;
    s.csr(Csr::kMtvec) = kDefaultMtvec;
    s.csr(Csr::kMtimecmp) = kTimerDisarmed;
    return s;
  }

  friend bool operator==(const ArchState&, const ArchState&) = default;
};

struct TrapRecord {
  std::uint32_t cause = 0;  // mcause encoding, interrupt bit set for interrupts
  std::uint32_t pc = 0;     // pc at the moment of delivery
  Privilege priv_before = Privilege::kMachine;
  std::uint32_t mepc = 0;    // as written at entry
  std::uint32_t mcause = 0;  // as written at entry
  std::uint8_t depth = 0;    // handler depth after entry
  bool synchronous = false;
  std::size_t slot = static_cast<std::size_t>(-1);  // event slot, or npos if raised internally
  friend bool operator==(const TrapRecord&, const TrapRecord&) = default;
};

// Per-step digest of architectural effects, used to locate the first point
// where two runs disagree.
struct Commit {
  std::uint32_t pc = 0;
  std::uint64_t effect = 0;
  friend bool operator==(const Commit&, const Commit&) = default;
};

struct ExecOutcome {
  ArchState final;
  std::uint64_t retired = 0;
  std::vector<TrapRecord> trap_log;
  std::vector<Commit> commits;
  std::uint64_t steps = 0;  // instructions attempted plus handler micro-steps
  bool budget_exhausted = false;
  std::uint16_t bugs_fired = 0;  // DUT only: which planted bugs hit their trigger
};

}  // namespace distillfuzz
