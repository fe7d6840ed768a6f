#pragma once

// Shared MiniRV interpreter. The golden model is Machine with an empty bug
// set; the DUT is the same core with planted bugs and a coverage observer.
//
// Execution walks instruction indices. Interrupt and exception slots attach
// to the gap after the instruction that precedes them and arrive the first
// time that gap is passed. Inside a gap the core runs micro-cycles: admit one
// arrival, check the timer, deliver the best pending event if it outranks the
// running handler, otherwise advance the innermost handler by one step.

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "distillfuzz/arch_state.hpp"
#include "distillfuzz/binary32.hpp"
#include "distillfuzz/bugs.hpp"
#include "distillfuzz/coverage.hpp"
#include "distillfuzz/hash.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

inline constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

struct PendingEvent {
  EventSlot event;  // Interrupt or Exception
  bool synchronous = false;
  std::size_t slot = kNoSlot;
};

constexpr std::uint8_t event_rank(const EventSlot& e) {
  if (const auto* it = std::get_if<Interrupt>(&e)) return static_cast<std::uint8_t>(it->priority);
  return kExceptionRank;
}

constexpr std::uint32_t event_cause(const EventSlot& e) {
  if (const auto* it = std::get_if<Interrupt>(&e)) return interrupt_cause(it->id);
  return exception_cause(std::get<Exception>(e).id);
}

// Index of the event to deliver now, if any. With no handler running,
// exceptions always win over interrupts and interrupts need MIE when already
// in machine mode. Inside a handler only a strictly higher rank preempts.
// Equal rank goes to the earliest arrival.
inline std::optional<std::size_t> select_pending(const ArchState& s,
                                                 const std::vector<PendingEvent>& pending) {
  const bool in_handler = !s.handlers.empty();
  const int floor = in_handler ? s.handlers.back().rank : -1;
  const bool intr_enabled =
      s.priv != Privilege::kMachine || (s.csr(Csr::kMstatus) & mstatus::kMie) != 0;
  std::optional<std::size_t> best;
  int best_rank = -1;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& e = pending[i].event;
    const int r = event_rank(e);
    if (r <= floor) continue;
    if (!in_handler && std::holds_alternative<Interrupt>(e) && !intr_enabled) continue;
    if (r > best_rank) {
      best = i;
      best_rank = r;
    }
  }
  return best;
}

// Trap entry without any bug applied. Returns the record for the trap log.
inline TrapRecord enter_trap(ArchState& s, const PendingEvent& p, std::uint32_t mepc) {
  TrapRecord rec;
  rec.cause = event_cause(p.event);
  rec.pc = s.pc;
  rec.priv_before = s.priv;
  rec.synchronous = p.synchronous;
  rec.slot = p.slot;

  std::uint32_t ms = s.csr(Csr::kMstatus);
  ms = (ms & mstatus::kMie) ? (ms | mstatus::kMpie) : (ms & ~mstatus::kMpie);
  ms &= ~mstatus::kMie;
  ms = mstatus::with_mpp(ms, s.priv);
  s.csr(Csr::kMstatus) = ms;
  s.csr(Csr::kMepc) = mepc;
  s.csr(Csr::kMcause) = rec.cause;
  s.priv = Privilege::kMachine;
  s.pc = s.csr(Csr::kMtvec);
  if (const auto* it = std::get_if<Interrupt>(&p.event); it && it->id == kTimerInterrupt)
    s.csr(Csr::kMtimecmp) = kTimerDisarmed;

  HandlerFrame f;
  f.cause = rec.cause;
  f.rank = event_rank(p.event);
  f.synchronous = p.synchronous;
  f.saved_mepc = mepc;
  f.saved_mcause = rec.cause;
  f.saved_mstatus = ms;
  s.handlers.push_back(f);

  rec.mepc = mepc;
  rec.mcause = rec.cause;
  rec.depth = static_cast<std::uint8_t>(s.handlers.size());
  return rec;
}

// Picks and delivers the highest-priority deliverable pending event.
inline std::pair<ArchState, std::optional<EventSlot>> deliver_event(
    ArchState state, const std::vector<PendingEvent>& pending) {
  auto idx = select_pending(state, pending);
  if (!idx) return {std::move(state), std::nullopt};
  enter_trap(state, pending[*idx], state.pc);
  return {std::move(state), pending[*idx].event};
}

inline std::pair<ArchState, std::optional<EventSlot>> deliver_event(
    ArchState state, const std::vector<EventSlot>& pending) {
  std::vector<PendingEvent> p;
  p.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) p.push_back({pending[i], false, i});
  return deliver_event(std::move(state), p);
}

// Mask bits for registers touched by an instruction: x0..x15 in bits 0..15,
// f0..f7 in bits 16..23.
inline constexpr std::uint32_t xbit(unsigned r) { return 1u << r; }
inline constexpr std::uint32_t fbit(unsigned r) { return 1u << (16 + r); }

struct InstrEffect {
  std::size_t slot = 0;      // slot index in the input sequence
  std::size_t index = 0;     // instruction index (== pc before)
  Instruction instr;
  std::uint32_t reads = 0;
  std::uint32_t writes = 0;
  bool taken = false;        // branch or jump redirected pc
  std::uint32_t next_pc = 0;
  std::uint32_t trap_cause = 0;  // synchronous exception raised, 0 if none
  int csr = -1;              // CSR number accessed, -1 if none
  bool csr_write = false;
  Privilege priv_before = Privilege::kMachine;
};

// Observer hooks, all optional. Derive and override by name hiding.
struct NullObserver {
  template <class M>
  void on_instruction(const InstrEffect&, const M&) {}
  template <class M>
  void on_micro(const M&) {}
  template <class M>
  void on_delivery(const TrapRecord&, const M&) {}
  template <class M>
  void on_timer_pend(const M&) {}
};

template <class Observer = NullObserver>
class Machine {
 public:
  Machine(const InputSequence& seq, BugSet bugs, Observer& obs) : bugs_(bugs), obs_(obs) {
    gaps_.resize(1);
    for (std::size_t i = 0; i < seq.slots().size(); ++i) {
      const auto& s = seq.slots()[i];
      if (const auto* in = std::get_if<Instruction>(&s)) {
        code_.push_back(*in);
        code_slot_.push_back(i);
        gaps_.emplace_back();
      } else {
        gaps_.back().push_back(i);
      }
    }
    slots_ = &seq.slots();
    gap_done_.assign(gaps_.size(), false);
    state_ = ArchState::initial();
  }

  ExecOutcome run(std::uint64_t budget) {
    ExecOutcome out;
    run_gap(0);
    const std::uint64_t attempt_cap = 2 * budget + 16;
    std::uint64_t attempts = 0;
    while (!state_.halted) {
      if (state_.pc >= code_.size()) break;
      if (retired_ >= budget || attempts >= attempt_cap) {
        out.budget_exhausted = true;
        break;
      }
      ++attempts;
      const std::size_t k = state_.pc;
      step(k);
      if (state_.halted) break;
      run_gap(k + 1);
    }
    out.final = std::move(state_);
    out.retired = retired_;
    out.trap_log = std::move(trap_log_);
    out.commits = std::move(commits_);
    out.steps = steps_;
    out.bugs_fired = fired_;
    return out;
  }

  const ArchState& state() const { return state_; }
  const std::vector<PendingEvent>& pending() const { return pending_; }

  ControlStateVector control_state() const {
    ControlStateVector v{};
    namespace ci = csv_index;
    v[ci::kPriv] = static_cast<std::uint8_t>(state_.priv);
    v[ci::kDepth] = static_cast<std::uint8_t>(state_.handlers.size());
    for (const auto& p : pending_) {
      if (const auto* it = std::get_if<Interrupt>(&p.event))
        v[ci::kIntrPending + it->id - 1] = static_cast<std::uint8_t>(1 + p.synchronous);
      else
        v[ci::kExcPending + std::get<Exception>(p.event).id - 1] =
            static_cast<std::uint8_t>(1 + p.synchronous);
    }
    const std::uint32_t ms = state_.csr(Csr::kMstatus);
    v[ci::kMie] = (ms & mstatus::kMie) ? 1 : 0;
    v[ci::kMpie] = (ms & mstatus::kMpie) ? 1 : 0;
    v[ci::kMpp] = static_cast<std::uint8_t>(mstatus::mpp(ms));
    v[ci::kFs] = static_cast<std::uint8_t>(mstatus::fs(ms));
    v[ci::kBranchTaken] = last_taken_ ? 1 : 0;
    if (!state_.handlers.empty()) v[ci::kHandlerStep] = state_.handlers.back().step;
    return v;
  }

 private:
  bool bug(Bug b) {
    if (!bugs_.has(b)) return false;
    fired_ |= bug_bit(b);
    return true;
  }

  std::uint32_t rx(std::uint8_t r, InstrEffect& e) {
    e.reads |= xbit(r);
    if (r == 0) return fwd_live_ ? fwd_value_ : 0;
    return state_.regs[r];
  }
  void wx(std::uint8_t r, std::uint32_t v, InstrEffect& e) {
    e.writes |= xbit(r);
    if (r == 0) {
      if (bug(Bug::kB9)) {
        fwd_next_ = true;
        fwd_value_next_ = v;
      }
      return;
    }
    state_.regs[r] = v;
  }
  float rf(std::uint8_t r, InstrEffect& e) {
    e.reads |= fbit(r);
    return f32_from_bits(state_.fregs[r]);
  }
  void wf(std::uint8_t r, float v, InstrEffect& e) {
    e.writes |= fbit(r);
    state_.fregs[r] = canonical_bits(v);
  }

  void raise(std::uint8_t exc_id, InstrEffect& e) {
    e.trap_cause = exception_cause(exc_id);
    PendingEvent p{Exception{exc_id}, true, kNoSlot};
    // Synchronous exceptions sit ahead of everything already pending.
    pending_.insert(pending_.begin(), p);
  }

  void commit(std::uint32_t pc, std::uint64_t effect) { commits_.push_back({pc, effect}); }

  std::uint64_t effect_digest(const InstrEffect& e) const {
    Fnv1a64 h;
    h.u32(e.index);
    h.u32(state_.pc);
    h.u32(e.trap_cause);
    for (unsigned r = 0; r < 16; ++r)
      if (e.writes & xbit(r)) h.u32(state_.regs[r]);
    for (unsigned r = 0; r < 8; ++r)
      if (e.writes & fbit(r)) h.u32(state_.fregs[r]);
    h.byte(static_cast<std::uint8_t>(state_.flags.carry | (state_.flags.overflow << 1)));
    for (auto c : state_.csrs) h.u32(c);
    h.byte(static_cast<std::uint8_t>(state_.priv));
    h.u64(state_.mem_digest());
    return h.value();
  }

  void step(std::size_t k) {
    const Instruction in = code_[k];
    InstrEffect e;
    e.slot = code_slot_[k];
    e.index = k;
    e.instr = in;
    e.priv_before = state_.priv;

    fwd_live_ = fwd_next_;
    fwd_value_ = fwd_value_next_;
    fwd_next_ = false;

    bool suppress_minstret = false;
    bool suppress_mtime = false;
    bool count_minstret = true;
    std::uint32_t next_pc = static_cast<std::uint32_t>(k + 1);
    auto& fl = state_.flags;

    auto operand_b = [&] {
      return rx(in.rs2, e) + static_cast<std::uint32_t>(static_cast<std::int32_t>(in.imm));
    };

    switch (in.op) {
      case Opcode::kAdd: {
        const std::uint32_t a = rx(in.rs1, e), b = operand_b(), r = a + b;
        fl.carry = bug(Bug::kB5) ? ((a & b) >> 31) != 0 : r < a;
        fl.overflow = (((a ^ r) & (b ^ r)) >> 31) != 0;
        wx(in.rd, r, e);
        break;
      }
      case Opcode::kSub: {
        const std::uint32_t a = rx(in.rs1, e), b = operand_b(), r = a - b;
        fl.carry = a < b;
        if (bug(Bug::kB11))
          fl.overflow = (((a ^ r) & (b ^ r)) >> 31) != 0;
        else
          fl.overflow = (((a ^ b) & (a ^ r)) >> 31) != 0;
        wx(in.rd, r, e);
        break;
      }
      case Opcode::kXor: wx(in.rd, rx(in.rs1, e) ^ operand_b(), e); break;
      case Opcode::kOr: wx(in.rd, rx(in.rs1, e) | operand_b(), e); break;
      case Opcode::kAnd: wx(in.rd, rx(in.rs1, e) & operand_b(), e); break;
      case Opcode::kShl: {
        const std::uint32_t a = rx(in.rs1, e), b = operand_b();
        wx(in.rd, a << (b & 31), e);
        break;
      }
      case Opcode::kShr: {
        if (in.imm < 0 && bug(Bug::kB8)) break;
        const std::uint32_t a = rx(in.rs1, e), b = operand_b();
        wx(in.rd, a >> (b & 31), e);
        break;
      }
      case Opcode::kMul: {
        const std::uint32_t a = rx(in.rs1, e), b = operand_b();
        const std::int64_t p = static_cast<std::int64_t>(static_cast<std::int32_t>(a)) *
                               static_cast<std::int64_t>(static_cast<std::int32_t>(b));
        const bool skip = in.rd == in.rs1 && in.rd != 0 && bug(Bug::kB10);
        if (!skip) fl.overflow = p != static_cast<std::int32_t>(p);
        wx(in.rd, static_cast<std::uint32_t>(p), e);
        break;
      }
      case Opcode::kLoad: {
        const std::uint32_t addr =
            (rx(in.rs1, e) + static_cast<std::uint32_t>(static_cast<std::int32_t>(in.imm))) &
            (kMemBytes - 1);
        if (addr & 3) {
          raise(kExcMisalignedLoad, e);
          break;
        }
        wx(in.rd, state_.load_word(addr), e);
        break;
      }
      case Opcode::kStore: {
        const std::uint32_t addr =
            (rx(in.rs1, e) + static_cast<std::uint32_t>(static_cast<std::int32_t>(in.imm))) &
            (kMemBytes - 1);
        const std::uint32_t v = rx(in.rs2, e);
        if (addr & 3) {
          raise(kExcMisalignedStore, e);
          break;
        }
        state_.store_word(addr, v);
        break;
      }
      case Opcode::kBeq: {
        if (rx(in.rs1, e) == rx(in.rs2, e)) {
          next_pc = static_cast<std::uint32_t>(static_cast<std::int64_t>(k) + in.imm);
          e.taken = true;
        } else if (bug(Bug::kB4)) {
          state_.csr(Csr::kMstatus) =
              mstatus::with_fs(state_.csr(Csr::kMstatus), mstatus::kFsDirty);
        }
        break;
      }
      case Opcode::kJal:
        wx(in.rd, static_cast<std::uint32_t>(k + 1), e);
        next_pc = static_cast<std::uint32_t>(static_cast<std::int64_t>(k) + in.imm);
        e.taken = true;
        break;
      case Opcode::kFadd:
      case Opcode::kFdiv:
      case Opcode::kFsqrt: {
        const std::uint32_t ms = state_.csr(Csr::kMstatus);
        if (mstatus::fs(ms) == mstatus::kFsOff) {
          raise(kExcIllegalInstruction, e);
          break;
        }
        RoundingMode mode = RoundingMode::kNearestEven;
        if (!is_valid_rounding_mode(in.rm)) {
          if (!bug(Bug::kB3)) {
            raise(kExcIllegalInstruction, e);
            break;
          }
        } else {
          mode = resolve_rounding_mode(in.rm);
        }
        if (in.op != Opcode::kFadd && mode != RoundingMode::kNearestEven && bug(Bug::kB2))
          mode = RoundingMode::kNearestEven;
        const float a = rf(in.rs1, e);
        float r;
        if (in.op == Opcode::kFadd)
          r = fp_add(a, rf(in.rs2, e), mode);
        else if (in.op == Opcode::kFdiv)
          r = fp_div(a, rf(in.rs2, e), mode);
        else
          r = fp_sqrt(a, mode);
        wf(in.rd, r, e);
        state_.csr(Csr::kMstatus) = mstatus::with_fs(ms, mstatus::kFsDirty);
        break;
      }
      case Opcode::kCsrrw:
      case Opcode::kCsrrs: {
        e.csr = in.imm;
        if (state_.priv != Privilege::kMachine && !bug(Bug::kB6)) {
          raise(kExcIllegalInstruction, e);
          break;
        }
        if (in.imm < 0 || static_cast<std::size_t>(in.imm) >= kNumCsrs) {
          raise(kExcIllegalInstruction, e);
          break;
        }
        const auto c = static_cast<Csr>(in.imm);
        const std::uint32_t src = rx(in.rs1, e);
        const std::uint32_t old = state_.csr(c);
        const bool write = in.op == Opcode::kCsrrw || in.rs1 != 0;
        std::uint32_t nv = in.op == Opcode::kCsrrw ? src : (old | src);
        if (write) {
          e.csr_write = true;
          if (c == Csr::kMstatus) nv = mstatus::legalize_write(old, nv);
          state_.csr(c) = nv;
          if (c == Csr::kMinstret) suppress_minstret = !bug(Bug::kB1);
          if (c == Csr::kMtime) suppress_mtime = true;
        }
        wx(in.rd, old, e);
        break;
      }
      case Opcode::kEcall: raise(kExcEcall, e); break;
      case Opcode::kEbreak:
        state_.halted = true;
        if (bug(Bug::kB12)) count_minstret = false;
        break;
      case Opcode::kMret: {
        if (state_.priv != Privilege::kMachine) {
          raise(kExcIllegalInstruction, e);
          break;
        }
        mret_semantics();
        break;
      }
      case Opcode::kNop: break;
    }

    ++steps_;
    last_taken_ = e.taken;
    if (e.trap_cause == 0) {
      ++retired_;
      if (count_minstret && !suppress_minstret) ++state_.csr(Csr::kMinstret);
      if (!suppress_mtime) ++state_.csr(Csr::kMtime);
      state_.pc = next_pc;
    }
    e.next_pc = state_.pc;
    commit(static_cast<std::uint32_t>(k), effect_digest(e));
    obs_.on_instruction(e, *this);
  }

  // priv <- MPP, MIE <- MPIE, MPIE <- 1, MPP <- U.
  void mret_semantics() {
    std::uint32_t ms = state_.csr(Csr::kMstatus);
    state_.priv = mstatus::mpp(ms);
    ms = (ms & mstatus::kMpie) ? (ms | mstatus::kMie) : (ms & ~mstatus::kMie);
    ms |= mstatus::kMpie;
    ms = mstatus::with_mpp(ms, Privilege::kUser);
    state_.csr(Csr::kMstatus) = ms;
  }

  void check_timer() {
    const std::uint32_t cmp = state_.csr(Csr::kMtimecmp);
    if (cmp == kTimerDisarmed || state_.csr(Csr::kMtime) < cmp) return;
    for (const auto& p : pending_)
      if (const auto* it = std::get_if<Interrupt>(&p.event); it && it->id == kTimerInterrupt)
        return;
    pending_.push_back({Interrupt{kTimerInterrupt, Privilege::kMachine}, false, kNoSlot});
    obs_.on_timer_pend(*this);
  }

  void deliver(std::size_t idx) {
    const PendingEvent p = pending_[idx];
    pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(idx));
    std::uint32_t mepc = state_.pc;
    if (p.synchronous && event_cause(p.event) == kExcIllegalInstruction && bug(Bug::kB7))
      mepc = state_.pc + 1;
    TrapRecord rec = enter_trap(state_, p, mepc);
    trap_log_.push_back(rec);
    ++steps_;
    Fnv1a64 h;
    h.u32(rec.cause);
    h.u32(rec.mepc);
    h.byte(static_cast<std::uint8_t>(rec.priv_before));
    h.byte(rec.depth);
    commit(rec.pc, h.value());
    obs_.on_delivery(rec, *this);
  }

  void step_handler() {
    auto& f = state_.handlers.back();
    ++steps_;
    switch (f.step) {
      case 0: break;  // save cause: already captured in the frame at entry
      case 1: ++state_.csr(Csr::kMscratch); break;
      default: {
        const HandlerFrame done = f;
        state_.handlers.pop_back();
        state_.csr(Csr::kMepc) = done.saved_mepc;
        state_.csr(Csr::kMcause) = done.saved_mcause;
        state_.csr(Csr::kMstatus) = done.saved_mstatus;
        mret_semantics();
        state_.pc = done.saved_mepc + (done.synchronous ? 1 : 0);
        return;
      }
    }
    ++f.step;
  }

  void run_gap(std::size_t g) {
    const std::vector<std::size_t>* arrivals = nullptr;
    if (g < gaps_.size() && !gap_done_[g]) {
      gap_done_[g] = true;
      arrivals = &gaps_[g];
    }
    std::size_t next = 0;
    const std::size_t n_arrivals = arrivals ? arrivals->size() : 0;
    while (true) {
      bool acted = false;
      if (next < n_arrivals) {
        const std::size_t slot = (*arrivals)[next++];
        pending_.push_back({(*slots_)[slot], false, slot});
        acted = true;
      }
      check_timer();
      if (auto idx = select_pending(state_, pending_)) {
        deliver(*idx);
        obs_.on_micro(*this);
        continue;
      }
      if (!state_.handlers.empty()) {
        step_handler();
        obs_.on_micro(*this);
        continue;
      }
      if (acted) obs_.on_micro(*this);
      if (next < n_arrivals) continue;
      break;
    }
  }

  BugSet bugs_;
  Observer& obs_;
  const std::vector<EventSlot>* slots_ = nullptr;
  std::vector<Instruction> code_;
  std::vector<std::size_t> code_slot_;
  std::vector<std::vector<std::size_t>> gaps_;
  std::vector<bool> gap_done_;

  ArchState state_;
  std::vector<PendingEvent> pending_;
  std::vector<TrapRecord> trap_log_;
  std::vector<Commit> commits_;
  std::uint64_t retired_ = 0;
  std::uint64_t steps_ = 0;
  std::uint16_t fired_ = 0;
  bool last_taken_ = false;

  bool fwd_live_ = false, fwd_next_ = false;
  std::uint32_t fwd_value_ = 0, fwd_value_next_ = 0;
};

inline constexpr std::uint64_t kDefaultBudget = 4096;

// Retirement budget used by the fuzzer: enough for every instruction several
// times over, so short loops terminate naturally and long ones are cut.
inline std::uint64_t budget_for(const InputSequence& seq) { return 4 * seq.length() + 64; }

inline ExecOutcome run_golden(const InputSequence& seq, std::uint64_t budget = kDefaultBudget) {
  NullObserver obs;
  return Machine<NullObserver>(seq, BugSet::none(), obs).run(budget);
}

// Inserts a control-state hash after every retirement and micro-step.
struct CoverageObserver : NullObserver {
  CoverageMap* cov = nullptr;
  template <class M>
  void on_instruction(const InstrEffect&, const M& m) {
    cov->insert(hash_control_state(m.control_state()));
  }
  template <class M>
  void on_micro(const M& m) {
    cov->insert(hash_control_state(m.control_state()));
  }
};

struct DutResult {
  ExecOutcome outcome;
  CoverageMap coverage;  // hashes seen during this run only
};

inline DutResult run_dut(const InputSequence& seq, std::uint64_t budget, BugSet bugs) {
  DutResult r;
  CoverageObserver obs;
  obs.cov = &r.coverage;
  r.outcome = Machine<CoverageObserver>(seq, bugs, obs).run(budget);
  return r;
}

// run_dut folding into a caller-owned map; returns the per-run result too.
inline DutResult run_dut(const InputSequence& seq, std::uint64_t budget, BugSet bugs,
                         CoverageMap& cov) {
  DutResult r = run_dut(seq, budget, bugs);
  cov.merge(r.coverage);
  return r;
}

}  // namespace distillfuzz
