#pragma once

// Relationship extraction over executed inputs. Software relations are
// register def-use chains and (jump, target) pairs; hardware relations tie
// instructions to privilege-changing or nested events, timer arming,
// misaligned accesses and special CSR traffic. Each relation becomes an
// InstructionGroup carrying the slots needed to replay it.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "distillfuzz/machine.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

inline constexpr std::size_t kDataFlowWindow = 8;

enum class GroupKind : std::uint8_t { kDataFlow, kControlFlow, kHardware };

constexpr const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::kDataFlow: return "DataFlow";
    case GroupKind::kControlFlow: return "ControlFlow";
    case GroupKind::kHardware: return "Hardware";
  }
  return "?";
}

struct GroupMember {
  std::uint64_t source = 0;
  std::size_t slot = 0;
  friend bool operator==(const GroupMember&, const GroupMember&) = default;
  friend auto operator<=>(const GroupMember&, const GroupMember&) = default;
};

struct InstructionGroup {
  std::vector<GroupMember> members;  // ascending slot order
  GroupKind kind = GroupKind::kDataFlow;
  std::size_t span_len = 0;  // instruction members; event members do not count
  double cov_score = 0;
  std::vector<EventSlot> body;  // member slots in order, jumps re-targeted
};

struct ExecutedInput {
  std::uint64_t id = 0;
  InputSequence seq;
  std::size_t cov_gain = 0;
  std::vector<InstrEffect> effects;  // first execution of each instruction slot
  std::vector<TrapRecord> deliveries;
  std::vector<std::size_t> delivery_prev_slot;  // instruction slot before each delivery, or npos
  std::vector<std::size_t> timer_arming_slots;  // CSR writes that made the timer pend
};

class EmptyHistory : public std::invalid_argument {
 public:
  EmptyHistory() : std::invalid_argument("extract: history is empty") {}
};

// Records replay-derived effects while a Machine runs.
struct EffectRecorder : NullObserver {
  ExecutedInput* out = nullptr;
  std::set<std::size_t> seen;
  std::size_t last_slot = kNoSlot;
  std::size_t last_timer_write = kNoSlot;

  template <class M>
  void on_instruction(const InstrEffect& e, const M&) {
    last_slot = e.slot;
    if ((e.csr == static_cast<int>(Csr::kMtime) || e.csr == static_cast<int>(Csr::kMtimecmp)) &&
        e.csr_write)
      last_timer_write = e.slot;
    if (seen.insert(e.slot).second) out->effects.push_back(e);
  }
  template <class M>
  void on_delivery(const TrapRecord& rec, const M&) {
    out->deliveries.push_back(rec);
    out->delivery_prev_slot.push_back(last_slot);
  }
  template <class M>
  void on_timer_pend(const M&) {
    if (last_timer_write != kNoSlot) {
      out->timer_arming_slots.push_back(last_timer_write);
      last_timer_write = kNoSlot;
    }
  }
};

// Replays seq on the reference model to obtain its effects.
inline ExecutedInput replay(std::uint64_t id, const InputSequence& seq, std::size_t cov_gain) {
  ExecutedInput ex{id, seq, cov_gain, {}, {}, {}, {}};
  EffectRecorder rec;
  rec.out = &ex;
  Machine<EffectRecorder>(seq, BugSet::none(), rec).run(budget_for(seq));
  return ex;
}

namespace rel_detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

inline InstructionGroup make_group(const ExecutedInput& in, GroupKind kind,
                                   std::vector<std::size_t> slots) {
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
  InstructionGroup g;
  g.kind = kind;
  g.cov_score = static_cast<double>(in.cov_gain);
  const auto& all = in.seq.slots();
  for (auto s : slots) {
    g.members.push_back({in.id, s});
    g.body.push_back(all[s]);
    if (is_instruction(all[s])) ++g.span_len;
  }
  return g;
}

// In the group body a control-flow jump lands on the next member.
inline void retarget_jumps(InstructionGroup& g) {
  for (std::size_t i = 0; i < g.body.size(); ++i) {
    auto* in = std::get_if<Instruction>(&g.body[i]);
    if (!in || !is_jump(in->op)) continue;
    in->imm = 1;
  }
}

}  // namespace rel_detail

inline std::vector<InstructionGroup> data_flow_relations(const ExecutedInput& in) {
  // Effects are in execution order; chains are built in slot order so that
  // loops do not create backward links.
  std::vector<const InstrEffect*> by_slot;
  for (const auto& e : in.effects) by_slot.push_back(&e);
  std::sort(by_slot.begin(), by_slot.end(),
            [](const InstrEffect* a, const InstrEffect* b) { return a->slot < b->slot; });

  std::vector<InstructionGroup> out;
  for (unsigned reg = 1; reg < 24; ++reg) {
    const std::uint32_t bit = 1u << reg;
    rel_detail::UnionFind uf(by_slot.size());
    std::vector<bool> linked(by_slot.size(), false);
    std::size_t last_writer = kNoSlot;
    for (std::size_t i = 0; i < by_slot.size(); ++i) {
      const auto* e = by_slot[i];
      if ((e->reads & bit) && last_writer != kNoSlot &&
          e->slot - by_slot[last_writer]->slot <= kDataFlowWindow) {
        uf.unite(i, last_writer);
        linked[i] = linked[last_writer] = true;
      }
      if (e->writes & bit) last_writer = i;
    }
    std::map<std::size_t, std::vector<std::size_t>> comps;
    for (std::size_t i = 0; i < by_slot.size(); ++i)
      if (linked[i]) comps[uf.find(i)].push_back(by_slot[i]->slot);
    for (auto& [root, slots] : comps)
      if (slots.size() >= 2)
        out.push_back(rel_detail::make_group(in, GroupKind::kDataFlow, std::move(slots)));
  }
  return out;
}

inline std::vector<InstructionGroup> control_flow_relations(const ExecutedInput& in) {
  std::vector<std::size_t> instr_slot;
  for (std::size_t i = 0; i < in.seq.size(); ++i)
    if (is_instruction(in.seq.slots()[i])) instr_slot.push_back(i);
  std::vector<InstructionGroup> out;
  for (const auto& e : in.effects) {
    if (!e.taken || e.next_pc >= instr_slot.size() || e.next_pc == e.index) continue;
    auto g = rel_detail::make_group(in, GroupKind::kControlFlow, {e.slot, instr_slot[e.next_pc]});
    rel_detail::retarget_jumps(g);
    out.push_back(std::move(g));
  }
  return out;
}

inline std::vector<InstructionGroup> hardware_relations(const ExecutedInput& in) {
  std::vector<InstructionGroup> out;
  auto single = [&](std::size_t slot) {
    out.push_back(rel_detail::make_group(in, GroupKind::kHardware, {slot}));
  };
  // (a) events that lift the privilege level or nest inside a handler.
  for (std::size_t i = 0; i < in.deliveries.size(); ++i) {
    const auto& d = in.deliveries[i];
    if (d.slot == kNoSlot) continue;
    if (d.priv_before == Privilege::kMachine && d.depth < 2) continue;
    const std::size_t prev = in.delivery_prev_slot[i];
    if (prev == kNoSlot) continue;
    out.push_back(rel_detail::make_group(in, GroupKind::kHardware, {prev, d.slot}));
  }
  // (b) timer arming.
  for (auto s : in.timer_arming_slots) single(s);
  for (const auto& e : in.effects) {
    // (c) misaligned memory access that trapped.
    if (e.trap_cause == exception_cause(kExcMisalignedLoad) ||
        e.trap_cause == exception_cause(kExcMisalignedStore))
      single(e.slot);
    // (d) special CSR traffic.
    if (e.csr == static_cast<int>(Csr::kMcause) || e.csr == static_cast<int>(Csr::kMepc) ||
        e.csr == static_cast<int>(Csr::kMstatus))
      single(e.slot);
  }
  return out;
}

// Groups from every input, highest coverage gain first (ties by input id),
// deduplicated by member set.
inline std::vector<InstructionGroup> extract(const std::vector<ExecutedInput>& history) {
  if (history.empty()) throw EmptyHistory();
  std::vector<const ExecutedInput*> order;
  for (const auto& h : history) order.push_back(&h);
  std::stable_sort(order.begin(), order.end(), [](const ExecutedInput* a, const ExecutedInput* b) {
    if (a->cov_gain != b->cov_gain) return a->cov_gain > b->cov_gain;
    return a->id < b->id;
  });

  std::vector<InstructionGroup> out;
  std::set<std::vector<GroupMember>> seen;
  auto take = [&](std::vector<InstructionGroup> gs) {
    for (auto& g : gs)
      if (g.span_len >= 1 && seen.insert(g.members).second) out.push_back(std::move(g));
  };
  for (const auto* in : order) {
    take(data_flow_relations(*in));
    take(control_flow_relations(*in));
    take(hardware_relations(*in));
  }
  return out;
}

inline std::string describe(const InstructionGroup& g) {
  std::string s = std::string(to_string(g.kind)) + " span=" + std::to_string(g.span_len) +
                  " source=" + std::to_string(g.members.empty() ? 0 : g.members[0].source) +
                  " slots=";
  for (std::size_t i = 0; i < g.members.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(g.members[i].slot);
  }
  return s;
}

}  // namespace distillfuzz
