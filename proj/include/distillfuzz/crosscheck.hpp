#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distillfuzz/arch_state.hpp"
#include "distillfuzz/hash.hpp"
#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

struct FieldDiff {
  std::string name;
  std::string golden;
  std::string dut;
  friend bool operator==(const FieldDiff&, const FieldDiff&) = default;
};

struct MismatchReport {
  InputSequence input;
  std::vector<FieldDiff> fields_diverged;  // sorted by name
  std::uint32_t first_divergence_pc = 0;
  std::uint64_t dedup_key = 0;

  std::vector<std::string> field_names() const {
    std::vector<std::string> out;
    for (const auto& f : fields_diverged) out.push_back(f.name);
    return out;
  }
};

namespace xcheck_detail {

inline std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  do {
    s.insert(s.begin(), digits[v & 15]);
    v >>= 4;
  } while (v);
  return "0x" + s;
}

inline std::string causes(const std::vector<TrapRecord>& log) {
  std::string s = "[";
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (i) s += ",";
    s += hex(log[i].cause);
  }
  return s + "]";
}

inline std::uint32_t first_divergence(const ExecOutcome& g, const ExecOutcome& d) {
  const std::size_t n = std::min(g.commits.size(), d.commits.size());
  for (std::size_t i = 0; i < n; ++i)
    if (g.commits[i] != d.commits[i]) return g.commits[i].pc;
  if (g.commits.size() > n) return g.commits[n].pc;
  if (d.commits.size() > n) return d.commits[n].pc;
  return g.final.pc;
}

}  // namespace xcheck_detail

inline std::uint64_t mismatch_key(const std::vector<std::string>& sorted_names, std::uint32_t pc) {
  Fnv1a64 h;
  for (const auto& n : sorted_names) {
    h.str(n);
    h.byte(0);
  }
  h.u32(pc);
  return h.value();
}

inline std::optional<MismatchReport> cross_check(const ExecOutcome& golden, const ExecOutcome& dut,
                                                 const InputSequence& input) {
  using xcheck_detail::hex;
  std::vector<FieldDiff> diffs;
  auto cmp = [&](std::string name, std::uint64_t g, std::uint64_t d) {
    if (g != d) diffs.push_back({std::move(name), hex(g), hex(d)});
  };
  const ArchState& g = golden.final;
  const ArchState& d = dut.final;
  for (std::size_t r = 1; r < kNumRegs; ++r) cmp("x" + std::to_string(r), g.regs[r], d.regs[r]);
  for (std::size_t r = 0; r < kNumFRegs; ++r) cmp("f" + std::to_string(r), g.fregs[r], d.fregs[r]);
  cmp("pc", g.pc, d.pc);
  cmp("priv", static_cast<unsigned>(g.priv), static_cast<unsigned>(d.priv));
  for (std::size_t c = 0; c < kNumCsrs; ++c)
    cmp(std::string(kCsrNames[c]), g.csrs[c], d.csrs[c]);
  cmp("carry", g.flags.carry, d.flags.carry);
  cmp("overflow", g.flags.overflow, d.flags.overflow);
  cmp("mem", g.mem_digest(), d.mem_digest());
  cmp("halted", g.halted, d.halted);
  {
    const auto gc = xcheck_detail::causes(golden.trap_log);
    const auto dc = xcheck_detail::causes(dut.trap_log);
    if (gc != dc) diffs.push_back({"trap_causes", gc, dc});
  }
  if (diffs.empty()) return std::nullopt;

  std::sort(diffs.begin(), diffs.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  MismatchReport rep{input, std::move(diffs), xcheck_detail::first_divergence(golden, dut), 0};
  rep.dedup_key = mismatch_key(rep.field_names(), rep.first_divergence_pc);
  return rep;
}

}  // namespace distillfuzz
