#pragma once

// Planted DUT defects. Each id names one behavioral deviation from the
// reference semantics; the machine core consults the set at the exact point
// where the deviation applies.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace distillfuzz {

enum class Bug : std::uint8_t {
  kB1 = 1,  // software write to minstret still gets this cycle's increment
  kB2,      // FDIV/FSQRT ignore the static rm field and round to nearest-even
  kB3,      // reserved rm (5, 6) executes as nearest-even instead of trapping
  kB4,      // a not-taken BEQ marks the FP state dirty
  kB5,      // ADD carry computed as (a & b) >> 31, dropping propagation
  kB6,      // CSR access skips the machine-mode privilege check
  kB7,      // illegal-instruction trap records mepc = pc + 1
  kB8,      // SHR with a negative immediate decodes as NOP
  kB9,      // a write to x0 is forwarded to the next instruction's x0 reads
  kB10,     // MUL with rd == rs1 does not update the overflow flag
  kB11,     // SUB overflow uses the ADD overflow formula
  kB12,     // EBREAK retires without incrementing minstret
};
inline constexpr std::size_t kNumBugs = 12;

inline constexpr std::array<std::string_view, kNumBugs> kBugDescriptions = {
    "minstret increments on the cycle software writes it",
    "static rounding ignored for fdiv and fsqrt",
    "invalid rm field does not raise an exception",
    "fp dirty bit set by a not-taken compare",
    "wrong carry flag generation for add",
    "missing privilege check on csr access",
    "mepc off by one on illegal instruction",
    "shr with negative immediate decoded as nop",
    "wrong forwarding for register 0",
    "overflow flag not updated for mul accumulate",
    "wrong overflow flag for sub",
    "ebreak does not increment instruction count",
};

constexpr std::uint16_t bug_bit(Bug b) {
  return static_cast<std::uint16_t>(1u << (static_cast<unsigned>(b) - 1));
}

class BugSet {
 public:
  constexpr BugSet() = default;
  constexpr explicit BugSet(std::uint16_t mask) : mask_(mask & kAllMask) {}

  static constexpr BugSet none() { return BugSet(); }
  static constexpr BugSet all() { return BugSet(kAllMask); }
  static constexpr BugSet only(Bug b) { return BugSet(bug_bit(b)); }

  constexpr bool has(Bug b) const { return (mask_ & bug_bit(b)) != 0; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::uint16_t mask() const { return mask_; }
  constexpr BugSet& add(Bug b) {
    mask_ |= bug_bit(b);
    return *this;
  }

  std::vector<Bug> list() const {
    std::vector<Bug> out;
    for (unsigned i = 1; i <= kNumBugs; ++i)
      if (mask_ & (1u << (i - 1))) out.push_back(static_cast<Bug>(i));
    return out;
  }

  friend constexpr bool operator==(BugSet, BugSet) = default;

 private:
  static constexpr std::uint16_t kAllMask = (1u << kNumBugs) - 1;
  std::uint16_t mask_ = 0;
};

inline std::string bug_name(Bug b) { return "B" + std::to_string(static_cast<unsigned>(b)); }

inline std::optional<Bug> parse_bug(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'B' && s[0] != 'b')) return std::nullopt;
  unsigned v = 0;
  for (char c : s.substr(1)) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
    if (v > kNumBugs) return std::nullopt;
  }
  if (v == 0) return std::nullopt;
  return static_cast<Bug>(v);
}

// "B1,B3,B7", "all", "none", or "" (none). Also accepts a range "B1..B12".
inline std::optional<BugSet> parse_bug_set(std::string_view s) {
  if (s.empty() || s == "none") return BugSet::none();
  if (s == "all") return BugSet::all();
  BugSet out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    auto item = s.substr(0, comma);
    s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      auto lo = parse_bug(item.substr(0, dots));
      auto hi = parse_bug(item.substr(dots + 2));
      if (!lo || !hi || *lo > *hi) return std::nullopt;
      for (auto i = static_cast<unsigned>(*lo); i <= static_cast<unsigned>(*hi); ++i)
        out.add(static_cast<Bug>(i));
      continue;
    }
    auto b = parse_bug(item);
    if (!b) return std::nullopt;
    out.add(*b);
  }
  return out;
}

inline std::string to_string(BugSet set) {
  std::string out;
  for (auto b : set.list()) {
    if (!out.empty()) out += ',';
    out += bug_name(b);
  }
  return out;
}

}  // namespace distillfuzz
