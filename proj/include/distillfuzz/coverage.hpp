#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "distillfuzz/hash.hpp"

namespace distillfuzz {

// Fixed-width snapshot of the DUT's control registers. The width is the
// "scale" of the design under test and never changes within a campaign.
inline constexpr std::size_t kControlWidth = 32;

namespace csv_index {
inline constexpr std::size_t kPriv = 0;
inline constexpr std::size_t kDepth = 1;
inline constexpr std::size_t kIntrPending = 2;  // 9 entries, I1..I9
inline constexpr std::size_t kExcPending = 11;  // 14 entries, E1..E14
inline constexpr std::size_t kMie = 25;
inline constexpr std::size_t kMpie = 26;
inline constexpr std::size_t kMpp = 27;
inline constexpr std::size_t kFs = 28;
inline constexpr std::size_t kBranchTaken = 29;
inline constexpr std::size_t kHandlerStep = 30;  // 31 is unused
}  // namespace csv_index

using ControlStateVector = std::array<std::uint8_t, kControlWidth>;

inline std::uint32_t hash_control_state(const ControlStateVector& v) {
  Fnv1a32 h;
  h.bytes(v);
  return h.value();
}

class SubsetViolation : public std::logic_error {
 public:
  SubsetViolation() : std::logic_error("coverage_delta: before is not a subset of after") {}
};

class CoverageMap {
 public:
  bool insert(std::uint32_t h) { return seen_.insert(h).second; }
  bool contains(std::uint32_t h) const { return seen_.count(h) != 0; }
  std::size_t count() const { return seen_.size(); }

  // Union; returns how many hashes were new.
  std::size_t merge(const CoverageMap& other) {
    std::size_t added = 0;
    for (auto h : other.seen_) added += seen_.insert(h).second ? 1 : 0;
    return added;
  }

  // How many of other's hashes are absent here, without modifying.
  std::size_t novel_in(const CoverageMap& other) const {
    std::size_t n = 0;
    for (auto h : other.seen_) n += seen_.count(h) ? 0 : 1;
    return n;
  }

  bool subset_of(const CoverageMap& other) const {
    if (seen_.size() > other.seen_.size()) return false;
    return std::all_of(seen_.begin(), seen_.end(), [&](auto h) { return other.contains(h); });
  }

  std::vector<std::uint32_t> sorted() const {
    std::vector<std::uint32_t> out(seen_.begin(), seen_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  void clear() { seen_.clear(); }

 private:
  std::unordered_set<std::uint32_t> seen_;
};

inline std::size_t coverage_delta(const CoverageMap& before, const CoverageMap& after) {
  if (!before.subset_of(after)) throw SubsetViolation();
  return after.count() - before.count();
}

}  // namespace distillfuzz
