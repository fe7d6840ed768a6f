#pragma once

// One hand-written input per planted bug that triggers it deterministically,
// plus a near-miss input that exercises the same instruction without
// tripping the defect.

#include <array>
#include <string_view>

#include "distillfuzz/bugs.hpp"

namespace distillfuzz {

struct BugWitness {
  Bug bug;
  std::string_view trigger;   // diverges from the reference with only this bug
  std::string_view near_miss; // same opcode family, no divergence
};

inline constexpr std::array<BugWitness, kNumBugs> kBugWitnesses = {{
    {Bug::kB1, "add x1, x0, x0, 5\ncsrrw x0, minstret, x1\nnop\n",
     "add x1, x0, x0, 5\ncsrrs x2, minstret, x0\nnop\n"},
    {Bug::kB2, "fdiv f1, f0, f1, rm=1\nebreak\n", "fdiv f1, f0, f1\nebreak\n"},
    {Bug::kB3, "fadd f1, f0, f1, rm=5\nebreak\n", "fadd f1, f0, f1, rm=2\nebreak\n"},
    {Bug::kB4, "add x1, x0, x0, 1\nbeq x1, x0, 1\nebreak\n",
     "beq x0, x0, 1\nebreak\n"},
    {Bug::kB5, "add x1, x0, x0, -1\nadd x2, x1, x0, 1\nebreak\n",
     "add x1, x0, x0, 7\nadd x2, x1, x0, 1\nebreak\n"},
    {Bug::kB6, "mret\ncsrrs x1, mstatus, x0\nebreak\n", "csrrs x1, mstatus, x0\nebreak\n"},
    {Bug::kB7, "fadd f1, f0, f1, rm=6\nadd x1, x0, x0, 1\nebreak\n",
     "load x2, 2(x0)\nadd x1, x0, x0, 1\nebreak\n"},
    {Bug::kB8, "add x1, x0, x0, -1\nshr x2, x1, x0, -1\nebreak\n",
     "add x1, x0, x0, -1\nshr x2, x1, x0, 3\nebreak\n"},
    {Bug::kB9, "add x0, x0, x0, 5\nadd x1, x0, x0\nebreak\n",
     "add x0, x0, x0, 5\nnop\nadd x1, x0, x0\nebreak\n"},
    {Bug::kB10, "add x1, x0, x0, 32767\nshl x1, x1, x0, 16\nmul x1, x1, x0, 2\nebreak\n",
     "add x1, x0, x0, 32767\nshl x1, x1, x0, 16\nmul x2, x1, x0, 2\nebreak\n"},
    {Bug::kB11, "sub x2, x0, x0, 1\nebreak\n", "sub x2, x0, x0, -1\nebreak\n"},
    {Bug::kB12, "ebreak\n", "nop\n"},
}};

}  // namespace distillfuzz
