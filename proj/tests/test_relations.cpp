#include <gtest/gtest.h>

#include "distillfuzz/asm_text.hpp"
#include "distillfuzz/events.hpp"
#include "distillfuzz/generate.hpp"
#include "distillfuzz/relations.hpp"

using namespace distillfuzz;

namespace {

InputSequence parse(std::string_view text) {
  auto r = parse_sequence(text, kUncapped);
  if (auto* e = std::get_if<ParseError>(&r)) throw std::runtime_error(e->message);
  return std::get<InputSequence>(std::move(r));
}

ExecutedInput ex(std::string_view text, std::uint64_t id = 0, std::size_t gain = 1) {
  return replay(id, parse(text), gain);
}

std::vector<std::size_t> slots_of(const InstructionGroup& g) {
  std::vector<std::size_t> out;
  for (const auto& m : g.members) out.push_back(m.slot);
  return out;
}

bool has_group(const std::vector<InstructionGroup>& gs, GroupKind k, std::vector<std::size_t> slots) {
  for (const auto& g : gs)
    if (g.kind == k && slots_of(g) == slots) return true;
  return false;
}

}  // namespace

TEST(DataFlow, ChainOnOneRegisterIsOneGroup) {
  const auto in = ex("add x1, x0, x0, 1\nadd x1, x1, x0, 2\nadd x1, x1, x0, 3\n");
  const auto gs = data_flow_relations(in);
  ASSERT_EQ(gs.size(), 1u);
  EXPECT_EQ(gs[0].span_len, 3u);
  EXPECT_EQ(slots_of(gs[0]), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(DataFlow, ReadsWithoutWriterDoNotLink) {
  EXPECT_TRUE(data_flow_relations(ex("add x2, x1, x0\nadd x3, x1, x0\n")).empty());
}

TEST(DataFlow, WindowBoundsTheChain) {
  std::string text = "add x1, x0, x0, 1\n";
  for (std::size_t i = 0; i < kDataFlowWindow; ++i) text += "nop\n";
  text += "add x2, x1, x0\n";
  EXPECT_TRUE(data_flow_relations(ex(text)).empty());
}

TEST(ControlFlow, JumpAndTarget) {
  const auto gs = control_flow_relations(ex("jal x1, 2\nnop\nadd x2, x0, x0, 1\n"));
  ASSERT_EQ(gs.size(), 1u);
  EXPECT_EQ(slots_of(gs[0]), (std::vector<std::size_t>{0, 2}));
  // In the body the jump lands on the next member.
  EXPECT_EQ(std::get<Instruction>(gs[0].body[0]).imm, 1);
}

TEST(Hardware, UserToMachineEventGroupsTheEvent) {
  const auto gs = hardware_relations(ex("mret\nintr I4 prio=U\nadd x1, x0, x0, 1\n"));
  ASSERT_TRUE(has_group(gs, GroupKind::kHardware, {0, 1}));
  for (const auto& g : gs)
    if (slots_of(g) == std::vector<std::size_t>{0, 1}) {
      EXPECT_EQ(g.span_len, 1u);  // the event is a member but not counted
      EXPECT_TRUE(std::holds_alternative<Interrupt>(g.body[1]));
    }
}

TEST(Hardware, MachineModeSingleEventIsNotAGroup) {
  const auto gs = hardware_relations(ex("nop\nintr I4 prio=M\nnop\n"));
  EXPECT_TRUE(gs.empty());
}

TEST(Hardware, MisalignedStore) {
  const auto gs = hardware_relations(ex("add x1, x0, x0, 2\nstore x1, 0(x1)\nnop\n"));
  EXPECT_TRUE(has_group(gs, GroupKind::kHardware, {1}));
}

TEST(Hardware, AlignedAccessIsNotAGroup) {
  EXPECT_TRUE(hardware_relations(ex("add x1, x0, x0, 4\nstore x1, 0(x1)\nload x2, 0(x1)\n")).empty());
}

TEST(Hardware, TimerArming) {
  const auto in = ex("csrrw x0, mtimecmp, x0\nnop\nnop\n");
  ASSERT_FALSE(in.timer_arming_slots.empty());
  EXPECT_TRUE(has_group(hardware_relations(in), GroupKind::kHardware, {0}));
}

TEST(Hardware, SpecialCsrTraffic) {
  const auto gs = hardware_relations(ex("csrrs x1, mepc, x0\ncsrrs x2, mscratch, x0\n"));
  EXPECT_TRUE(has_group(gs, GroupKind::kHardware, {0}));
  EXPECT_FALSE(has_group(gs, GroupKind::kHardware, {1}));
}

TEST(Extract, EmptyHistoryThrows) {
  EXPECT_THROW(extract({}), EmptyHistory);
}

TEST(Extract, OrderedByGainThenIdAndDeduplicated) {
  const std::string chain = "add x1, x0, x0, 1\nadd x2, x1, x0\n";
  const std::vector<ExecutedInput> h = {
      ex(chain, 5, 3),
      ex("jal x0, 2\nnop\nnop\n", 2, 9),
      ex(chain, 1, 3),
  };
  const auto gs = extract(h);
  ASSERT_EQ(gs.size(), 3u);
  EXPECT_EQ(gs[0].members[0].source, 2u);
  EXPECT_EQ(gs[1].members[0].source, 1u);  // tie on gain: lower id first
  EXPECT_EQ(gs[2].members[0].source, 5u);  // same slots, different source: kept
  for (std::size_t i = 1; i < gs.size(); ++i) EXPECT_GE(gs[i - 1].cov_score, gs[i].cov_score);
}

TEST(Extract, DeterministicAndWellFormed) {
  Rng rng(11);
  std::vector<ExecutedInput> h;
  for (std::uint64_t i = 0; i < 40; ++i) {
    const auto s = insert_events(random_sequence(rng, 4 + rng.below(30)), EventPlan{}, rng);
    h.push_back(replay(i, s, rng.below(50)));
  }
  const auto a = extract(h);
  const auto b = extract(h);
  ASSERT_EQ(a.size(), b.size());
  std::size_t checked = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].members, b[i].members);
    const auto& g = a[i];
    ASSERT_GE(g.span_len, 1u);
    if (g.kind != GroupKind::kHardware) EXPECT_GE(g.members.size(), 2u);
    for (const auto& m : g.members) EXPECT_EQ(m.source, g.members[0].source);
    // Every group body replays in isolation as a valid input.
    std::vector<EventSlot> body = g.body;
    if (!is_instruction(body.front())) body.insert(body.begin(), Instruction{Opcode::kNop});
    if (!is_instruction(body.back())) body.push_back(Instruction{Opcode::kNop});
    auto made = InputSequence::make(body, kUncapped);
    ASSERT_TRUE(std::holds_alternative<InputSequence>(made)) << describe(g);
    replay(0, std::get<InputSequence>(made), 0);
    ++checked;
  }
  EXPECT_GT(checked, 10u);
}
