#include <gtest/gtest.h>

#include "distillfuzz/asm_text.hpp"
#include "distillfuzz/codec.hpp"
#include "distillfuzz/events.hpp"
#include "distillfuzz/generate.hpp"

using namespace distillfuzz;

namespace {

InputSequence random_with_events(Rng& rng, std::size_t n) {
  EventPlan plan;
  return insert_events(random_sequence(rng, n), plan, rng);
}

Instruction ins(Opcode op, std::uint8_t rd = 0, std::uint8_t rs1 = 0, std::uint8_t rs2 = 0,
                std::int16_t imm = 0, std::uint8_t rm = 0) {
  return Instruction{op, rd, rs1, rs2, imm, rm};
}

}  // namespace

TEST(Sequence, EmptyRejectedAtConstruction) {
  EXPECT_THROW(InputSequence(std::vector<EventSlot>{}), SequenceError);
  auto made = InputSequence::make({Interrupt{1, Privilege::kUser}});
  ASSERT_TRUE(std::holds_alternative<SeqCheckFailure>(made));
  EXPECT_EQ(std::get<SeqCheckFailure>(made).violation, SeqViolation::kEmpty);
}

TEST(Sequence, LengthCountsInstructionsOnly) {
  InputSequence a({ins(Opcode::kNop), ins(Opcode::kNop)});
  InputSequence b({ins(Opcode::kNop), Interrupt{3, Privilege::kMachine}, ins(Opcode::kNop)});
  EXPECT_EQ(a.length(), 2u);
  EXPECT_EQ(b.length(), 2u);
  EXPECT_EQ(b.size(), 3u);
}

TEST(Sequence, RejectsBadIdsAndPrivileges) {
  auto bad_id = InputSequence::make({ins(Opcode::kNop), Interrupt{10, Privilege::kUser}});
  EXPECT_EQ(std::get<SeqCheckFailure>(bad_id).violation, SeqViolation::kEventId);
  auto bad_exc = InputSequence::make({ins(Opcode::kNop), Exception{15}});
  EXPECT_EQ(std::get<SeqCheckFailure>(bad_exc).violation, SeqViolation::kEventId);
  auto bad_prio = InputSequence::make({ins(Opcode::kNop), Interrupt{1, static_cast<Privilege>(3)}});
  EXPECT_EQ(std::get<SeqCheckFailure>(bad_prio).violation, SeqViolation::kPrivilege);
}

TEST(Instruction, CheckRejectsNonCanonicalAndRanges) {
  EXPECT_FALSE(check(ins(Opcode::kAdd, 1, 2, 3, -5)));
  EXPECT_EQ(check(ins(Opcode::kAdd, 16)), InstrViolation::kRegisterRange);
  EXPECT_EQ(check(ins(Opcode::kFadd, 8)), InstrViolation::kRegisterRange);
  EXPECT_EQ(check(ins(Opcode::kNop, 1)), InstrViolation::kNonCanonical);
  EXPECT_EQ(check(ins(Opcode::kAdd, 1, 1, 1, 0, 3)), InstrViolation::kNonCanonical);
  EXPECT_EQ(check(ins(Opcode::kFadd, 1, 1, 1, 0, 8)), InstrViolation::kRoundingModeRange);
  EXPECT_EQ(check(ins(Opcode::kCsrrw, 1, 1, 0, 4096)), InstrViolation::kCsrNumberRange);
  EXPECT_EQ(check(ins(static_cast<Opcode>(21))), InstrViolation::kOpcodeRange);
  // Reserved rounding modes encode fine; they trap only at execution.
  EXPECT_FALSE(check(ins(Opcode::kFadd, 1, 2, 3, 0, 5)));
}

TEST(Codec, RoundTripRandom) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_with_events(rng, 1 + rng.below(40));
    auto back = decode(encode(s));
    ASSERT_TRUE(std::holds_alternative<InputSequence>(back)) << i;
    EXPECT_EQ(std::get<InputSequence>(back), s);
  }
}

TEST(Codec, EmptyInputIsTruncated) {
  auto r = decode({});
  ASSERT_TRUE(std::holds_alternative<DecodeError>(r));
  EXPECT_EQ(std::get<DecodeError>(r).kind, DecodeErrorKind::kTruncated);
}

TEST(Codec, BadMagic) {
  auto bytes = encode(InputSequence({ins(Opcode::kNop)}));
  bytes[0] = 'X';
  EXPECT_EQ(std::get<DecodeError>(decode(bytes)).kind, DecodeErrorKind::kBadMagic);
  bytes = encode(InputSequence({ins(Opcode::kNop)}));
  bytes[4] = 2;  // version
  EXPECT_EQ(std::get<DecodeError>(decode(bytes)).kind, DecodeErrorKind::kBadMagic);
}

TEST(Codec, FourInterruptsViolateDefaultCap) {
  std::vector<EventSlot> slots{ins(Opcode::kNop)};
  for (int i = 0; i < 4; ++i) slots.emplace_back(Interrupt{1, Privilege::kUser});
  const InputSequence s(slots, kUncapped);
  auto r = decode(encode(s));
  ASSERT_TRUE(std::holds_alternative<DecodeError>(r));
  EXPECT_EQ(std::get<DecodeError>(r).kind, DecodeErrorKind::kInvariantViolation);
  EXPECT_EQ(std::get<DecodeError>(r).which, SeqViolation::kEventCap);
  EXPECT_TRUE(std::holds_alternative<InputSequence>(decode(encode(s), kUncapped)));
}

TEST(Codec, TruncationAndTrailingBytes) {
  const auto bytes = encode(InputSequence({ins(Opcode::kAdd, 1, 2, 3, 4), Exception{2}}));
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + cut);
    auto r = decode(part);
    ASSERT_TRUE(std::holds_alternative<DecodeError>(r)) << cut;
  }
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_EQ(std::get<DecodeError>(decode(extra)).kind, DecodeErrorKind::kTrailingBytes);
}

TEST(Codec, ArbitraryBytesNeverThrow) {
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    std::vector<std::uint8_t> bytes(rng.below(48));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
    if (rng.chance(0.7) && bytes.size() >= 5) {
      bytes[0] = 'M';
      bytes[1] = 'R';
      bytes[2] = 'V';
      bytes[3] = 'S';
      bytes[4] = 1;
    }
    EXPECT_NO_THROW((void)decode(bytes));
  }
}

TEST(Codec, HashIsStableAndDiscriminates) {
  const InputSequence a({ins(Opcode::kAdd, 1, 2, 3)});
  const InputSequence b({ins(Opcode::kAdd, 1, 2, 4)});
  EXPECT_EQ(sequence_hash(a), sequence_hash(InputSequence({ins(Opcode::kAdd, 1, 2, 3)})));
  EXPECT_NE(sequence_hash(a), sequence_hash(b));
}

TEST(Text, RenderExamples) {
  EXPECT_EQ(render(ins(Opcode::kAdd, 3, 1, 2)), "add x3, x1, x2");
  EXPECT_EQ(render(ins(Opcode::kAdd, 3, 1, 2, -5)), "add x3, x1, x2, -5");
  EXPECT_EQ(render(ins(Opcode::kLoad, 3, 1, 0, 8)), "load x3, 8(x1)");
  EXPECT_EQ(render(ins(Opcode::kStore, 0, 1, 2, 8)), "store x2, 8(x1)");
  EXPECT_EQ(render(ins(Opcode::kFdiv, 1, 2, 3, 0, 1)), "fdiv f1, f2, f3, rm=1");
  EXPECT_EQ(render(ins(Opcode::kCsrrw, 3, 1, 0, 4)), "csrrw x3, minstret, x1");
  EXPECT_EQ(render(ins(Opcode::kCsrrs, 0, 0, 0, 12)), "csrrs x0, csr12, x0");
  EXPECT_EQ(render(EventSlot{Interrupt{3, Privilege::kMachine}}), "intr I3 prio=M");
  EXPECT_EQ(render(EventSlot{Exception{2}}), "exc E2");
}

TEST(Text, RoundTripRandom) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_with_events(rng, 1 + rng.below(30));
    auto back = parse_sequence(render(s));
    ASSERT_TRUE(std::holds_alternative<InputSequence>(back))
        << std::get<ParseError>(back).message;
    EXPECT_EQ(std::get<InputSequence>(back), s);
  }
}

TEST(Text, CommentsAndBlankLines) {
  auto r = parse_sequence("# header\n\n  nop   # trailing\nintr I2 prio=S\nebreak\n");
  ASSERT_TRUE(std::holds_alternative<InputSequence>(r));
  EXPECT_EQ(std::get<InputSequence>(r).size(), 3u);
}

TEST(Text, ParseErrorsCarryLineNumbers) {
  auto r = parse_sequence("nop\nadd x1, x2\n");
  ASSERT_TRUE(std::holds_alternative<ParseError>(r));
  EXPECT_EQ(std::get<ParseError>(r).line, 2u);
  EXPECT_TRUE(std::holds_alternative<ParseError>(parse_sequence("add x16, x1, x2")));
  EXPECT_TRUE(std::holds_alternative<ParseError>(parse_sequence("intr I3 prio=X")));
  EXPECT_TRUE(std::holds_alternative<ParseError>(parse_sequence("fadd f1, f2, f3, rm=9")));
  EXPECT_TRUE(std::holds_alternative<ParseError>(parse_sequence("# only a comment\n")));
}
