#pragma once

// Corpus text format: one slot per line, '#' starts a comment.
//
//   add x3, x1, x2          add x3, x1, x2, -5      (operand b = x2 + imm)
//   load x3, 8(x1)          store x2, 8(x1)
//   beq x1, x2, -3          jal x1, 4               (offsets in instructions)
//   fdiv f1, f2, f3, rm=1   fsqrt f1, f2
//   csrrw x3, minstret, x1  csrrs x0, csr12, x0
//   ecall  ebreak  mret  nop
//   intr I3 prio=M          exc E2

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "distillfuzz/sequence.hpp"

namespace distillfuzz {

namespace text_detail {

inline std::string reg(char prefix, std::uint8_t r) { return prefix + std::to_string(r); }

inline std::string csr_name(std::int16_t imm) {
  if (imm >= 0 && static_cast<std::size_t>(imm) < kNumCsrs) return std::string(kCsrNames[imm]);
  return "csr" + std::to_string(imm);
}

}  // namespace text_detail

inline std::string render(const Instruction& in) {
  using text_detail::reg;
  std::string s(mnemonic(in.op));
  const auto imm = std::to_string(in.imm);
  switch (in.op) {
    case Opcode::kLoad:
      return s + " " + reg('x', in.rd) + ", " + imm + "(" + reg('x', in.rs1) + ")";
    case Opcode::kStore:
      return s + " " + reg('x', in.rs2) + ", " + imm + "(" + reg('x', in.rs1) + ")";
    case Opcode::kBeq: return s + " " + reg('x', in.rs1) + ", " + reg('x', in.rs2) + ", " + imm;
    case Opcode::kJal: return s + " " + reg('x', in.rd) + ", " + imm;
    case Opcode::kFadd:
    case Opcode::kFdiv:
      s += " " + reg('f', in.rd) + ", " + reg('f', in.rs1) + ", " + reg('f', in.rs2);
      break;
    case Opcode::kFsqrt: s += " " + reg('f', in.rd) + ", " + reg('f', in.rs1); break;
    case Opcode::kCsrrw:
    case Opcode::kCsrrs:
      return s + " " + reg('x', in.rd) + ", " + text_detail::csr_name(in.imm) + ", " +
             reg('x', in.rs1);
    case Opcode::kEcall:
    case Opcode::kEbreak:
    case Opcode::kMret:
    case Opcode::kNop: return s;
    default:
      s += " " + reg('x', in.rd) + ", " + reg('x', in.rs1) + ", " + reg('x', in.rs2);
      if (in.imm != 0) s += ", " + imm;
      return s;
  }
  if (in.rm != 0) s += ", rm=" + std::to_string(in.rm);
  return s;
}

inline std::string render(const EventSlot& slot) {
  if (const auto* in = std::get_if<Instruction>(&slot)) return render(*in);
  if (const auto* it = std::get_if<Interrupt>(&slot))
    return "intr I" + std::to_string(it->id) + " prio=" + privilege_letter(it->priority);
  return "exc E" + std::to_string(std::get<Exception>(slot).id);
}

inline std::string render(const InputSequence& seq) {
  std::string out;
  for (const auto& s : seq.slots()) {
    out += render(s);
    out += '\n';
  }
  return out;
}

struct ParseError {
  std::size_t line;  // 1-based
  std::string message;
};

namespace text_detail {

class LineParser {
 public:
  explicit LineParser(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string_view word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return s_.substr(start, pos_ - start);
  }
  std::optional<long> integer() {
    skip_ws();
    long v = 0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) return std::nullopt;
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline std::optional<std::uint8_t> parse_reg(std::string_view w, char prefix, unsigned limit) {
  if (w.size() < 2 || w[0] != prefix) return std::nullopt;
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size() || v >= limit) return std::nullopt;
  return static_cast<std::uint8_t>(v);
}

inline std::optional<std::int16_t> parse_csr(std::string_view w) {
  if (auto c = csr_from_name(w)) return static_cast<std::int16_t>(*c);
  if (w.size() > 3 && w.substr(0, 3) == "csr") {
    int v = 0;
    auto [ptr, ec] = std::from_chars(w.data() + 3, w.data() + w.size(), v);
    if (ec == std::errc() && ptr == w.data() + w.size() && v >= 0 && v <= kMaxCsrNumber)
      return static_cast<std::int16_t>(v);
  }
  return std::nullopt;
}

inline std::variant<EventSlot, std::string> parse_line(std::string_view line) {
  LineParser p(line);
  const auto head = p.word();
  auto bad = [&](const std::string& why) -> std::variant<EventSlot, std::string> {
    return std::string(head) + ": " + why;
  };

  if (head == "intr") {
    auto id = p.word();
    if (id.size() < 2 || id[0] != 'I') return bad("expected interrupt id I1..I9");
    int v = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), v);
    if (ec != std::errc() || ptr != id.data() + id.size()) return bad("bad interrupt id");
    if (p.word() != "prio" || !p.eat('=')) return bad("expected prio=U|S|M");
    const auto pr = p.word();
    Privilege prio;
    if (pr == "U") prio = Privilege::kUser;
    else if (pr == "S") prio = Privilege::kSupervisor;
    else if (pr == "M") prio = Privilege::kMachine;
    else return bad("expected prio=U|S|M");
    if (!p.done()) return bad("trailing text");
    return EventSlot{Interrupt{static_cast<std::uint8_t>(v), prio}};
  }
  if (head == "exc") {
    auto id = p.word();
    if (id.size() < 2 || id[0] != 'E') return bad("expected exception id E1..E14");
    int v = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), v);
    if (ec != std::errc() || ptr != id.data() + id.size()) return bad("bad exception id");
    if (!p.done()) return bad("trailing text");
    return EventSlot{Exception{static_cast<std::uint8_t>(v)}};
  }

  const auto op = opcode_from_mnemonic(head);
  if (!op) return bad("unknown mnemonic");
  Instruction in;
  in.op = *op;
  auto xreg = [&](std::uint8_t& dst) {
    auto r = parse_reg(p.word(), 'x', kNumRegs);
    if (r) dst = *r;
    return r.has_value();
  };
  auto freg = [&](std::uint8_t& dst) {
    auto r = parse_reg(p.word(), 'f', kNumFRegs);
    if (r) dst = *r;
    return r.has_value();
  };
  auto imm16 = [&](std::int16_t& dst) {
    auto v = p.integer();
    if (!v || *v < -32768 || *v > 32767) return false;
    dst = static_cast<std::int16_t>(*v);
    return true;
  };

  switch (in.op) {
    case Opcode::kLoad:
    case Opcode::kStore: {
      std::uint8_t r = 0;
      if (!xreg(r) || !p.eat(',') || !imm16(in.imm) || !p.eat('(') || !xreg(in.rs1) ||
          !p.eat(')'))
        return bad("expected xR, imm(xB)");
      (in.op == Opcode::kLoad ? in.rd : in.rs2) = r;
      break;
    }
    case Opcode::kBeq:
      if (!xreg(in.rs1) || !p.eat(',') || !xreg(in.rs2) || !p.eat(',') || !imm16(in.imm))
        return bad("expected xA, xB, offset");
      break;
    case Opcode::kJal:
      if (!xreg(in.rd) || !p.eat(',') || !imm16(in.imm)) return bad("expected xD, offset");
      break;
    case Opcode::kFadd:
    case Opcode::kFdiv:
    case Opcode::kFsqrt: {
      if (!freg(in.rd) || !p.eat(',') || !freg(in.rs1)) return bad("expected fD, fA[, fB]");
      if (in.op != Opcode::kFsqrt && (!p.eat(',') || !freg(in.rs2)))
        return bad("expected fD, fA, fB");
      if (p.eat(',')) {
        if (p.word() != "rm" || !p.eat('=')) return bad("expected rm=N");
        auto v = p.integer();
        if (!v || *v < 0 || *v > 7) return bad("rm must be 0..7");
        in.rm = static_cast<std::uint8_t>(*v);
      }
      break;
    }
    case Opcode::kCsrrw:
    case Opcode::kCsrrs: {
      if (!xreg(in.rd) || !p.eat(',')) return bad("expected xD, csr, xS");
      auto c = parse_csr(p.word());
      if (!c) return bad("unknown csr");
      in.imm = *c;
      if (!p.eat(',') || !xreg(in.rs1)) return bad("expected xD, csr, xS");
      break;
    }
    case Opcode::kEcall:
    case Opcode::kEbreak:
    case Opcode::kMret:
    case Opcode::kNop: break;
    default:
      if (!xreg(in.rd) || !p.eat(',') || !xreg(in.rs1) || !p.eat(',') || !xreg(in.rs2))
        return bad("expected xD, xA, xB[, imm]");
      if (p.eat(',') && !imm16(in.imm)) return bad("bad immediate");
      break;
  }
  if (!p.done()) return bad("trailing text");
  return EventSlot{in};
}

}  // namespace text_detail

inline std::variant<InputSequence, ParseError> parse_sequence(std::string_view text,
                                                              const EventCaps& caps = {}) {
  std::vector<EventSlot> slots;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    bool blank = true;
    for (char c : line) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (blank) {
      if (end == text.size()) break;
      continue;
    }
    auto parsed = text_detail::parse_line(line);
    if (auto* err = std::get_if<std::string>(&parsed)) return ParseError{line_no, *err};
    slots.push_back(std::get<EventSlot>(parsed));
    if (end == text.size()) break;
  }
  auto made = InputSequence::make(std::move(slots), caps);
  if (auto* bad = std::get_if<SeqCheckFailure>(&made))
    return ParseError{0, std::string("invalid sequence: ") + to_string(bad->violation) +
                             " at slot " + std::to_string(bad->slot)};
  return std::get<InputSequence>(std::move(made));
}

}  // namespace distillfuzz
