#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "osforma/error.hpp"

namespace osforma {

enum class Opcode {
    nop,
    set,      // SET <res> <adr> <int>
    add,      // ADD <res> <dst-adr> <src-adr>
    copy,     // COPY <res> <src-adr> <res> <dst-adr>
    request,  // REQUEST <res>
    release,  // RELEASE <res>
    call,     // CALL <proc-label>
    ret,      // RET
    transfer, // TRANSFER <activity-id>
    halt,
};

const char* opcode_name(Opcode op) noexcept;

// One instruction with its opcode-specific operands. Unused fields stay at
// their defaults; equality compares everything, which is harmless because
// parsing never leaves stale operands behind.
struct Instruction {
    Opcode op = Opcode::nop;
    std::string res_a;        // SET/ADD/REQUEST/RELEASE target, COPY source
    std::string res_b;        // COPY destination
    std::uint32_t adr_a = 0;  // SET address, ADD dst, COPY src
    std::uint32_t adr_b = 0;  // ADD src, COPY dst
    std::int64_t literal = 0; // SET value
    std::string label;        // CALL/TRANSFER target

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Referenced resource ids, in operand order.
std::vector<std::string> referenced_resources(const Instruction& in);

struct InstrParseIssue {
    std::size_t arg_index; // 0 = opcode token
    std::string message;
};

// Parses one whitespace-split instruction line (opcodes case-insensitive).
std::variant<Instruction, InstrParseIssue>
parse_instruction(const std::vector<std::string>& tokens);

// Canonical text form: uppercase opcode, single spaces.
std::string format_instruction(const Instruction& in);

// An ordered instruction sequence with named entry points. Labels mark the
// instruction that follows them; a label targeted by TRANSFER anywhere in
// the program is an ancillary procedure, one targeted by CALL is a plain
// procedure, and the two roles are mutually exclusive.
struct Program {
    std::vector<Instruction> instructions;
    std::vector<std::pair<std::string, std::size_t>> label_order; // declaration order
    std::map<std::string, std::size_t> labels;
    std::set<std::string> ancillary;

    bool empty() const noexcept { return instructions.empty(); }
    std::size_t size() const noexcept { return instructions.size(); }

    bool has_label(const std::string& name) const { return labels.count(name) != 0; }
    std::size_t entry(const std::string& name) const;

    friend bool operator==(const Program&, const Program&) = default;
};

// Assembles instruction/label lines ("<label>:" or one instruction per
// line; blank lines and "#" comments ignored). Throws ModelError on the
// first problem; the model parser does its own richer diagnostics.
Program assemble_program(const std::vector<std::string>& lines);

// Fills Program::ancillary from TRANSFER operands and checks label rules:
// targets must exist, no label is both CALL and TRANSFER target, and no
// label may sit at the very end with no instruction to mark.
void finalize_program(Program& program);

} // namespace osforma
