#include "osforma/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace osforma {

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_adr(const std::string& s, std::uint32_t& out) {
    std::int64_t v = 0;
    if (!parse_i64(s, v) || v < 1 || v > 0xffffffffLL)
        return false;
    out = static_cast<std::uint32_t>(v);
    return true;
}

} // namespace

const char* opcode_name(Opcode op) noexcept {
    switch (op) {
    case Opcode::nop: return "NOP";
    case Opcode::set: return "SET";
    case Opcode::add: return "ADD";
    case Opcode::copy: return "COPY";
    case Opcode::request: return "REQUEST";
    case Opcode::release: return "RELEASE";
    case Opcode::call: return "CALL";
    case Opcode::ret: return "RET";
    case Opcode::transfer: return "TRANSFER";
    case Opcode::halt: return "HALT";
    }
    return "?";
}

std::vector<std::string> referenced_resources(const Instruction& in) {
    switch (in.op) {
    case Opcode::set:
    case Opcode::add:
    case Opcode::request:
    case Opcode::release:
        return {in.res_a};
    case Opcode::copy:
        return {in.res_a, in.res_b};
    default:
        return {};
    }
}

std::variant<Instruction, InstrParseIssue>
parse_instruction(const std::vector<std::string>& tokens) {
    auto fail = [](std::size_t i, std::string msg) {
        return InstrParseIssue{i, std::move(msg)};
    };
    if (tokens.empty())
        return fail(0, "empty instruction");

    const std::string op = upper(tokens[0]);
    auto want = [&](std::size_t n) -> bool { return tokens.size() == n + 1; };
    Instruction in;

    if (op == "NOP") {
        if (!want(0)) return fail(1, "NOP takes no operands");
        in.op = Opcode::nop;
    } else if (op == "SET") {
        if (!want(3)) return fail(std::min<std::size_t>(tokens.size(), 4),
                                  "SET takes <res> <adr> <int>");
        in.op = Opcode::set;
        in.res_a = tokens[1];
        if (!parse_adr(tokens[2], in.adr_a)) return fail(2, "bad address '" + tokens[2] + "'");
        if (!parse_i64(tokens[3], in.literal)) return fail(3, "bad integer '" + tokens[3] + "'");
    } else if (op == "ADD") {
        if (!want(3)) return fail(std::min<std::size_t>(tokens.size(), 4),
                                  "ADD takes <res> <dst-adr> <src-adr>");
        in.op = Opcode::add;
        in.res_a = tokens[1];
        if (!parse_adr(tokens[2], in.adr_a)) return fail(2, "bad address '" + tokens[2] + "'");
        if (!parse_adr(tokens[3], in.adr_b)) return fail(3, "bad address '" + tokens[3] + "'");
    } else if (op == "COPY") {
        if (!want(4)) return fail(std::min<std::size_t>(tokens.size(), 5),
                                  "COPY takes <res> <src-adr> <res> <dst-adr>");
        in.op = Opcode::copy;
        in.res_a = tokens[1];
        if (!parse_adr(tokens[2], in.adr_a)) return fail(2, "bad address '" + tokens[2] + "'");
        in.res_b = tokens[3];
        if (!parse_adr(tokens[4], in.adr_b)) return fail(4, "bad address '" + tokens[4] + "'");
    } else if (op == "REQUEST" || op == "RELEASE") {
        if (!want(1)) return fail(std::min<std::size_t>(tokens.size(), 2),
                                  op + " takes <res>");
        in.op = op == "REQUEST" ? Opcode::request : Opcode::release;
        in.res_a = tokens[1];
    } else if (op == "CALL") {
        if (!want(1)) return fail(std::min<std::size_t>(tokens.size(), 2), "CALL takes <proc-label>");
        in.op = Opcode::call;
        in.label = tokens[1];
    } else if (op == "RET") {
        if (!want(0)) return fail(1, "RET takes no operands");
        in.op = Opcode::ret;
    } else if (op == "TRANSFER") {
        if (!want(1)) return fail(std::min<std::size_t>(tokens.size(), 2),
                                  "TRANSFER takes <activity-id>");
        in.op = Opcode::transfer;
        in.label = tokens[1];
    } else if (op == "HALT") {
        if (!want(0)) return fail(1, "HALT takes no operands");
        in.op = Opcode::halt;
    } else {
        return fail(0, "unknown opcode '" + tokens[0] + "'");
    }
    return in;
}

std::string format_instruction(const Instruction& in) {
    std::ostringstream out;
    out << opcode_name(in.op);
    switch (in.op) {
    case Opcode::set:
        out << ' ' << in.res_a << ' ' << in.adr_a << ' ' << in.literal;
        break;
    case Opcode::add:
        out << ' ' << in.res_a << ' ' << in.adr_a << ' ' << in.adr_b;
        break;
    case Opcode::copy:
        out << ' ' << in.res_a << ' ' << in.adr_a << ' ' << in.res_b << ' ' << in.adr_b;
        break;
    case Opcode::request:
    case Opcode::release:
        out << ' ' << in.res_a;
        break;
    case Opcode::call:
    case Opcode::transfer:
        out << ' ' << in.label;
        break;
    default:
        break;
    }
    return out.str();
}

std::size_t Program::entry(const std::string& name) const {
    auto it = labels.find(name);
    if (it == labels.end())
        raise(Errc::invalid_target, "no label '" + name + "'");
    return it->second;
}

void finalize_program(Program& program) {
    program.ancillary.clear();
    std::set<std::string> called;
    for (const Instruction& in : program.instructions) {
        if (in.op == Opcode::transfer)
            program.ancillary.insert(in.label);
        else if (in.op == Opcode::call)
            called.insert(in.label);
    }
    for (const auto& [name, index] : program.labels) {
        if (index >= program.instructions.size())
            raise(Errc::invalid_target,
                  "label '" + name + "' marks no instruction");
    }
    for (const std::string& name : program.ancillary) {
        if (!program.has_label(name))
            raise(Errc::invalid_target, "TRANSFER target '" + name + "' is not a label");
        if (called.count(name) != 0)
            raise(Errc::invalid_target,
                  "label '" + name + "' is both a CALL and a TRANSFER target");
    }
    for (const std::string& name : called) {
        if (!program.has_label(name))
            raise(Errc::invalid_target, "CALL target '" + name + "' is not a label");
    }
}

Program assemble_program(const std::vector<std::string>& lines) {
    Program program;
    for (const std::string& raw : lines) {
        std::string line = raw.substr(0, raw.find('#'));
        std::istringstream is(line);
        std::vector<std::string> tokens;
        for (std::string tok; is >> tok;)
            tokens.push_back(tok);
        if (tokens.empty())
            continue;
        if (tokens.size() == 1 && tokens[0].size() > 1 && tokens[0].back() == ':') {
            std::string name = tokens[0].substr(0, tokens[0].size() - 1);
            if (program.labels.count(name) != 0)
                raise(Errc::duplicate_id, "duplicate label '" + name + "'");
            program.labels.emplace(name, program.instructions.size());
            program.label_order.emplace_back(name, program.instructions.size());
            continue;
        }
        auto parsed = parse_instruction(tokens);
        if (auto* issue = std::get_if<InstrParseIssue>(&parsed))
            raise(Errc::invalid_target, "bad instruction '" + raw + "': " + issue->message);
        program.instructions.push_back(std::get<Instruction>(parsed));
    }
    if (program.empty())
        raise(Errc::empty_program, "program has no instructions");
    finalize_program(program);
    return program;
}

} // namespace osforma
