#include "osforma/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

namespace osforma {

const char* parse_error_kind_name(ParseErrorKind k) noexcept {
    switch (k) {
    case ParseErrorKind::syntax: return "SYNTAX";
    case ParseErrorKind::unknown_reference: return "UNKNOWN_REFERENCE";
    case ParseErrorKind::duplicate: return "DUPLICATE";
    case ParseErrorKind::arity: return "ARITY";
    }
    return "?";
}

namespace {

struct Tok {
    std::string text;
    std::size_t col = 1;
};

std::vector<Tok> tokenize(const std::string& line) {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == ' ' || line[i] == '\t') {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t')
            ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

bool is_identifier(const std::string& s) {
    if (s.empty() || s.size() > 64)
        return false;
    unsigned char head = static_cast<unsigned char>(s[0]);
    if (!std::isalpha(head) && s[0] != '_')
        return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) {
        unsigned char u = static_cast<unsigned char>(c);
        return std::isalnum(u) || c == '_';
    });
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_s64(const std::string& s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

// Items of a comma-joined token, each with its own source column.
std::vector<Tok> split_list(const Tok& tok) {
    std::vector<Tok> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = tok.text.find(',', start);
        std::string item = tok.text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back({item, tok.col + start});
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

enum class Phase { expect_model, directives, layers, resources, processes };

struct PendingTarget {
    std::string label;
    std::size_t line = 1;
    std::size_t col = 1;
    bool is_transfer = false;
};

class Parser {
  public:
    explicit Parser(const std::string& source) : source_(source) {}

    ParseResult run() {
        std::istringstream in(source_);
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no_;
            if (!raw.empty() && raw.back() == '\r')
                raw.pop_back();
            std::string line = raw.substr(0, raw.find('#'));
            std::vector<Tok> toks = tokenize(line);
            if (toks.empty())
                continue;
            if (in_block_)
                block_line(toks);
            else
                keyword_line(toks);
        }
        if (in_block_)
            err(block_line_, 1, ParseErrorKind::syntax,
                "program block never closed with 'end'");
        if (await_begin_)
            err(header_line_, 1, ParseErrorKind::syntax,
                "process header has no 'begin' block");
        ParseResult out;
        out.errors = std::move(errors_);
        if (out.errors.empty())
            out.document = std::move(doc_);
        return out;
    }

  private:
    void err(std::size_t line, std::size_t col, ParseErrorKind kind, std::string msg) {
        errors_.push_back(ParseError{line, col, kind, std::move(msg)});
    }

    bool check_identifier(const Tok& t, const char* what) {
        if (is_identifier(t.text))
            return true;
        err(line_no_, t.col, ParseErrorKind::syntax,
            std::string("'") + t.text + "' is not a valid " + what);
        return false;
    }

    void keyword_line(const std::vector<Tok>& toks) {
        const std::string& kw = toks[0].text;
        if (phase_ == Phase::expect_model) {
            if (kw == "model") {
                model_line(toks);
                return;
            }
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "file must start with 'model <name>'");
            phase_ = Phase::directives;
        }
        if (kw == "model") {
            err(line_no_, toks[0].col, ParseErrorKind::duplicate, "model declared twice");
        } else if (kw == "quantum" || kw == "max_steps" || kw == "seed") {
            directive_line(toks);
        } else if (kw == "layer") {
            layer_line(toks);
        } else if (kw == "resource") {
            resource_line(toks);
        } else if (kw == "funcs") {
            funcs_line(toks);
        } else if (kw == "process") {
            process_line(toks);
        } else if (kw == "begin") {
            if (!await_begin_) {
                err(line_no_, toks[0].col, ParseErrorKind::syntax,
                    "'begin' without a process header");
                return;
            }
            await_begin_ = false;
            in_block_ = true;
            block_line_ = line_no_;
            prog_ = Program{};
            targets_.clear();
            label_pos_.clear();
            instr_lines_.clear();
        } else if (kw == "end") {
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "'end' without a matching 'begin'");
        } else {
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "unknown keyword '" + kw + "'");
        }
    }

    void model_line(const std::vector<Tok>& toks) {
        phase_ = Phase::directives;
        if (toks.size() != 2) {
            err(line_no_, toks[0].col, ParseErrorKind::arity, "expected 'model <name>'");
            return;
        }
        if (check_identifier(toks[1], "model name"))
            doc_.name = toks[1].text;
    }

    void directive_line(const std::vector<Tok>& toks) {
        const std::string& kw = toks[0].text;
        if (phase_ != Phase::directives) {
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "'" + kw + "' must come before any declarations");
            return;
        }
        if (toks.size() != 2) {
            err(line_no_, toks[0].col, ParseErrorKind::arity,
                "expected '" + kw + " <int>'");
            return;
        }
        auto value = parse_u64(toks[1].text);
        if (!value) {
            err(line_no_, toks[1].col, ParseErrorKind::syntax,
                "'" + toks[1].text + "' is not a non-negative integer");
            return;
        }
        if (!seen_directives_.insert(kw).second) {
            err(line_no_, toks[0].col, ParseErrorKind::duplicate,
                "'" + kw + "' given twice");
            return;
        }
        if (kw == "quantum") {
            if (*value == 0 || *value > 0xffffffffULL) {
                err(line_no_, toks[1].col, ParseErrorKind::arity,
                    "quantum must be between 1 and 2^32-1");
                return;
            }
            doc_.quantum = static_cast<std::uint32_t>(*value);
        } else if (kw == "max_steps") {
            doc_.max_steps = *value;
        } else {
            doc_.seed = *value;
        }
    }

    void layer_line(const std::vector<Tok>& toks) {
        if (phase_ > Phase::layers) {
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "layers must be declared before resources and processes");
            return;
        }
        phase_ = Phase::layers;
        if (toks.size() != 3) {
            err(line_no_, toks[0].col, ParseErrorKind::arity,
                "expected 'layer <index> <name>'");
            return;
        }
        auto index = parse_u64(toks[1].text);
        if (!index || *index != doc_.layers.size()) {
            err(line_no_, toks[1].col, ParseErrorKind::syntax,
                "layer indices are consecutive from 0; expected " +
                    std::to_string(doc_.layers.size()));
            return;
        }
        if (!check_identifier(toks[2], "layer name"))
            return;
        if (!layer_names_.insert(toks[2].text).second) {
            err(line_no_, toks[2].col, ParseErrorKind::duplicate,
                "layer name '" + toks[2].text + "' reused");
            return;
        }
        doc_.layers.push_back(LayerDecl{*index, toks[2].text});
    }

    void resource_line(const std::vector<Tok>& toks) {
        if (phase_ > Phase::resources) {
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "resources must be declared before processes");
            return;
        }
        phase_ = Phase::resources;
        if (toks.size() != 5 && toks.size() != 6) {
            err(line_no_, toks[0].col, ParseErrorKind::arity,
                "expected 'resource <layer-index> <id> size <int> [cpu]'");
            return;
        }
        if (toks[3].text != "size") {
            err(line_no_, toks[3].col, ParseErrorKind::syntax,
                "expected keyword 'size', got '" + toks[3].text + "'");
            return;
        }
        ResourceDecl decl;
        auto layer = parse_u64(toks[1].text);
        if (!layer) {
            err(line_no_, toks[1].col, ParseErrorKind::syntax,
                "'" + toks[1].text + "' is not a layer index");
            return;
        }
        if (*layer >= doc_.layers.size()) {
            err(line_no_, toks[1].col, ParseErrorKind::unknown_reference,
                "no layer " + toks[1].text + " declared");
            return;
        }
        decl.layer = static_cast<std::size_t>(*layer);
        if (!check_identifier(toks[2], "resource id"))
            return;
        if (!resource_ids_.insert(toks[2].text).second) {
            err(line_no_, toks[2].col, ParseErrorKind::duplicate,
                "resource '" + toks[2].text + "' declared twice");
            return;
        }
        decl.id = toks[2].text;
        auto size = parse_s64(toks[4].text);
        if (!size) {
            err(line_no_, toks[4].col, ParseErrorKind::syntax,
                "'" + toks[4].text + "' is not an integer size");
            return;
        }
        if (*size < 0) {
            err(line_no_, toks[4].col, ParseErrorKind::arity,
                "resource size cannot be negative");
            return;
        }
        decl.size = *size;
        if (toks.size() == 6) {
            if (toks[5].text != "cpu") {
                err(line_no_, toks[5].col, ParseErrorKind::syntax,
                    "expected 'cpu', got '" + toks[5].text + "'");
                return;
            }
            if (decl.size != 0) {
                err(line_no_, toks[4].col, ParseErrorKind::arity,
                    "processor resources must have size 0");
                return;
            }
            decl.is_cpu = true;
            cpu_ids_.insert(decl.id);
        }
        doc_.resources.push_back(std::move(decl));
    }

    void funcs_line(const std::vector<Tok>& toks) {
        if (phase_ > Phase::resources) {
            err(line_no_, toks[0].col, ParseErrorKind::syntax,
                "funcs must be declared before processes");
            return;
        }
        phase_ = Phase::resources;
        if (toks.size() != 3) {
            err(line_no_, toks[0].col, ParseErrorKind::arity,
                "expected 'funcs <resource-id> <name>,<name>,...'");
            return;
        }
        auto decl = std::find_if(doc_.resources.begin(), doc_.resources.end(),
                                 [&](const ResourceDecl& r) { return r.id == toks[1].text; });
        if (decl == doc_.resources.end()) {
            err(line_no_, toks[1].col, ParseErrorKind::unknown_reference,
                "no resource '" + toks[1].text + "' declared");
            return;
        }
        if (!funcs_given_.insert(toks[1].text).second) {
            err(line_no_, toks[1].col, ParseErrorKind::duplicate,
                "funcs for '" + toks[1].text + "' given twice");
            return;
        }
        std::set<std::string> names;
        for (const Tok& item : split_list(toks[2])) {
            if (!is_identifier(item.text)) {
                err(line_no_, item.col, ParseErrorKind::syntax,
                    "'" + item.text + "' is not a valid function name");
                continue;
            }
            if (!names.insert(item.text).second)
                err(line_no_, item.col, ParseErrorKind::duplicate,
                    "function '" + item.text + "' listed twice");
        }
        decl->funcs = std::move(names);
    }

    void process_line(const std::vector<Tok>& toks) {
        if (await_begin_)
            err(header_line_, 1, ParseErrorKind::syntax,
                "process header has no 'begin' block");
        phase_ = Phase::processes;
        await_begin_ = true;
        header_line_ = line_no_;
        header_ok_ = false;
        cur_ = ProcessDecl{};
        req_set_.clear();

        if (toks.size() != 4 || toks[2].text != "requests") {
            err(line_no_, toks[0].col, ParseErrorKind::arity,
                "expected 'process <pid> requests <id>,<id>,...'");
            return;
        }
        if (!check_identifier(toks[1], "process id"))
            return;
        if (!pids_.insert(toks[1].text).second) {
            err(line_no_, toks[1].col, ParseErrorKind::duplicate,
                "process '" + toks[1].text + "' declared twice");
            return;
        }
        cur_.pid = toks[1].text;

        bool ok = true;
        std::size_t cpus = 0;
        for (const Tok& item : split_list(toks[3])) {
            if (resource_ids_.count(item.text) == 0) {
                err(line_no_, item.col, ParseErrorKind::unknown_reference,
                    "no resource '" + item.text + "' declared");
                ok = false;
                continue;
            }
            if (!req_set_.insert(item.text).second) {
                err(line_no_, item.col, ParseErrorKind::duplicate,
                    "resource '" + item.text + "' requested twice");
                ok = false;
                continue;
            }
            cur_.requests.push_back(item.text);
            if (cpu_ids_.count(item.text) != 0)
                ++cpus;
        }
        if (ok && cpus != 1) {
            err(line_no_, toks[3].col, ParseErrorKind::arity,
                "a process must request exactly one processor");
            ok = false;
        }
        header_ok_ = ok;
    }

    void block_line(const std::vector<Tok>& toks) {
        if (toks[0].text == "end") {
            if (toks.size() != 1)
                err(line_no_, toks[1].col, ParseErrorKind::arity,
                    "'end' takes nothing else");
            close_block();
            return;
        }
        if (toks[0].text.size() > 1 && toks[0].text.back() == ':') {
            if (toks.size() != 1) {
                err(line_no_, toks[1].col, ParseErrorKind::syntax,
                    "a label stands alone on its line");
                return;
            }
            std::string name = toks[0].text.substr(0, toks[0].text.size() - 1);
            if (!is_identifier(name)) {
                err(line_no_, toks[0].col, ParseErrorKind::syntax,
                    "'" + name + "' is not a valid label");
                return;
            }
            if (prog_.labels.count(name) != 0) {
                err(line_no_, toks[0].col, ParseErrorKind::duplicate,
                    "label '" + name + "' defined twice");
                return;
            }
            prog_.labels.emplace(name, prog_.instructions.size());
            prog_.label_order.emplace_back(name, prog_.instructions.size());
            label_pos_[name] = {line_no_, toks[0].col};
            return;
        }

        std::vector<std::string> words;
        words.reserve(toks.size());
        for (const Tok& t : toks)
            words.push_back(t.text);
        auto parsed = parse_instruction(words);
        if (auto* issue = std::get_if<InstrParseIssue>(&parsed)) {
            std::size_t col = issue->arg_index < toks.size()
                                  ? toks[issue->arg_index].col
                                  : toks.back().col + toks.back().text.size();
            err(line_no_, col, ParseErrorKind::syntax, issue->message);
            return;
        }
        const Instruction& in = std::get<Instruction>(parsed);
        if (header_ok_) {
            for (const std::string& res : referenced_resources(in)) {
                if (req_set_.count(res) != 0)
                    continue;
                std::size_t col = toks[0].col;
                for (const Tok& t : toks)
                    if (t.text == res) {
                        col = t.col;
                        break;
                    }
                err(line_no_, col, ParseErrorKind::unknown_reference,
                    "'" + res + "' is not among this process's requests");
            }
        }
        if (in.op == Opcode::call || in.op == Opcode::transfer)
            targets_.push_back(PendingTarget{in.label, line_no_, toks[1].col,
                                             in.op == Opcode::transfer});
        prog_.instructions.push_back(in);
        instr_lines_.push_back(line_no_);
    }

    void close_block() {
        in_block_ = false;
        std::size_t before = errors_.size();
        if (prog_.instructions.empty())
            err(line_no_, 1, ParseErrorKind::arity,
                "a program needs at least one instruction");
        for (const auto& [name, index] : prog_.labels) {
            if (index >= prog_.instructions.size()) {
                auto pos = label_pos_[name];
                err(pos.first, pos.second, ParseErrorKind::syntax,
                    "label '" + name + "' marks no instruction");
            }
        }
        std::set<std::string> called, transferred;
        for (const PendingTarget& t : targets_) {
            if (prog_.labels.count(t.label) == 0) {
                err(t.line, t.col, ParseErrorKind::unknown_reference,
                    "no label '" + t.label + "' in this program");
                continue;
            }
            (t.is_transfer ? transferred : called).insert(t.label);
        }
        for (const PendingTarget& t : targets_) {
            if (t.is_transfer && called.count(t.label) != 0) {
                err(t.line, t.col, ParseErrorKind::syntax,
                    "label '" + t.label + "' is both a CALL and a TRANSFER target");
                called.erase(t.label);
            }
        }
        if (!header_ok_ || errors_.size() != before)
            return;
        finalize_program(prog_);
        cur_.program = std::move(prog_);
        doc_.processes.push_back(std::move(cur_));
    }

    std::string source_;
    std::size_t line_no_ = 0;
    Phase phase_ = Phase::expect_model;
    ModelDocument doc_;
    std::vector<ParseError> errors_;

    std::set<std::string> seen_directives_;
    std::set<std::string> layer_names_;
    std::set<std::string> resource_ids_;
    std::set<std::string> cpu_ids_;
    std::set<std::string> funcs_given_;
    std::set<std::string> pids_;

    bool await_begin_ = false;
    bool in_block_ = false;
    bool header_ok_ = false;
    std::size_t header_line_ = 1;
    std::size_t block_line_ = 1;
    ProcessDecl cur_;
    std::set<std::string> req_set_;
    Program prog_;
    std::vector<PendingTarget> targets_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> label_pos_;
    std::vector<std::size_t> instr_lines_;
};

} // namespace

ParseResult parse_model(const std::string& source) { return Parser(source).run(); }

std::string serialize_model(const ModelDocument& doc) {
    std::ostringstream out;
    out << "model " << doc.name << '\n';
    out << "quantum " << doc.quantum << '\n';
    out << "max_steps " << doc.max_steps << '\n';
    if (doc.seed)
        out << "seed " << *doc.seed << '\n';
    for (const LayerDecl& l : doc.layers)
        out << "layer " << l.index << ' ' << l.name << '\n';
    for (const ResourceDecl& r : doc.resources) {
        out << "resource " << r.layer << ' ' << r.id << " size " << r.size
            << (r.is_cpu ? " cpu" : "") << '\n';
        if (!r.funcs.empty()) {
            out << "funcs " << r.id << ' ';
            bool first = true;
            for (const std::string& f : r.funcs) {
                out << (first ? "" : ",") << f;
                first = false;
            }
            out << '\n';
        }
    }
    for (const ProcessDecl& p : doc.processes) {
        out << "process " << p.pid << " requests ";
        for (std::size_t i = 0; i < p.requests.size(); ++i)
            out << (i ? "," : "") << p.requests[i];
        out << '\n' << "begin\n";
        auto next_label = p.program.label_order.begin();
        for (std::size_t pc = 0; pc <= p.program.instructions.size(); ++pc) {
            while (next_label != p.program.label_order.end() &&
                   next_label->second == pc) {
                out << "  " << next_label->first << ":\n";
                ++next_label;
            }
            if (pc < p.program.instructions.size())
                out << "  " << format_instruction(p.program.instructions[pc]) << '\n';
        }
        out << "end\n";
    }
    return out.str();
}

} // namespace osforma
