#include <doctest.h>

#include <random>

#include "osforma/parser.hpp"

using namespace osforma;

namespace {

const char* kSmall = R"(model demo
quantum 3
max_steps 500
seed 42
layer 0 hw
layer 1 kernel
resource 0 cpu0 size 0 cpu
resource 1 mem size 4
funcs mem set,add,copy
process p1 requests cpu0,mem
begin
  SET mem 1 5
loop:
  ADD mem 1 2
  CALL sub
  HALT
sub:
  NOP
  RET
end
)";

bool has_error(const ParseResult& r, ParseErrorKind kind, std::size_t line) {
    for (const ParseError& e : r.errors)
        if (e.kind == kind && e.line == line)
            return true;
    return false;
}

} // namespace

TEST_CASE("a full model parses into the document") {
    ParseResult r = parse_model(kSmall);
    REQUIRE(r.ok());
    const ModelDocument& d = r.document;
    CHECK(d.name == "demo");
    CHECK(d.quantum == 3);
    CHECK(d.max_steps == 500);
    CHECK(d.seed == 42);
    REQUIRE(d.layers.size() == 2);
    CHECK(d.layers[1].name == "kernel");
    REQUIRE(d.resources.size() == 2);
    CHECK(d.resources[0].is_cpu);
    CHECK(d.resources[1].funcs == std::set<std::string>{"add", "copy", "set"});
    REQUIRE(d.processes.size() == 1);
    const ProcessDecl& p = d.processes[0];
    CHECK(p.requests == std::vector<std::string>{"cpu0", "mem"});
    CHECK(p.program.size() == 6);
    CHECK(p.program.labels.at("loop") == 1);
    CHECK(p.program.labels.at("sub") == 4);
    CHECK(p.program.ancillary.empty());
}

TEST_CASE("defaults apply when directives are absent") {
    ParseResult r = parse_model("model m\nlayer 0 hw\n"
                                "resource 0 c size 0 cpu\n"
                                "process p requests c\nbegin\n HALT\nend\n");
    REQUIRE(r.ok());
    CHECK(r.document.quantum == 5);
    CHECK(r.document.max_steps == 10000);
    CHECK_FALSE(r.document.seed.has_value());
}

TEST_CASE("the file must open with the model line") {
    ParseResult r = parse_model("layer 0 hw\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors[0].line == 1);
    CHECK(r.errors[0].column == 1);
    CHECK(r.errors[0].kind == ParseErrorKind::syntax);
}

TEST_CASE("directives are singular, ordered, and bounded") {
    CHECK(has_error(parse_model("model m\nquantum 2\nquantum 3\n"),
                    ParseErrorKind::duplicate, 3));
    CHECK(has_error(parse_model("model m\nquantum 0\n"), ParseErrorKind::arity, 2));
    CHECK(has_error(parse_model("model m\nquantum -4\n"), ParseErrorKind::syntax, 2));
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nquantum 2\n"),
                    ParseErrorKind::syntax, 3));
}

TEST_CASE("layer indices run consecutively from zero") {
    CHECK(has_error(parse_model("model m\nlayer 1 hw\n"), ParseErrorKind::syntax, 2));
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nlayer 2 k\n"),
                    ParseErrorKind::syntax, 3));
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nlayer 1 hw\n"),
                    ParseErrorKind::duplicate, 3));
}

TEST_CASE("resource declarations are validated field by field") {
    const char* head = "model m\nlayer 0 hw\n";
    CHECK(has_error(parse_model(std::string(head) + "resource 3 r size 1\n"),
                    ParseErrorKind::unknown_reference, 3));
    CHECK(has_error(parse_model(std::string(head) + "resource 0 r size -2\n"),
                    ParseErrorKind::arity, 3));
    CHECK(has_error(parse_model(std::string(head) + "resource 0 r bytes 2\n"),
                    ParseErrorKind::syntax, 3));
    CHECK(has_error(parse_model(std::string(head) +
                                "resource 0 r size 1\nresource 0 r size 1\n"),
                    ParseErrorKind::duplicate, 4));
    CHECK(has_error(parse_model(std::string(head) + "resource 0 r size 2 cpu\n"),
                    ParseErrorKind::arity, 3));
    ParseResult ok = parse_model(std::string(head) + "resource 0 r size 0 cpu\n" +
                                 "process p requests r\nbegin\n NOP\nend\n");
    CHECK(ok.ok());
}

TEST_CASE("funcs attach to a declared resource exactly once") {
    const char* head = "model m\nlayer 0 hw\nresource 0 r size 1\n";
    CHECK(has_error(parse_model(std::string(head) + "funcs ghost set\n"),
                    ParseErrorKind::unknown_reference, 4));
    CHECK(has_error(parse_model(std::string(head) + "funcs r set\nfuncs r add\n"),
                    ParseErrorKind::duplicate, 5));
    CHECK(has_error(parse_model(std::string(head) + "funcs r set,set\n"),
                    ParseErrorKind::duplicate, 4));
    CHECK(has_error(parse_model(std::string(head) + "funcs r se-t\n"),
                    ParseErrorKind::syntax, 4));
}

TEST_CASE("process headers demand known resources and one processor") {
    const char* head = "model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                       "resource 0 c2 size 0 cpu\nresource 0 r size 1\n";
    auto tail = [](const char* reqs) {
        return std::string("process p requests ") + reqs + "\nbegin\n NOP\nend\n";
    };
    CHECK(has_error(parse_model(std::string(head) + tail("c,ghost")),
                    ParseErrorKind::unknown_reference, 6));
    CHECK(has_error(parse_model(std::string(head) + tail("c,r,r")),
                    ParseErrorKind::duplicate, 6));
    CHECK(has_error(parse_model(std::string(head) + tail("r")),
                    ParseErrorKind::arity, 6));
    CHECK(has_error(parse_model(std::string(head) + tail("c,c2")),
                    ParseErrorKind::arity, 6));
    ParseResult two = parse_model(std::string(head) + tail("c,r") +
                                  "process p requests c2\nbegin\n NOP\nend\n");
    CHECK(has_error(two, ParseErrorKind::duplicate, 10)); // pid reused
}

TEST_CASE("program blocks must open, close, and contain something") {
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                                "process p requests c\nbegin\n NOP\n"),
                    ParseErrorKind::syntax, 5)); // never closed
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                                "process p requests c\n"),
                    ParseErrorKind::syntax, 4)); // no begin
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                                "process p requests c\nbegin\nend\n"),
                    ParseErrorKind::arity, 6)); // empty program
    CHECK(has_error(parse_model("model m\nlayer 0 hw\nbegin\n"),
                    ParseErrorKind::syntax, 3)); // begin without header
}

TEST_CASE("labels are unique, attached, and single-role") {
    const char* head = "model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                       "process p requests c\nbegin\n";
    CHECK(has_error(parse_model(std::string(head) + "x:\nx:\n NOP\nend\n"),
                    ParseErrorKind::duplicate, 7));
    CHECK(has_error(parse_model(std::string(head) + " NOP\nx:\nend\n"),
                    ParseErrorKind::syntax, 7)); // trailing label
    CHECK(has_error(parse_model(std::string(head) + " CALL x\n HALT\nend\n"),
                    ParseErrorKind::unknown_reference, 6));
    CHECK(has_error(parse_model(std::string(head) +
                                " CALL x\n HALT\nx:\n TRANSFER x\nend\n"),
                    ParseErrorKind::syntax, 9)); // CALL and TRANSFER share x
}

TEST_CASE("instruction diagnostics point at the offending token") {
    ParseResult r = parse_model("model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                                "resource 0 mem size 2\n"
                                "process p requests c,mem\nbegin\n"
                                "  SET mem one 5\nend\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors[0].kind == ParseErrorKind::syntax);
    CHECK(r.errors[0].line == 7);
    CHECK(r.errors[0].column == 11); // the token "one"
}

TEST_CASE("instructions may only touch requested resources") {
    ParseResult r = parse_model("model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                                "resource 0 a size 1\nresource 0 b size 1\n"
                                "process p requests c,a\nbegin\n  SET b 1 1\nend\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors[0].kind == ParseErrorKind::unknown_reference);
    CHECK(r.errors[0].line == 8);
}

TEST_CASE("all errors are collected in a single pass") {
    ParseResult r = parse_model("model m\nlayer 0 hw\nresource 9 a size 1\n"
                                "resource 0 b size -1\n");
    CHECK(r.errors.size() == 2);
}

TEST_CASE("comments, blank lines, and CRLF are tolerated") {
    ParseResult r = parse_model("model m # the name\r\n\r\n# full comment\r\n"
                                "layer 0 hw\r\nresource 0 c size 0 cpu\r\n"
                                "process p requests c # claim\r\nbegin\r\n"
                                "  NOP # nothing\r\nend\r\n");
    REQUIRE(r.ok());
    CHECK(r.document.name == "m");
}

TEST_CASE("identifiers are bounded at 64 characters") {
    std::string long_id(65, 'a');
    CHECK_FALSE(parse_model("model " + long_id + "\n").ok());
    std::string ok_id(64, 'a');
    CHECK(parse_model("model " + ok_id + "\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                      "process p requests c\nbegin\n NOP\nend\n")
              .ok());
}

TEST_CASE("opcodes are case-insensitive, canonical text is uppercase") {
    ParseResult r = parse_model("model m\nlayer 0 hw\nresource 0 c size 0 cpu\n"
                                "resource 0 mem size 2\nfuncs mem set\n"
                                "process p requests c,mem\nbegin\n"
                                "  set mem 1 5\n  halt\nend\n");
    REQUIRE(r.ok());
    std::string text = serialize_model(r.document);
    CHECK(text.find("SET mem 1 5") != std::string::npos);
    CHECK(text.find("HALT") != std::string::npos);
}

TEST_CASE("serialize then parse is the identity on documents") {
    ParseResult first = parse_model(kSmall);
    REQUIRE(first.ok());
    std::string text = serialize_model(first.document);
    ParseResult second = parse_model(text);
    REQUIRE(second.ok());
    CHECK(first.document == second.document);
    // and the canonical form is a fixed point
    CHECK(serialize_model(second.document) == text);
}

TEST_CASE("the parser survives garbage without throwing") {
    const char* nasty[] = {
        "",
        "\n\n\n",
        "model\n",
        "model m\nmodel m\n",
        "end\n",
        "process requests\n",
        "model m\nlayer 0 hw\nresource 0 c size 0 cpu\nprocess p requests c\n"
        "begin\nbegin\nend\n",
        "model m\xff\xfe\n",
        "model m\nlayer 99999999999999999999 x\n",
        "model m\nquantum 99999999999999999999\n",
    };
    for (const char* s : nasty)
        CHECK_NOTHROW((void)parse_model(s));
}

TEST_CASE("random byte soup never crashes the parser") {
    std::mt19937_64 rng(77);
    const char alphabet[] = "model layerresourcefuncsprocessbeginend:#,\n\r\t 0123456789abcxyz_";
    for (int i = 0; i < 500; ++i) {
        std::string s;
        std::size_t len = rng() % 200;
        for (std::size_t j = 0; j < len; ++j)
            s.push_back(alphabet[rng() % (sizeof(alphabet) - 1)]);
        CHECK_NOTHROW((void)parse_model(s));
    }
}
