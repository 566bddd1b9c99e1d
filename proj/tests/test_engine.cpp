#include <doctest.h>

#include <sstream>

#include "osforma/analysis.hpp"
#include "osforma/engine.hpp"
#include "support/fixtures.hpp"

using namespace osforma;
using nlohmann::ordered_json;

namespace {

ModelDocument inline_model(const std::string& body) {
    std::string src = "model t\nlayer 0 hw\nresource 0 cpu0 size 0 cpu\n"
                      "resource 0 mem size 2\nfuncs mem set,add,copy\n"
                      "process p1 requests cpu0,mem\nbegin\n" +
                      body + "end\n";
    ParseResult r = parse_model(src);
    if (!r.ok())
        throw std::runtime_error("inline model failed to parse: " +
                                 r.errors[0].message);
    return r.document;
}

std::vector<std::size_t> pc_sequence(const Engine& eng, const std::string& pid) {
    std::vector<std::size_t> pcs;
    for (const TraceEvent& ev : eng.events())
        if (ev.kind == trace_kind::instr && ev.pid == pid)
            pcs.push_back(ev.detail.at("pc").get<std::size_t>());
    return pcs;
}

std::string trace_text(const Engine& eng) {
    std::string out;
    for (const TraceEvent& ev : eng.events())
        out += to_line(ev) + "\n";
    return out;
}

} // namespace

TEST_CASE("the smallest model runs to completion in two steps") {
    Engine eng = Engine::build(testfix::load_model("minimal.osm"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::completed);
    CHECK(res.steps == 2);
    CHECK(res.terminated == 1);
    CHECK(res.total == 1);
    CHECK(res.faulted == 0);
    CHECK(run_summary(res) == "COMPLETED steps=2 processes=1/1");
    CHECK(eng.resources().read_element("mem", 1).value() == 5);
}

TEST_CASE("every step preserves the runtime invariants") {
    const char* fixtures[] = {"minimal.osm",  "roundrobin.osm", "pingpong.osm",
                              "callret.osm",  "hold_and_wait.osm",
                              "fault_release.osm"};
    for (const char* name : fixtures) {
        CAPTURE(name);
        Engine eng = Engine::build(testfix::load_model(name));
        eng.admit_all();
        CHECK(eng.check_invariants().empty());
        int guard = 0;
        while (!eng.all_terminated() && !eng.stalled() && ++guard < 200) {
            eng.step();
            auto breaches = eng.check_invariants();
            std::string first = breaches.empty() ? std::string() : breaches.front();
            CAPTURE(first);
            CHECK(breaches.empty());
        }
    }
}

TEST_CASE("a quantum of one alternates the processor") {
    Engine eng = Engine::build(testfix::load_model("roundrobin.osm"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::completed);
    std::vector<std::string> order;
    for (const TraceEvent& ev : eng.events())
        if (ev.kind == trace_kind::instr)
            order.push_back(*ev.pid);
    CHECK(order == std::vector<std::string>{"p1", "p2", "p1", "p2", "p1", "p2"});
}

TEST_CASE("a fault releases everything the faulting process held") {
    Engine eng = Engine::build(testfix::load_model("fault_release.osm"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::completed);
    CHECK(res.steps == 3);
    CHECK(res.terminated == 2);
    CHECK(res.faulted == 1);
    const Process& p1 = eng.processes().at("p1");
    CHECK(p1.faulted);
    CHECK(p1.fault == "AddressOutOfRange");
    CHECK_FALSE(eng.processes().at("p2").faulted);
    // p2 got the resource zero-filled, then wrote 42 into the first word
    CHECK(eng.resources().read_element("shared", 1).value() == 42);
    CHECK(eng.resources().read_element("shared", 2).value() == 0);
    bool saw_fault_reason = false;
    for (const TraceEvent& ev : eng.events())
        if (ev.kind == trace_kind::state_change && ev.pid == "p1" &&
            ev.detail.value("reason", "") == "fault:AddressOutOfRange")
            saw_fault_reason = true;
    CHECK(saw_fault_reason);
}

TEST_CASE("a transform outside the declared set refuses to run") {
    ParseResult r = parse_model("model t\nlayer 0 hw\n"
                                "resource 0 cpu0 size 0 cpu\n"
                                "resource 0 raw size 2\n"
                                "process p1 requests cpu0,raw\nbegin\n"
                                "  SET raw 1 1\nend\n");
    REQUIRE(r.ok());
    Engine eng = Engine::build(r.document);
    eng.run();
    const Process& p1 = eng.processes().at("p1");
    CHECK(p1.faulted);
    CHECK(p1.fault == "UnregisteredFunction");
}

TEST_CASE("RET on an empty call stack is a fault") {
    Engine eng = Engine::build(inline_model("  RET\n"));
    eng.run();
    CHECK(eng.processes().at("p1").fault == "UnbalancedReturn");
}

TEST_CASE("HALT inside a procedure is a fault") {
    Engine eng = Engine::build(inline_model("  CALL f\n  HALT\nf:\n  HALT\n"));
    eng.run();
    CHECK(eng.processes().at("p1").fault == "UnbalancedReturn");
}

TEST_CASE("running off the end of the program terminates cleanly") {
    Engine eng = Engine::build(inline_model("  NOP\n"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::completed);
    CHECK(res.faulted == 0);
    bool saw_end = false;
    for (const TraceEvent& ev : eng.events())
        if (ev.kind == trace_kind::state_change &&
            ev.detail.value("reason", "") == "end")
            saw_end = true;
    CHECK(saw_end);
}

TEST_CASE("runaway recursion overflows the call stack") {
    Engine eng = Engine::build(testfix::load_model("spin.osm"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::completed);
    CHECK(res.steps == 1025);
    CHECK(eng.processes().at("p1").fault == "StackOverflow");

    EngineConfig capped;
    capped.max_steps = 100;
    Engine bounded = Engine::build(testfix::load_model("spin.osm"), capped);
    RunResult cut = bounded.run();
    CHECK(cut.reason == RunReason::max_steps);
    CHECK(cut.steps == 100);
    CHECK(cut.faulted == 0);
    CHECK(bounded.processes().at("p1").executed_count == 100);

    EngineConfig zero;
    zero.max_steps = 0;
    Engine stopped = Engine::build(testfix::load_model("spin.osm"), zero);
    RunResult none = stopped.run();
    CHECK(none.reason == RunReason::max_steps);
    CHECK(none.steps == 0);
}

TEST_CASE("mutual waiting stalls the run") {
    Engine eng = Engine::build(testfix::load_model("hold_and_wait.osm"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::deadlock);
    CHECK(res.steps == 2);
    CHECK(res.terminated == 0);
    CHECK(eng.count_state(GlobalState::blocked) == 2);
    CHECK(run_summary(res) == "DEADLOCK steps=2 processes=0/2");
}

TEST_CASE("control transfer resumes each activity where it left off") {
    Engine eng = Engine::build(testfix::load_model("pingpong.osm"));
    RunResult res = eng.run();
    CHECK(res.reason == RunReason::completed);
    CHECK(pc_sequence(eng, "p1") ==
          std::vector<std::size_t>{0, 2, 3, 7, 8, 4, 5, 9, 10, 6});
    // each event names the destination and the pc it resumes at: the entry
    // point on first activation, the saved continuation afterwards
    std::vector<std::pair<std::string, std::size_t>> hops;
    for (const TraceEvent& ev : eng.events())
        if (ev.kind == trace_kind::transfer)
            hops.emplace_back(ev.detail.at("to").get<std::string>(),
                              ev.detail.at("resume").get<std::size_t>());
    CHECK(hops == std::vector<std::pair<std::string, std::size_t>>{
                      {"a", 2}, {"b", 7}, {"a", 4}, {"b", 9}, {"a", 6}});
}

TEST_CASE("call and return unwind in LIFO order") {
    Engine eng = Engine::build(testfix::load_model("callret.osm"));
    eng.run();
    CHECK(pc_sequence(eng, "p1") == std::vector<std::size_t>{0, 2, 4, 5, 3, 1});
    CHECK(eng.resources().read_element("mem", 1).value() == 7);
}

TEST_CASE("an activity cannot transfer to itself") {
    Engine eng = Engine::build(inline_model("  TRANSFER a\n  HALT\na:\n  TRANSFER a\n"));
    eng.run();
    CHECK(eng.processes().at("p1").fault == "SelfTransfer");
}

TEST_CASE("each activity gets a private scratch resource") {
    Engine eng = Engine::build(testfix::load_model("pingpong.osm"));
    REQUIRE(eng.resources().contains("p1_a_local"));
    REQUIRE(eng.resources().contains("p1_b_local"));
    const Resource& scratch = eng.resources().get("p1_a_local");
    CHECK(scratch.size() == 8);
    CHECK(scratch.func_ids() == std::set<std::string>{"add", "copy", "set"});
    CHECK(eng.layers().layer_of("p1_a_local") == 0);
}

TEST_CASE("identical builds replay identical traces") {
    ModelDocument doc = testfix::load_model("roundrobin.osm");
    Engine a = Engine::build(doc);
    Engine b = Engine::build(doc);
    a.run();
    b.run();
    CHECK(trace_text(a) == trace_text(b));
    CHECK(a.state_key() == b.state_key());
}

TEST_CASE("traces survive a file round trip") {
    Engine eng = Engine::build(testfix::load_model("minimal.osm"));
    eng.run();
    std::stringstream buf;
    write_trace(buf, eng.events());
    std::vector<TraceEvent> back = read_trace(buf);
    CHECK(back == eng.events());
}

TEST_CASE("the run ends with a summary event") {
    Engine eng = Engine::build(testfix::load_model("minimal.osm"));
    eng.run();
    REQUIRE_FALSE(eng.events().empty());
    const TraceEvent& last = eng.events().back();
    CHECK(last.kind == trace_kind::halt);
    CHECK_FALSE(last.pid.has_value());
    CHECK(last.detail.at("reason") == "COMPLETED");
    CHECK(last.detail.at("steps") == 2);
    CHECK(last.detail.at("terminated") == 1);
    CHECK(last.detail.at("total") == 1);
}

TEST_CASE("build rejects degenerate configurations") {
    ModelDocument bare;
    bare.name = "empty";
    CHECK_THROWS_AS((void)Engine::build(bare), ModelError);

    ModelDocument doc = testfix::load_model("minimal.osm");
    EngineConfig cfg;
    cfg.quantum = 0;
    CHECK_THROWS_AS((void)Engine::build(doc, cfg), ModelError);

    // a declared resource that collides with an activity's scratch id
    ParseResult r = parse_model("model t\nlayer 0 hw\n"
                                "resource 0 cpu0 size 0 cpu\n"
                                "resource 0 p1_a_local size 1\n"
                                "process p1 requests cpu0\nbegin\n"
                                "  TRANSFER a\n  HALT\na:\n  HALT\nend\n");
    REQUIRE(r.ok());
    CHECK_THROWS_AS((void)Engine::build(r.document), ModelError);
}

TEST_CASE("admission is single-shot") {
    Engine eng = Engine::build(testfix::load_model("minimal.osm"));
    eng.admit_all();
    CHECK_THROWS_AS(eng.admit_all(), ModelError);
    RunResult res = eng.run(); // run() tolerates pre-admitted engines
    CHECK(res.reason == RunReason::completed);
}

TEST_CASE("a disabled trace records nothing but runs the same") {
    EngineConfig quiet;
    quiet.emit_trace = false;
    Engine loud = Engine::build(testfix::load_model("roundrobin.osm"));
    Engine silent = Engine::build(testfix::load_model("roundrobin.osm"), quiet);
    RunResult a = loud.run();
    RunResult b = silent.run();
    CHECK(a == b);
    CHECK(silent.events().empty());
    CHECK(loud.state_key() == silent.state_key());
}
