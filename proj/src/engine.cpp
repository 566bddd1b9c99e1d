#include "osforma/engine.hpp"

#include <algorithm>
#include <sstream>

namespace osforma {

namespace {
constexpr std::size_t kCallStackLimit = 1024;
}

const char* run_reason_name(RunReason r) noexcept {
    switch (r) {
    case RunReason::completed: return "COMPLETED";
    case RunReason::max_steps: return "MAX_STEPS";
    case RunReason::deadlock: return "DEADLOCK";
    }
    return "?";
}

std::string run_summary(const RunResult& r) {
    std::ostringstream out;
    out << run_reason_name(r.reason) << " steps=" << r.steps << " processes="
        << r.terminated << "/" << r.total;
    return out.str();
}

Engine Engine::build(const ModelDocument& doc, const EngineConfig& cfg) {
    Engine e;
    e.trace_ = Trace(cfg.emit_trace);
    e.quantum_ = cfg.quantum.value_or(doc.quantum);
    e.max_steps_ = cfg.max_steps.value_or(doc.max_steps);
    if (e.quantum_ == 0)
        raise(Errc::count_mismatch, "quantum must be at least 1");

    if (doc.layers.empty())
        raise(Errc::count_mismatch, "the model declares no layers");
    std::vector<std::string> names;
    names.reserve(doc.layers.size());
    for (const LayerDecl& l : doc.layers)
        names.push_back(l.name);
    e.layers_ = LayerSystem(doc.layers.size(), names);

    for (const ResourceDecl& r : doc.resources) {
        e.resources_.make_resource(r.id, r.size, r.funcs);
        e.layers_.assign_resource(r.layer, r.id);
        if (r.is_cpu)
            e.sched_.add_processor(r.id);
    }

    for (const ProcessDecl& decl : doc.processes) {
        std::vector<std::string> requests = decl.requests;
        // Every ancillary procedure gets its own scratch words, claimed up
        // front like any other resource.
        for (const std::string& label : decl.program.ancillary) {
            std::string scratch = decl.pid + "_" + label + "_local";
            e.resources_.make_resource(scratch, cfg.scratch_words,
                                       {"set", "add", "copy"});
            e.layers_.assign_resource(0, scratch);
            requests.push_back(scratch);
        }
        add_process(e.procs_, make_process(decl.pid, requests, decl.program,
                                           e.resources_, e.sched_.processors()));
        e.admit_order_.push_back(decl.pid);
    }
    return e;
}

void Engine::admit_all() {
    if (admitted_)
        raise(Errc::not_live, "processes already admitted");
    admitted_ = true;
    for (const std::string& pid : admit_order_)
        sched_.admit(procs_.at(pid), resources_, trace_, tick_);
}

void Engine::begin_step() {
    ++tick_;
    ++steps_;
}

std::map<std::string, std::vector<std::string>> Engine::dispatch_options() const {
    return sched_.dispatch_candidates(procs_);
}

void Engine::dispatch_to(const std::vector<std::string>& pids) {
    for (const std::string& pid : pids)
        sched_.dispatch_one(procs_.at(pid), trace_, tick_);
}

void Engine::finish_step() {
    std::vector<std::string> running;
    for (const auto& [pid, p] : procs_)
        if (p.state == GlobalState::active)
            running.push_back(pid);
    for (const std::string& pid : running) {
        Process& p = procs_.at(pid);
        if (p.state == GlobalState::active)
            execute_one(p);
    }
    for (const std::string& pid : running) {
        Process& p = procs_.at(pid);
        if (p.state == GlobalState::active && p.quantum_used >= quantum_)
            sched_.preempt(p, trace_, tick_);
    }
}

void Engine::step() {
    begin_step();
    sched_.dispatch(procs_, trace_, tick_);
    finish_step();
}

void Engine::finish_terminated(Process& p, const char* reason) {
    sched_.terminate(p, reason, procs_, resources_, trace_, tick_);
}

void Engine::fault(Process& p, const ModelError& e) {
    p.faulted = true;
    p.fault = errc_name(e.code());
    finish_terminated(p, (std::string("fault:") + p.fault).c_str());
}

void Engine::execute_one(Process& p) {
    if (p.pc >= p.program.size()) {
        if (p.call_stack.empty()) {
            finish_terminated(p, "end");
        } else {
            fault(p, ModelError(Errc::unbalanced_return,
                                "program ended inside a procedure"));
        }
        return;
    }

    const Instruction in = p.program.instructions[p.pc];
    const std::size_t at = p.pc;

    auto held = [&](const std::string& id) -> Resource& {
        if (!p.holds(id))
            raise(Errc::resource_not_claimed,
                  "process '" + p.pid + "' does not hold '" + id +
                      "' under its current claim");
        return resources_.get(id);
    };
    auto admissible = [&](const Resource& r, const char* fn) {
        if (r.func_ids().count(fn) == 0)
            raise(Errc::unregistered_function,
                  std::string("'") + fn + "' is not an admissible function of '" +
                      r.id() + "'");
    };
    auto bounded = [&](const Resource& r, std::uint32_t adr) {
        if (adr < 1 || adr > r.size())
            raise(Errc::address_out_of_range,
                  r.id() + ": address " + std::to_string(adr) + " outside {1.." +
                      std::to_string(r.size()) + "}");
    };
    auto instr_event = [&] {
        trace_.emit(tick_, trace_kind::instr, p.pid,
                    {{"opcode", opcode_name(in.op)},
                     {"pc", at},
                     {"text", format_instruction(in)}});
        ++p.executed_count;
        ++p.quantum_used;
    };

    try {
        switch (in.op) {
        case Opcode::nop:
            instr_event();
            ++p.pc;
            break;
        case Opcode::set: {
            Resource& r = held(in.res_a);
            admissible(r, "set");
            bounded(r, in.adr_a);
            instr_event();
            r.apply(transforms::store_word("set", in.adr_a, Word(in.literal)));
            ++p.pc;
            break;
        }
        case Opcode::add: {
            Resource& r = held(in.res_a);
            admissible(r, "add");
            bounded(r, in.adr_a);
            bounded(r, in.adr_b);
            r.read(in.adr_a).value();
            r.read(in.adr_b).value();
            instr_event();
            r.apply(transforms::add_words(in.adr_a, in.adr_b));
            ++p.pc;
            break;
        }
        case Opcode::copy: {
            Resource& src = held(in.res_a);
            Resource& dst = held(in.res_b);
            admissible(dst, "copy");
            bounded(src, in.adr_a);
            bounded(dst, in.adr_b);
            Word w = src.read(in.adr_a);
            w.value();
            instr_event();
            dst.apply(transforms::store_word("copy", in.adr_b, w));
            ++p.pc;
            break;
        }
        case Opcode::request: {
            bool declared = std::find(p.r_declared.begin(), p.r_declared.end(),
                                      in.res_a) != p.r_declared.end();
            if (!declared)
                raise(Errc::resource_not_claimed,
                      "process '" + p.pid + "' never declared '" + in.res_a + "'");
            if (p.holds(in.res_a) || sched_.is_processor(in.res_a))
                raise(Errc::already_owned,
                      "process '" + p.pid + "' already holds '" + in.res_a + "'");
            instr_event();
            ++p.pc;
            sched_.request_resource(p, in.res_a, procs_, resources_, trace_, tick_);
            break;
        }
        case Opcode::release: {
            if (sched_.is_processor(in.res_a))
                raise(Errc::processor_not_releasable,
                      "'" + in.res_a + "' is a processor");
            if (!p.holds(in.res_a))
                raise(Errc::not_held,
                      "process '" + p.pid + "' does not hold '" + in.res_a + "'");
            instr_event();
            ++p.pc;
            sched_.release_resource(p, in.res_a, procs_, resources_, trace_, tick_);
            break;
        }
        case Opcode::call: {
            std::size_t entry = p.program.entry(in.label);
            if (p.call_stack.size() >= kCallStackLimit)
                raise(Errc::stack_overflow,
                      "call depth limit of " + std::to_string(kCallStackLimit) +
                          " reached");
            instr_event();
            p.call_stack.push_back(p.pc + 1);
            p.pc = entry;
            break;
        }
        case Opcode::ret: {
            if (p.call_stack.empty())
                raise(Errc::unbalanced_return, "RET with an empty call stack");
            instr_event();
            p.pc = p.call_stack.back();
            p.call_stack.pop_back();
            break;
        }
        case Opcode::transfer: {
            std::size_t entry = p.program.entry(in.label);
            if (in.label == p.activity)
                raise(Errc::self_transfer,
                      "activity '" + in.label + "' transferring to itself");
            instr_event();
            auto saved = p.resume.find(in.label);
            std::size_t target_pc = saved == p.resume.end() ? entry : saved->second;
            p.resume[p.activity] = p.pc + 1;
            trace_.emit(tick_, trace_kind::transfer, p.pid,
                        {{"from", p.activity}, {"to", in.label}, {"resume", target_pc}});
            p.activity = in.label;
            p.pc = target_pc;
            break;
        }
        case Opcode::halt: {
            if (!p.call_stack.empty())
                raise(Errc::unbalanced_return, "HALT inside a procedure");
            instr_event();
            ++p.pc;
            finish_terminated(p, "halt");
            break;
        }
        }
    } catch (const ModelError& e) {
        fault(p, e);
    }
}

bool Engine::all_terminated() const {
    return std::all_of(procs_.begin(), procs_.end(), [](const auto& kv) {
        return kv.second.state == GlobalState::terminated;
    });
}

std::size_t Engine::count_state(GlobalState s) const {
    return static_cast<std::size_t>(
        std::count_if(procs_.begin(), procs_.end(),
                      [s](const auto& kv) { return kv.second.state == s; }));
}

bool Engine::stalled() const {
    return count_state(GlobalState::active) == 0 &&
           count_state(GlobalState::ready) == 0 &&
           count_state(GlobalState::blocked) > 0;
}

RunResult Engine::result(RunReason reason) const {
    RunResult r;
    r.reason = reason;
    r.steps = steps_;
    r.total = procs_.size();
    r.terminated = count_state(GlobalState::terminated);
    r.faulted = static_cast<std::size_t>(
        std::count_if(procs_.begin(), procs_.end(),
                      [](const auto& kv) { return kv.second.faulted; }));
    return r;
}

RunResult Engine::run() {
    if (!admitted_)
        admit_all();
    RunReason reason;
    while (true) {
        if (all_terminated()) {
            reason = RunReason::completed;
            break;
        }
        if (stalled()) {
            reason = RunReason::deadlock;
            break;
        }
        if (steps_ >= max_steps_) {
            reason = RunReason::max_steps;
            break;
        }
        step();
    }
    RunResult r = result(reason);
    trace_.emit(tick_, trace_kind::halt, std::nullopt,
                {{"reason", run_reason_name(r.reason)},
                 {"steps", r.steps},
                 {"terminated", r.terminated},
                 {"total", r.total}});
    return r;
}

std::vector<std::string> Engine::check_invariants() const {
    std::vector<std::string> out;
    auto complain = [&](const std::string& msg) { out.push_back(msg); };

    std::map<std::string, std::string> holder_by_resource;
    std::size_t active = 0;
    for (const auto& [pid, p] : procs_) {
        if (!std::includes(p.r_req.begin(), p.r_req.end(), p.r_alloc.begin(),
                           p.r_alloc.end()))
            complain(pid + ": holds resources outside its claim");
        for (const auto& [rid, init] : p.w_init)
            if (p.r_req.count(rid) == 0)
                complain(pid + ": initial values for unclaimed '" + rid + "'");
        if (p.pc > p.program.size())
            complain(pid + ": pc ran past the program");
        for (const std::string& rid : p.r_alloc) {
            auto [it, fresh] = holder_by_resource.emplace(rid, pid);
            if (!fresh)
                complain("'" + rid + "' held by both " + it->second + " and " + pid);
        }
        if (p.state == GlobalState::created || p.state == GlobalState::terminated)
            continue;
        GlobalState want = classify_state(p, sched_.processors());
        if (want != p.state)
            complain(pid + ": stored state " + global_state_name(p.state) +
                     " but classification says " + global_state_name(want));
        bool has_cpu = p.holds(p.pinned_cpu);
        if ((p.state == GlobalState::active) != has_cpu)
            complain(pid + ": ACTIVE must mean holding the processor");
        if (p.state == GlobalState::active)
            ++active;
        if (has_cpu && !p.pending.empty())
            complain(pid + ": holds a processor while requests are pending");
    }
    if (active > sched_.processors().size())
        complain("more ACTIVE processes than processors");
    for (const auto& [rid, pid] : sched_.holders()) {
        auto it = holder_by_resource.find(rid);
        if (it == holder_by_resource.end() || it->second != pid)
            complain("holder table out of sync for '" + rid + "'");
    }
    for (const auto& [rid, pid] : holder_by_resource)
        if (sched_.holders().count(rid) == 0)
            complain("'" + rid + "' held but missing from the holder table");

    std::uint64_t last_tick = 0;
    for (const TraceEvent& ev : trace_.events()) {
        if (ev.tick < last_tick) {
            complain("trace ticks went backwards");
            break;
        }
        last_tick = ev.tick;
    }
    if (trace_.enabled()) {
        std::map<std::string, std::uint64_t> instr_counts;
        for (const TraceEvent& ev : trace_.events())
            if (ev.kind == trace_kind::instr && ev.pid)
                ++instr_counts[*ev.pid];
        for (const auto& [pid, p] : procs_)
            if (instr_counts[pid] != p.executed_count)
                complain(pid + ": executed_count disagrees with its INSTR events");
    }
    return out;
}

std::string Engine::state_key() const {
    std::ostringstream key;
    for (const auto& [pid, p] : procs_) {
        key << pid << '{' << static_cast<int>(p.state) << ';' << p.pc << ';'
            << p.quantum_used << ';' << p.faulted << ';' << p.activity << ';';
        for (std::size_t r : p.call_stack)
            key << r << ',';
        key << ';';
        for (const auto& [act, pc] : p.resume)
            key << act << '=' << pc << ',';
        key << ';';
        for (const std::string& r : p.r_req)
            key << r << ',';
        key << ';';
        for (const std::string& r : p.r_alloc)
            key << r << ',';
        key << ';';
        for (const std::string& r : p.pending)
            key << r << ',';
        key << '}';
    }
    key << '|';
    for (const auto& [rid, pid] : sched_.holders())
        key << rid << '=' << pid << ',';
    key << '|';
    for (const AllocationRequest& e : sched_.ready_queue())
        key << e.pid << ',';
    key << '|';
    for (const auto& [rid, queue] : sched_.waits()) {
        key << rid << '[';
        for (const AllocationRequest& e : queue)
            key << e.pid << ',';
        key << ']';
    }
    key << '|';
    for (const auto& [rid, r] : resources_.all()) {
        key << rid << '(';
        for (const Word& w : r.snapshot().values)
            key << word_to_string(w) << ',';
        key << ')';
    }
    return key.str();
}

} // namespace osforma
