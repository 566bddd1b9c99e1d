#include "osforma/scheduler.hpp"

#include <algorithm>

namespace osforma {

GlobalState classify_state(const Process& p, const std::set<std::string>& processors) {
    if (p.state == GlobalState::created || p.state == GlobalState::terminated)
        raise(Errc::not_live, "process '" + p.pid + "' is " + global_state_name(p.state));
    std::vector<std::string> missing;
    std::set_difference(p.r_req.begin(), p.r_req.end(), p.r_alloc.begin(),
                        p.r_alloc.end(), std::back_inserter(missing));
    if (missing.empty())
        return GlobalState::active;
    if (missing.size() == 1 && processors.count(missing.front()) != 0)
        return GlobalState::ready;
    return GlobalState::blocked;
}

void Scheduler::add_processor(const std::string& id) {
    if (!processors_.insert(id).second)
        raise(Errc::duplicate_id, "processor '" + id + "' added twice");
}

void Scheduler::enqueue_ready(Process& p, std::uint64_t tick) {
    ready_.push_back(AllocationRequest{tick, p.pid, p.pinned_cpu});
}

void Scheduler::state_change(Process& p, GlobalState to, const char* reason,
                             Trace& tr, std::uint64_t tick) {
    nlohmann::ordered_json detail;
    detail["from"] = global_state_name(p.state);
    detail["to"] = global_state_name(to);
    detail["reason"] = reason;
    if (to == GlobalState::blocked)
        detail["waiting"] = p.pending;
    p.state = to;
    tr.emit(tick, trace_kind::state_change, p.pid, std::move(detail));
}

void Scheduler::grant(Process& p, const std::string& id, ResourceTable& res,
                      Trace& tr, std::uint64_t tick) {
    holders_[id] = p.pid;
    p.r_alloc.insert(id);
    // A fresh holder never sees the previous owner's words.
    auto wit = p.w_init.find(id);
    res.get(id).reset(wit != p.w_init.end() ? wit->second
                                            : zero_words(res.get(id).size()));
    tr.emit(tick, trace_kind::alloc, p.pid, {{"resource", id}});
}

void Scheduler::admit(Process& p, ResourceTable& res, Trace& tr, std::uint64_t tick) {
    if (p.state != GlobalState::created)
        raise(Errc::not_live, "process '" + p.pid + "' admitted twice");
    for (const std::string& id : p.r_declared) {
        if (is_processor(id))
            continue;
        if (holders_.count(id) == 0) {
            grant(p, id, res, tr, tick);
        } else {
            p.pending.insert(id);
            waits_[id].push_back(AllocationRequest{tick, p.pid, id});
        }
    }
    if (p.pending.empty()) {
        state_change(p, GlobalState::ready, "admit", tr, tick);
        enqueue_ready(p, tick);
    } else {
        state_change(p, GlobalState::blocked, "admit", tr, tick);
    }
}

std::map<std::string, std::vector<std::string>>
Scheduler::dispatch_candidates(const ProcessTable& procs) const {
    std::map<std::string, std::vector<std::string>> out;
    for (const AllocationRequest& entry : ready_) {
        const Process& p = procs.at(entry.pid);
        if (holders_.count(p.pinned_cpu) == 0)
            out[p.pinned_cpu].push_back(p.pid);
    }
    return out;
}

void Scheduler::dispatch_one(Process& p, Trace& tr, std::uint64_t tick) {
    auto it = std::find_if(ready_.begin(), ready_.end(),
                           [&](const AllocationRequest& e) { return e.pid == p.pid; });
    if (it == ready_.end())
        raise(Errc::not_live, "process '" + p.pid + "' is not queued");
    if (holders_.count(p.pinned_cpu) != 0)
        raise(Errc::already_owned, "processor '" + p.pinned_cpu + "' is busy");
    ready_.erase(it);
    holders_[p.pinned_cpu] = p.pid;
    p.r_alloc.insert(p.pinned_cpu);
    p.quantum_used = 0;
    tr.emit(tick, trace_kind::alloc, p.pid, {{"resource", p.pinned_cpu}});
    state_change(p, GlobalState::active, "dispatch", tr, tick);
}

std::vector<std::string> Scheduler::dispatch(ProcessTable& procs, Trace& tr,
                                             std::uint64_t tick) {
    std::vector<std::string> dispatched;
    for (std::size_t i = 0; i < ready_.size();) {
        Process& p = procs.at(ready_[i].pid);
        if (holders_.count(p.pinned_cpu) != 0) {
            ++i;
            continue;
        }
        ready_.erase(ready_.begin() + static_cast<std::ptrdiff_t>(i));
        holders_[p.pinned_cpu] = p.pid;
        p.r_alloc.insert(p.pinned_cpu);
        p.quantum_used = 0;
        tr.emit(tick, trace_kind::alloc, p.pid, {{"resource", p.pinned_cpu}});
        state_change(p, GlobalState::active, "dispatch", tr, tick);
        dispatched.push_back(p.pid);
    }
    return dispatched;
}

bool Scheduler::request_resource(Process& p, const std::string& id,
                                 ProcessTable& procs, ResourceTable& res,
                                 Trace& tr, std::uint64_t tick) {
    (void)procs;
    bool declared = std::find(p.r_declared.begin(), p.r_declared.end(), id) !=
                    p.r_declared.end();
    if (!declared)
        raise(Errc::resource_not_claimed,
              "process '" + p.pid + "' never declared '" + id + "'");
    if (p.holds(id) || is_processor(id))
        raise(Errc::already_owned,
              "process '" + p.pid + "' already holds '" + id + "'");

    p.r_req.insert(id);
    p.w_init.emplace(id, zero_words(res.get(id).size()));
    if (holders_.count(id) == 0) {
        grant(p, id, res, tr, tick);
        return true;
    }
    p.pending.insert(id);
    waits_[id].push_back(AllocationRequest{tick, p.pid, id});
    // Blocking costs the processor.
    holders_.erase(p.pinned_cpu);
    p.r_alloc.erase(p.pinned_cpu);
    tr.emit(tick, trace_kind::release, p.pid, {{"resource", p.pinned_cpu}});
    state_change(p, GlobalState::blocked, "blocked", tr, tick);
    return false;
}

void Scheduler::grant_next_waiter(const std::string& id, ProcessTable& procs,
                                  ResourceTable& res, Trace& tr,
                                  std::uint64_t tick) {
    auto it = waits_.find(id);
    if (it == waits_.end() || it->second.empty())
        return;
    // Longest wait first; equal ticks fall back to pid order.
    auto next = std::min_element(it->second.begin(), it->second.end(),
                                 [](const AllocationRequest& a, const AllocationRequest& b) {
                                     return std::tie(a.tick, a.pid) < std::tie(b.tick, b.pid);
                                 });
    std::string wpid = next->pid;
    it->second.erase(next);
    if (it->second.empty())
        waits_.erase(it);

    Process& w = procs.at(wpid);
    grant(w, id, res, tr, tick);
    w.pending.erase(id);
    if (w.pending.empty()) {
        state_change(w, GlobalState::ready, "granted", tr, tick);
        enqueue_ready(w, tick);
    }
}

void Scheduler::release_resource(Process& p, const std::string& id,
                                 ProcessTable& procs, ResourceTable& res,
                                 Trace& tr, std::uint64_t tick) {
    if (is_processor(id))
        raise(Errc::processor_not_releasable,
              "'" + id + "' is a processor and cannot be released explicitly");
    if (!p.holds(id))
        raise(Errc::not_held, "process '" + p.pid + "' does not hold '" + id + "'");
    p.r_alloc.erase(id);
    p.r_req.erase(id);
    p.w_init.erase(id);
    holders_.erase(id);
    tr.emit(tick, trace_kind::release, p.pid, {{"resource", id}});
    grant_next_waiter(id, procs, res, tr, tick);
}

void Scheduler::preempt(Process& p, Trace& tr, std::uint64_t tick) {
    if (p.state != GlobalState::active)
        raise(Errc::not_active, "process '" + p.pid + "' is not running");
    holders_.erase(p.pinned_cpu);
    p.r_alloc.erase(p.pinned_cpu);
    p.quantum_used = 0;
    tr.emit(tick, trace_kind::release, p.pid, {{"resource", p.pinned_cpu}});
    state_change(p, GlobalState::ready, "quantum", tr, tick);
    enqueue_ready(p, tick);
}

void Scheduler::terminate(Process& p, const std::string& reason,
                          ProcessTable& procs, ResourceTable& res, Trace& tr,
                          std::uint64_t tick) {
    std::set<std::string> held = p.r_alloc;
    for (const std::string& id : held) {
        p.r_alloc.erase(id);
        holders_.erase(id);
        tr.emit(tick, trace_kind::release, p.pid, {{"resource", id}});
        if (!is_processor(id))
            grant_next_waiter(id, procs, res, tr, tick);
    }
    std::erase_if(ready_, [&](const AllocationRequest& e) { return e.pid == p.pid; });
    for (auto it = waits_.begin(); it != waits_.end();) {
        std::erase_if(it->second,
                      [&](const AllocationRequest& e) { return e.pid == p.pid; });
        it = it->second.empty() ? waits_.erase(it) : std::next(it);
    }
    p.pending.clear();
    state_change(p, GlobalState::terminated, reason.c_str(), tr, tick);
}

} // namespace osforma
