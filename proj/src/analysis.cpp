#include "osforma/analysis.hpp"

#include <algorithm>
#include <set>

namespace osforma {

namespace {

constexpr std::size_t kCycleCap = 10000;
constexpr std::uint64_t kStateCap = 200000;

struct CycleSearch {
    const std::map<std::string, std::set<std::string>>& edges;
    DeadlockReport& report;
    std::vector<std::string> path;
    std::set<std::string> on_path;
    std::string start;

    // Elementary cycles through `start` using only nodes >= start, so every
    // cycle is found exactly once, rotated to its smallest pid.
    bool walk(const std::string& node) {
        auto it = edges.find(node);
        if (it == edges.end())
            return true;
        for (const std::string& next : it->second) {
            if (next < start)
                continue;
            if (next == start) {
                if (report.cycles.size() >= kCycleCap) {
                    report.truncated = true;
                    return false;
                }
                report.cycles.push_back(path);
                continue;
            }
            if (on_path.count(next) != 0)
                continue;
            path.push_back(next);
            on_path.insert(next);
            bool keep_going = walk(next);
            on_path.erase(next);
            path.pop_back();
            if (!keep_going)
                return false;
        }
        return true;
    }
};

GlobalState state_from_name(const std::string& name) {
    if (name == "CREATED") return GlobalState::created;
    if (name == "READY") return GlobalState::ready;
    if (name == "ACTIVE") return GlobalState::active;
    if (name == "BLOCKED") return GlobalState::blocked;
    if (name == "TERMINATED") return GlobalState::terminated;
    raise(Errc::malformed_trace, "unknown state name '" + name + "'");
}

const std::string& require_pid(const TraceEvent& ev) {
    if (!ev.pid)
        raise(Errc::malformed_trace, ev.kind + " record without a pid");
    return *ev.pid;
}

std::string require_resource(const TraceEvent& ev) {
    if (!ev.detail.is_object() || !ev.detail.contains("resource") ||
        !ev.detail["resource"].is_string())
        raise(Errc::malformed_trace, ev.kind + " record without a resource");
    return ev.detail["resource"].get<std::string>();
}

} // namespace

DeadlockReport detect_deadlock(const ProcessTable& procs) {
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& [pid, p] : procs) {
        for (const std::string& rid : p.pending)
            for (const auto& [qid, q] : procs)
                if (qid != pid && q.holds(rid))
                    edges[pid].insert(qid);
    }

    DeadlockReport report;
    for (const auto& [start, _] : edges) {
        CycleSearch search{edges, report, {start}, {start}, start};
        if (!search.walk(start))
            break;
    }
    std::sort(report.cycles.begin(), report.cycles.end());
    return report;
}

std::vector<CensusRow> state_census(const std::vector<TraceEvent>& events) {
    std::vector<CensusRow> rows;
    if (events.empty())
        return rows;

    std::map<std::string, GlobalState> state_of;
    auto snapshot = [&](std::uint64_t tick) {
        CensusRow row;
        row.tick = tick;
        for (const auto& [pid, s] : state_of) {
            if (s == GlobalState::active) ++row.active;
            else if (s == GlobalState::ready) ++row.ready;
            else if (s == GlobalState::blocked) ++row.blocked;
        }
        return row;
    };

    std::uint64_t current = events.front().tick;
    for (const TraceEvent& ev : events) {
        if (ev.tick < current)
            raise(Errc::malformed_trace, "ticks went backwards at tick " +
                                             std::to_string(ev.tick));
        while (current < ev.tick)
            rows.push_back(snapshot(current++));
        if (ev.kind != trace_kind::state_change)
            continue;
        const std::string& pid = require_pid(ev);
        if (!ev.detail.is_object() || !ev.detail.contains("to") ||
            !ev.detail["to"].is_string())
            raise(Errc::malformed_trace, "STATE_CHANGE record without a target state");
        state_of[pid] = state_from_name(ev.detail["to"].get<std::string>());
    }
    rows.push_back(snapshot(current));
    return rows;
}

ProcessTable replay_final_state(const std::vector<TraceEvent>& events) {
    ProcessTable procs;
    auto ensure = [&](const std::string& pid) -> Process& {
        auto it = procs.find(pid);
        if (it == procs.end()) {
            Process p;
            p.pid = pid;
            it = procs.emplace(pid, std::move(p)).first;
        }
        return it->second;
    };

    std::uint64_t last = 0;
    for (const TraceEvent& ev : events) {
        if (ev.tick < last)
            raise(Errc::malformed_trace, "ticks went backwards at tick " +
                                             std::to_string(ev.tick));
        last = ev.tick;
        if (ev.kind == trace_kind::alloc) {
            Process& p = ensure(require_pid(ev));
            std::string rid = require_resource(ev);
            p.r_alloc.insert(rid);
            p.r_req.insert(rid);
            p.pending.erase(rid);
        } else if (ev.kind == trace_kind::release) {
            Process& p = ensure(require_pid(ev));
            p.r_alloc.erase(require_resource(ev));
        } else if (ev.kind == trace_kind::state_change) {
            Process& p = ensure(require_pid(ev));
            if (!ev.detail.is_object() || !ev.detail.contains("to") ||
                !ev.detail["to"].is_string())
                raise(Errc::malformed_trace, "STATE_CHANGE record without a target state");
            p.state = state_from_name(ev.detail["to"].get<std::string>());
            if (p.state == GlobalState::blocked) {
                p.pending.clear();
                if (ev.detail.contains("waiting")) {
                    if (!ev.detail["waiting"].is_array())
                        raise(Errc::malformed_trace, "waiting list is not an array");
                    for (const auto& item : ev.detail["waiting"]) {
                        if (!item.is_string())
                            raise(Errc::malformed_trace, "waiting list holds a non-string");
                        p.pending.insert(item.get<std::string>());
                    }
                }
            } else if (p.state == GlobalState::terminated) {
                p.pending.clear();
                p.r_alloc.clear();
            } else {
                p.pending.clear();
            }
        }
    }
    return procs;
}

ReachabilityReport brute_force_reachability(const ModelDocument& doc,
                                            const EngineConfig& cfg) {
    if (doc.processes.size() > 3)
        raise(Errc::model_too_large, "search is limited to 3 processes");
    if (doc.resources.size() > 4)
        raise(Errc::model_too_large, "search is limited to 4 resources");
    std::size_t instructions = 0;
    for (const ProcessDecl& p : doc.processes)
        instructions += p.program.size();
    if (instructions > 20)
        raise(Errc::model_too_large, "search is limited to 20 instructions total");

    EngineConfig quiet = cfg;
    quiet.emit_trace = false;
    Engine root = Engine::build(doc, quiet);
    root.admit_all();

    ReachabilityReport report;
    std::set<std::string> visited;
    std::vector<Engine> work;
    work.push_back(std::move(root));

    while (!work.empty()) {
        Engine e = std::move(work.back());
        work.pop_back();
        if (!visited.insert(e.state_key()).second)
            continue;
        if (++report.states_explored > kStateCap)
            raise(Errc::model_too_large, "state space exceeds the search cap");
        report.max_active = std::max(report.max_active, e.count_state(GlobalState::active));
        report.max_ready = std::max(report.max_ready, e.count_state(GlobalState::ready));
        report.max_blocked = std::max(report.max_blocked, e.count_state(GlobalState::blocked));
        if (e.all_terminated())
            continue;
        if (e.stalled()) {
            report.deadlock_reachable = true;
            continue;
        }

        // One branch per way of handing each free processor to one of the
        // ready processes pinned to it.  No processor idles while it has a
        // candidate; with no candidates anywhere the step still runs.
        std::vector<std::vector<std::string>> lists;
        for (auto& [cpu, pids] : e.dispatch_options())
            lists.push_back(std::move(pids));

        std::vector<std::size_t> idx(lists.size(), 0);
        while (true) {
            std::vector<std::string> pick;
            pick.reserve(lists.size());
            for (std::size_t i = 0; i < lists.size(); ++i)
                pick.push_back(lists[i][idx[i]]);
            Engine child = e;
            child.begin_step();
            child.dispatch_to(pick);
            child.finish_step();
            work.push_back(std::move(child));

            std::size_t pos = 0;
            while (pos < idx.size() && ++idx[pos] == lists[pos].size())
                idx[pos++] = 0;
            if (pos == idx.size())
                break;
        }
    }
    return report;
}

} // namespace osforma
