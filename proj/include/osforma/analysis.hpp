#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osforma/engine.hpp"

namespace osforma {

struct DeadlockReport {
    // Each cycle starts at its smallest pid; the list is sorted.
    std::vector<std::vector<std::string>> cycles;
    bool truncated = false;

    bool deadlocked() const { return !cycles.empty(); }

    friend bool operator==(const DeadlockReport&, const DeadlockReport&) = default;
};

// Wait-for graph over the snapshot: p waits on q when a resource pending for
// p is held by q.  Returns every elementary cycle, capped at 10000 with the
// truncated flag set.  A snapshot with nothing pending yields no cycles.
DeadlockReport detect_deadlock(const ProcessTable& procs);

struct CensusRow {
    std::uint64_t tick = 0;
    std::size_t active = 0;
    std::size_t ready = 0;
    std::size_t blocked = 0;

    friend bool operator==(const CensusRow&, const CensusRow&) = default;
};

// One row per tick from the first event to the last, counts carried forward
// across event-less ticks.  Raises MalformedTrace when ticks go backwards or
// a STATE_CHANGE record is ill-shaped.
std::vector<CensusRow> state_census(const std::vector<TraceEvent>& events);

// Rebuilds holdings, waits, and states from a trace: enough of a process
// table for detect_deadlock.  Programs and claims are not reconstructed.
ProcessTable replay_final_state(const std::vector<TraceEvent>& events);

struct ReachabilityReport {
    bool deadlock_reachable = false;
    std::uint64_t states_explored = 0;
    std::size_t max_active = 0;
    std::size_t max_ready = 0;
    std::size_t max_blocked = 0;

    friend bool operator==(const ReachabilityReport&, const ReachabilityReport&) = default;
};

// Exhaustive search over every dispatch choice the scheduler could make, via
// depth-first search with visited-state deduplication.  Small models only:
// more than 3 processes, 4 resources, or 20 instructions total raises
// ModelTooLarge, as does a state space past 200000 states.
ReachabilityReport brute_force_reachability(const ModelDocument& doc,
                                            const EngineConfig& cfg = {});

} // namespace osforma
