#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "osforma/instruction.hpp"
#include "osforma/resource.hpp"

namespace osforma {

enum class GlobalState { created, ready, active, blocked, terminated };

const char* global_state_name(GlobalState) noexcept;

// A process is a claim on resources plus a program over them.  r_declared is
// the static universe the program may ever touch; r_req is the live claim and
// shrinks on RELEASE, grows back on REQUEST.  Invariant: r_alloc and pending
// are disjoint subsets of r_req, which is a subset of r_declared, and w_init
// keys track r_req exactly.
struct Process {
    std::string pid;
    std::vector<std::string> r_declared;
    std::set<std::string> r_req;
    std::set<std::string> r_alloc;
    std::set<std::string> pending;
    std::map<std::string, std::vector<Word>> w_init;
    Program program;
    std::string pinned_cpu;
    GlobalState state = GlobalState::created;

    std::size_t pc = 0;
    std::uint64_t executed_count = 0;
    std::uint32_t quantum_used = 0;

    // transfer() bookkeeping: "" is the root activity, resume holds the pc
    // each suspended activity continues from.
    std::string activity;
    std::map<std::string, std::size_t> resume;
    std::vector<std::size_t> call_stack;

    bool faulted = false;
    std::string fault;

    bool holds(const std::string& id) const { return r_alloc.count(id) != 0; }
    bool claims(const std::string& id) const { return r_req.count(id) != 0; }

    friend bool operator==(const Process&, const Process&) = default;
};

// Builds a process in the CREATED state.  requests keeps its textual order and
// must name known resources, contain no duplicates, and include exactly one
// member of processors, which becomes the pin.
Process make_process(std::string pid,
                     const std::vector<std::string>& requests,
                     Program program,
                     const ResourceTable& table,
                     const std::set<std::string>& processors);

using ProcessTable = std::map<std::string, Process>;

void add_process(ProcessTable& table, Process p);

} // namespace osforma
