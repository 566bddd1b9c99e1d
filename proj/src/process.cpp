#include "osforma/process.hpp"

namespace osforma {

const char* global_state_name(GlobalState s) noexcept {
    switch (s) {
    case GlobalState::created: return "CREATED";
    case GlobalState::ready: return "READY";
    case GlobalState::active: return "ACTIVE";
    case GlobalState::blocked: return "BLOCKED";
    case GlobalState::terminated: return "TERMINATED";
    }
    return "?";
}

Process make_process(std::string pid,
                     const std::vector<std::string>& requests,
                     Program program,
                     const ResourceTable& table,
                     const std::set<std::string>& processors) {
    if (pid.empty())
        raise(Errc::duplicate_id, "process id must not be empty");
    if (program.empty())
        raise(Errc::empty_program, "process '" + pid + "' has no instructions");

    Process p;
    p.pid = std::move(pid);
    p.program = std::move(program);

    std::size_t cpus = 0;
    for (const std::string& id : requests) {
        if (!table.contains(id))
            raise(Errc::unknown_resource,
                  "process '" + p.pid + "' requests unknown resource '" + id + "'");
        if (!p.r_req.insert(id).second)
            raise(Errc::duplicate_id,
                  "process '" + p.pid + "' requests '" + id + "' twice");
        p.r_declared.push_back(id);
        p.w_init.emplace(id, zero_words(table.get(id).size()));
        if (processors.count(id) != 0) {
            ++cpus;
            p.pinned_cpu = id;
        }
    }
    if (cpus != 1)
        raise(Errc::count_mismatch,
              "process '" + p.pid + "' must claim exactly one processor, claims " +
                  std::to_string(cpus));
    return p;
}

void add_process(ProcessTable& table, Process p) {
    std::string pid = p.pid;
    if (!table.emplace(pid, std::move(p)).second)
        raise(Errc::duplicate_id, "duplicate process id '" + pid + "'");
}

} // namespace osforma
