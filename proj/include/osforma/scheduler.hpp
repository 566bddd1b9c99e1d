#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "osforma/process.hpp"
#include "osforma/trace.hpp"

namespace osforma {

// Pure classification over the claim arithmetic: ACTIVE holds everything it
// claims, READY is short exactly one processor, anything else outstanding is
// BLOCKED.  Only live processes classify; CREATED and TERMINATED do not.
GlobalState classify_state(const Process& p, const std::set<std::string>& processors);

struct AllocationRequest {
    std::uint64_t tick = 0;
    std::string pid;
    std::string resource_id;

    friend bool operator==(const AllocationRequest&, const AllocationRequest&) = default;
};

// Allocation discipline: plain resources are granted at admission or on
// REQUEST, processors only through dispatch and always revoked the moment a
// process blocks or is preempted.  Waiters are served in arrival order.
class Scheduler {
  public:
    void add_processor(const std::string& id);
    bool is_processor(const std::string& id) const { return processors_.count(id) != 0; }
    const std::set<std::string>& processors() const { return processors_; }

    const std::map<std::string, std::string>& holders() const { return holders_; }
    const std::vector<AllocationRequest>& ready_queue() const { return ready_; }
    const std::map<std::string, std::vector<AllocationRequest>>& waits() const { return waits_; }

    // Grants every plain resource in the claim that is currently free; the
    // rest become pending.  Leaves the process READY or BLOCKED.
    void admit(Process& p, ResourceTable& res, Trace& tr, std::uint64_t tick);

    // Free processors mapped to the ready processes pinned to them, in queue
    // order.  Every entry is a legal dispatch_one target.
    std::map<std::string, std::vector<std::string>>
    dispatch_candidates(const ProcessTable& procs) const;

    void dispatch_one(Process& p, Trace& tr, std::uint64_t tick);

    // First-fit over the ready queue: earliest entry whose pinned processor
    // is free wins it.  Returns the pids dispatched this call.
    std::vector<std::string> dispatch(ProcessTable& procs, Trace& tr, std::uint64_t tick);

    // REQUEST semantics.  Returns true when granted in place; false means the
    // process gave up its processor and now waits.  Raises ResourceNotClaimed
    // for resources outside the declared universe and AlreadyOwned for
    // resources already held (processors are always already held).
    bool request_resource(Process& p, const std::string& id, ProcessTable& procs,
                          ResourceTable& res, Trace& tr, std::uint64_t tick);

    // RELEASE semantics: drops the resource from both the holding and the
    // claim, then hands it to the oldest waiter, if any.  Raises NotHeld and
    // ProcessorNotReleasable.
    void release_resource(Process& p, const std::string& id, ProcessTable& procs,
                          ResourceTable& res, Trace& tr, std::uint64_t tick);

    // Quantum expiry: processor back to the pool, process to the queue tail.
    void preempt(Process& p, Trace& tr, std::uint64_t tick);

    // Releases everything held, serves waiters, and records the final state
    // change with the given reason.
    void terminate(Process& p, const std::string& reason, ProcessTable& procs,
                   ResourceTable& res, Trace& tr, std::uint64_t tick);

    friend bool operator==(const Scheduler&, const Scheduler&) = default;

  private:
    void enqueue_ready(Process& p, std::uint64_t tick);
    void grant(Process& p, const std::string& id, ResourceTable& res, Trace& tr,
               std::uint64_t tick);
    void grant_next_waiter(const std::string& id, ProcessTable& procs,
                           ResourceTable& res, Trace& tr, std::uint64_t tick);
    void state_change(Process& p, GlobalState to, const char* reason, Trace& tr,
                      std::uint64_t tick);

    std::set<std::string> processors_;
    std::map<std::string, std::string> holders_;
    std::vector<AllocationRequest> ready_;
    std::map<std::string, std::vector<AllocationRequest>> waits_;
};

} // namespace osforma
