#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osforma/layer.hpp"
#include "osforma/model.hpp"
#include "osforma/scheduler.hpp"

namespace osforma {

struct EngineConfig {
    std::optional<std::uint32_t> quantum;
    std::optional<std::uint64_t> max_steps;
    std::uint32_t scratch_words = 8;
    bool emit_trace = true;
};

enum class RunReason { completed, max_steps, deadlock };

const char* run_reason_name(RunReason) noexcept;

struct RunResult {
    RunReason reason = RunReason::completed;
    std::uint64_t steps = 0;
    std::size_t terminated = 0;
    std::size_t total = 0;
    std::size_t faulted = 0;

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

std::string run_summary(const RunResult& r);

// Deterministic lockstep executor.  A step is: advance the clock, hand free
// processors to the ready queue, let every running process execute one
// instruction in pid order, then preempt the ones whose quantum expired.
// Engines are plain values; copying one forks the whole simulation, which is
// what the interleaving search in the analysis module does.
class Engine {
  public:
    static Engine build(const ModelDocument& doc, const EngineConfig& cfg = {});

    void admit_all();
    void step();
    RunResult run();

    // The three phases of step(), split out so a search can pick which ready
    // process each free processor goes to.
    void begin_step();
    std::map<std::string, std::vector<std::string>> dispatch_options() const;
    void dispatch_to(const std::vector<std::string>& pids);
    void finish_step();

    bool all_terminated() const;
    bool stalled() const;
    std::size_t count_state(GlobalState s) const;
    RunResult result(RunReason reason) const;

    std::uint64_t global_tick() const { return tick_; }
    std::uint64_t steps_taken() const { return steps_; }
    std::uint32_t quantum() const { return quantum_; }
    std::uint64_t max_steps() const { return max_steps_; }
    const ProcessTable& processes() const { return procs_; }
    const ResourceTable& resources() const { return resources_; }
    const Scheduler& scheduler() const { return sched_; }
    const LayerSystem& layers() const { return layers_; }
    const std::vector<TraceEvent>& events() const { return trace_.events(); }

    // Empty when every runtime invariant holds; each entry names a breach.
    std::vector<std::string> check_invariants() const;

    // Canonical fingerprint of everything that can influence future behavior.
    // Clock values and event history are deliberately excluded.
    std::string state_key() const;

    friend bool operator==(const Engine&, const Engine&) = default;

  private:
    void execute_one(Process& p);
    void finish_terminated(Process& p, const char* reason);
    void fault(Process& p, const ModelError& e);

    std::uint64_t tick_ = 0;
    std::uint64_t steps_ = 0;
    std::uint32_t quantum_ = 5;
    std::uint64_t max_steps_ = 10000;
    bool admitted_ = false;
    std::vector<std::string> admit_order_;
    ResourceTable resources_;
    ProcessTable procs_;
    Scheduler sched_;
    LayerSystem layers_;
    Trace trace_;
};

} // namespace osforma
