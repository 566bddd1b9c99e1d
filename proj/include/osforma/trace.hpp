#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osforma/error.hpp"

namespace osforma {

namespace trace_kind {
inline constexpr const char* state_change = "STATE_CHANGE";
inline constexpr const char* instr = "INSTR";
inline constexpr const char* alloc = "ALLOC";
inline constexpr const char* release = "RELEASE";
inline constexpr const char* aggregate = "AGGREGATE";
inline constexpr const char* lift = "LIFT";
inline constexpr const char* service_call = "SERVICE_CALL";
inline constexpr const char* service_return = "SERVICE_RETURN";
inline constexpr const char* transfer = "TRANSFER";
inline constexpr const char* halt = "HALT";
} // namespace trace_kind

struct TraceEvent {
    std::uint64_t tick = 0;
    std::string kind;
    std::optional<std::string> pid;
    nlohmann::ordered_json detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// One JSON object per line, keys always in the order tick, kind, pid, detail.
// Runs over the same model must serialize byte for byte identically.
std::string to_line(const TraceEvent& ev);
TraceEvent from_line(const std::string& line);

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_trace(std::istream& in);

// Event buffer the engine and layer system append to.  Disabled traces drop
// events instead of recording them, which keeps state-space searches cheap.
class Trace {
  public:
    explicit Trace(bool enabled = true) : enabled_(enabled) {}

    void emit(std::uint64_t tick, std::string kind,
              std::optional<std::string> pid = std::nullopt,
              nlohmann::ordered_json detail = nullptr) {
        if (!enabled_)
            return;
        events_.push_back(
            TraceEvent{tick, std::move(kind), std::move(pid), std::move(detail)});
    }

    bool enabled() const { return enabled_; }
    const std::vector<TraceEvent>& events() const { return events_; }

    friend bool operator==(const Trace&, const Trace&) = default;

  private:
    bool enabled_;
    std::vector<TraceEvent> events_;
};

} // namespace osforma
