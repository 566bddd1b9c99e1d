#include "osforma/trace.hpp"

#include <istream>
#include <ostream>

namespace osforma {

std::string to_line(const TraceEvent& ev) {
    nlohmann::ordered_json j;
    j["tick"] = ev.tick;
    j["kind"] = ev.kind;
    if (ev.pid)
        j["pid"] = *ev.pid;
    if (!ev.detail.is_null())
        j["detail"] = ev.detail;
    return j.dump();
}

TraceEvent from_line(const std::string& line) {
    nlohmann::ordered_json j =
        nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        raise(Errc::malformed_trace, "not a JSON object: " + line);
    if (!j.contains("tick") || !j["tick"].is_number_unsigned())
        raise(Errc::malformed_trace, "missing numeric tick: " + line);
    if (!j.contains("kind") || !j["kind"].is_string())
        raise(Errc::malformed_trace, "missing kind: " + line);
    TraceEvent ev;
    ev.tick = j["tick"].get<std::uint64_t>();
    ev.kind = j["kind"].get<std::string>();
    if (j.contains("pid")) {
        if (!j["pid"].is_string())
            raise(Errc::malformed_trace, "pid must be a string: " + line);
        ev.pid = j["pid"].get<std::string>();
    }
    if (j.contains("detail"))
        ev.detail = j["detail"];
    return ev;
}

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events) {
    for (const TraceEvent& ev : events)
        out << to_line(ev) << '\n';
}

std::vector<TraceEvent> read_trace(std::istream& in) {
    std::vector<TraceEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        events.push_back(from_line(line));
    }
    return events;
}

} // namespace osforma
