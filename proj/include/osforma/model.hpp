#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "osforma/instruction.hpp"

namespace osforma {

struct LayerDecl {
    std::size_t index = 0;
    std::string name;

    friend bool operator==(const LayerDecl&, const LayerDecl&) = default;
};

struct ResourceDecl {
    std::size_t layer = 0;
    std::string id;
    std::int64_t size = 0;
    bool is_cpu = false;
    std::set<std::string> funcs;

    friend bool operator==(const ResourceDecl&, const ResourceDecl&) = default;
};

struct ProcessDecl {
    std::string pid;
    std::vector<std::string> requests;
    Program program;

    friend bool operator==(const ProcessDecl&, const ProcessDecl&) = default;
};

// Fully resolved model: layers, then resources, then processes, exactly the
// declaration order the language enforces.
struct ModelDocument {
    std::string name;
    std::uint32_t quantum = 5;
    std::uint64_t max_steps = 10000;
    std::optional<std::uint64_t> seed;
    std::vector<LayerDecl> layers;
    std::vector<ResourceDecl> resources;
    std::vector<ProcessDecl> processes;

    friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

inline std::set<std::string> processor_ids(const ModelDocument& doc) {
    std::set<std::string> out;
    for (const ResourceDecl& r : doc.resources)
        if (r.is_cpu)
            out.insert(r.id);
    return out;
}

} // namespace osforma
