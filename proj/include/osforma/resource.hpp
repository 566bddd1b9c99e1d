#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "osforma/word.hpp"

namespace osforma {

// Snapshot of one resource's element values at a discrete per-resource tick.
// Addresses are 1-based: address a maps to values[a-1].
struct StateVector {
    std::uint64_t tick = 0;
    std::vector<Word> values;

    const Word& at(std::uint32_t adr) const;

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

// A named, deterministic mapping from a state vector to a state vector of
// identical length. Admissibility is checked by name against the target
// resource's function set.
struct TransformFn {
    std::string name;
    std::function<std::vector<Word>(const std::vector<Word>&)> effect;
};

namespace transforms {

TransformFn identity();
// store_word covers both SET (a literal) and COPY (a word read elsewhere);
// the transform name distinguishes the two for admissibility checks.
TransformFn store_word(const std::string& name, std::uint32_t adr, Word w);
TransformFn add_words(std::uint32_t dst_adr, std::uint32_t src_adr);
TransformFn zero_fill();

} // namespace transforms

// A uniformly structured set of addressed elements: identifier, contiguous
// 1-based address space {1..size}, and the set of admissible transform names.
class Resource {
public:
    Resource(std::string id, std::size_t size, std::set<std::string> func_ids);

    const std::string& id() const noexcept { return id_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::set<std::string>& func_ids() const noexcept { return func_ids_; }
    std::uint64_t tick() const noexcept { return tick_; }

    const Word& read(std::uint32_t adr) const;
    StateVector snapshot() const { return StateVector{tick_, values_}; }

    // Applies an admissible transform, advances this resource's tick, and
    // returns the new snapshot. The transform must preserve vector length.
    StateVector apply(const TransformFn& fn);

    // Allocation reset: overwrites the whole vector without an admissibility
    // check. Used when granting the resource to a process.
    StateVector reset(const std::vector<Word>& initial);

    friend bool operator==(const Resource&, const Resource&) = default;

private:
    std::string id_;
    std::set<std::string> func_ids_;
    std::vector<Word> values_;
    std::uint64_t tick_ = 0;
};

// Global table of every resource in the model; ids are unique across all
// layers. Iteration order is the id order, which keeps everything built on
// top of the table deterministic.
class ResourceTable {
public:
    Resource& make_resource(const std::string& id, std::int64_t size,
                            const std::set<std::string>& func_ids);

    bool contains(const std::string& id) const { return resources_.count(id) != 0; }
    Resource& get(const std::string& id);
    const Resource& get(const std::string& id) const;

    Word read_element(const std::string& id, std::uint32_t adr) const;
    StateVector apply_transform(const std::string& id, const TransformFn& fn);

    const std::map<std::string, Resource>& all() const noexcept { return resources_; }

    friend bool operator==(const ResourceTable&, const ResourceTable&) = default;

private:
    std::map<std::string, Resource> resources_;
};

} // namespace osforma
