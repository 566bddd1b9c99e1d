#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "osforma/resource.hpp"
#include "osforma/trace.hpp"

namespace osforma {

// Service relations between adjacent layers.  USES points one layer down
// (an activity runs on the services beneath it), CONTROLS one layer up (a
// layer drives the abstraction built directly above it).
enum class ServiceKind { uses, controls };

const char* service_kind_name(ServiceKind) noexcept;

struct Layer {
    std::size_t index = 0;
    std::string name;
    std::set<std::string> resources;
    std::set<std::string> interface;

    friend bool operator==(const Layer&, const Layer&) = default;
};

enum class AggregationLifetime { live, expired };

struct ControlAggregation {
    std::string agg_id;
    std::size_t layer_index = 0;
    std::set<std::string> member_ids;
    std::string former;
    AggregationLifetime lifetime = AggregationLifetime::live;

    friend bool operator==(const ControlAggregation&, const ControlAggregation&)
        = default;
};

// Layers partition the resource set: each resource is owned by exactly one
// layer, indices run 0 upward with no gaps, layer 0 is the hardware floor.
// Activities are formed out of one layer's resources by a service registered
// one layer below; lifting welds a member set into a single new resource one
// layer above it.
class LayerSystem {
  public:
    LayerSystem() : LayerSystem(1, {"hw"}) {}
    LayerSystem(std::size_t layer_count, const std::vector<std::string>& names);

    std::size_t layer_count() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const;
    std::optional<std::size_t> layer_of(const std::string& id) const;

    void assign_resource(std::size_t layer, const std::string& id);

    // Candidate control aggregations are the subsets of one layer's resource
    // set; the count is exact and overflow is refused rather than wrapped.
    std::uint64_t count_candidate_aggregations(std::size_t layer) const;
    std::vector<std::set<std::string>>
    enumerate_candidate_aggregations(std::size_t layer) const;

    // A former registered at layer i serves activity formation for layer
    // i + 1; a lifter registered at layer i spans i and i + 1.  Names are
    // unique across both kinds and join the providing layer's interface.
    void register_activity_former(std::size_t caller_layer, const std::string& name);
    void register_lifter(std::size_t source_layer, const std::string& name);

    // Binds members of target_layer into a live aggregation through the
    // g service sitting one layer below.  The target layer is the service
    // user, so the trace records a downward USES edge.
    const ControlAggregation& form_activity(std::size_t caller_layer,
                                            std::size_t target_layer,
                                            const std::set<std::string>& members,
                                            const std::string& g_name);

    void expire_aggregation(const std::string& agg_id);

    // Creates the layer-(source+1) resource composed from layer-source
    // members: its size is the member total, its transform set the member
    // union.  Members stay put and are recorded as the substrate.
    std::string lift_resource(std::size_t source_layer,
                              const std::set<std::string>& members,
                              const std::string& new_id,
                              const std::string& f_name,
                              ResourceTable& table);

    const std::map<std::string, ControlAggregation>& aggregations() const {
        return aggregations_;
    }
    const std::map<std::string, std::vector<std::string>>& substrates() const {
        return substrate_;
    }
    const std::vector<TraceEvent>& events() const { return trace_.events(); }

    friend bool operator==(const LayerSystem&, const LayerSystem&) = default;

  private:
    void check_layer(std::size_t i) const;

    std::vector<Layer> layers_;
    std::map<std::string, std::size_t> locus_;
    std::map<std::string, std::size_t> formers_;
    std::map<std::string, std::size_t> lifters_;
    std::map<std::string, ControlAggregation> aggregations_;
    std::set<std::string> busy_;
    std::map<std::string, std::vector<std::string>> substrate_;
    std::uint64_t next_id_ = 0;
    std::uint64_t tick_ = 0;
    Trace trace_;
};

struct HierarchyViolation {
    std::size_t event_index = 0;
    std::string message;

    friend bool operator==(const HierarchyViolation&, const HierarchyViolation&)
        = default;
};

// Checks that every service edge in a trace connects adjacent layers in the
// right direction and that calls and returns bracket properly.
std::vector<HierarchyViolation>
validate_service_hierarchy(const std::vector<TraceEvent>& events);

} // namespace osforma
