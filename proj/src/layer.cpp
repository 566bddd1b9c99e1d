#include "osforma/layer.hpp"

#include <algorithm>

namespace osforma {

const char* service_kind_name(ServiceKind k) noexcept {
    return k == ServiceKind::uses ? "USES" : "CONTROLS";
}

LayerSystem::LayerSystem(std::size_t layer_count,
                         const std::vector<std::string>& names) {
    if (layer_count == 0)
        raise(Errc::count_mismatch, "a layer system needs at least one layer");
    if (names.size() != layer_count)
        raise(Errc::count_mismatch, std::to_string(layer_count) + " layers need " +
                                        std::to_string(layer_count) + " names, got " +
                                        std::to_string(names.size()));
    layers_.resize(layer_count);
    for (std::size_t i = 0; i < layer_count; ++i) {
        layers_[i].index = i;
        layers_[i].name = names[i];
    }
}

void LayerSystem::check_layer(std::size_t i) const {
    if (i >= layers_.size())
        raise(Errc::unknown_layer, "no layer " + std::to_string(i) + " in a " +
                                       std::to_string(layers_.size()) +
                                       " layer system");
}

const Layer& LayerSystem::layer(std::size_t i) const {
    check_layer(i);
    return layers_[i];
}

std::optional<std::size_t> LayerSystem::layer_of(const std::string& id) const {
    auto it = locus_.find(id);
    if (it == locus_.end())
        return std::nullopt;
    return it->second;
}

void LayerSystem::assign_resource(std::size_t layer, const std::string& id) {
    check_layer(layer);
    auto it = locus_.find(id);
    if (it != locus_.end())
        raise(Errc::already_owned, "resource '" + id + "' already sits in layer " +
                                       std::to_string(it->second));
    locus_.emplace(id, layer);
    layers_[layer].resources.insert(id);
}

std::uint64_t LayerSystem::count_candidate_aggregations(std::size_t layer) const {
    check_layer(layer);
    std::size_t n = layers_[layer].resources.size();
    if (n > 62)
        raise(Errc::overflow, "2^" + std::to_string(n) + " aggregations do not fit");
    return std::uint64_t{1} << n;
}

std::vector<std::set<std::string>>
LayerSystem::enumerate_candidate_aggregations(std::size_t layer) const {
    check_layer(layer);
    const auto& members = layers_[layer].resources;
    if (members.size() > 20)
        raise(Errc::model_too_large,
              "refusing to enumerate 2^" + std::to_string(members.size()) + " subsets");
    std::vector<std::string> order(members.begin(), members.end());
    std::vector<std::set<std::string>> out;
    std::uint64_t total = std::uint64_t{1} << order.size();
    out.reserve(total);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::set<std::string> subset;
        for (std::size_t bit = 0; bit < order.size(); ++bit)
            if (mask & (std::uint64_t{1} << bit))
                subset.insert(order[bit]);
        out.push_back(std::move(subset));
    }
    return out;
}

void LayerSystem::register_activity_former(std::size_t caller_layer,
                                           const std::string& name) {
    check_layer(caller_layer);
    if (caller_layer + 1 == layers_.size())
        raise(Errc::top_layer,
              "layer " + std::to_string(caller_layer) + " has no layer above to form for");
    if (formers_.count(name) != 0 || lifters_.count(name) != 0)
        raise(Errc::duplicate_id, "service '" + name + "' registered twice");
    formers_.emplace(name, caller_layer);
    layers_[caller_layer].interface.insert(name);
}

void LayerSystem::register_lifter(std::size_t source_layer, const std::string& name) {
    check_layer(source_layer);
    if (source_layer + 1 == layers_.size())
        raise(Errc::top_layer,
              "layer " + std::to_string(source_layer) + " has no layer above");
    if (formers_.count(name) != 0 || lifters_.count(name) != 0)
        raise(Errc::duplicate_id, "service '" + name + "' registered twice");
    lifters_.emplace(name, source_layer);
    layers_[source_layer].interface.insert(name);
}

const ControlAggregation&
LayerSystem::form_activity(std::size_t caller_layer, std::size_t target_layer,
                           const std::set<std::string>& members,
                           const std::string& g_name) {
    check_layer(target_layer);
    if (target_layer == 0)
        raise(Errc::wrong_locus, "layer 0 activities have no layer beneath them");
    if (caller_layer + 1 != target_layer)
        raise(Errc::wrong_locus, "former must sit at layer " +
                                     std::to_string(target_layer - 1) + ", called from " +
                                     std::to_string(caller_layer));
    auto fit = formers_.find(g_name);
    if (fit == formers_.end() || fit->second != caller_layer)
        raise(Errc::unregistered_function,
              "no activity former '" + g_name + "' at layer " +
                  std::to_string(caller_layer));
    for (const std::string& id : members) {
        auto lit = locus_.find(id);
        if (lit == locus_.end() || lit->second != target_layer)
            raise(Errc::not_owned,
                  "resource '" + id + "' is not owned by layer " +
                      std::to_string(target_layer));
        if (busy_.count(id) != 0)
            raise(Errc::busy_member, "resource '" + id + "' is already aggregated");
    }

    std::string agg_id = "agg" + std::to_string(next_id_++);
    for (const std::string& id : members)
        busy_.insert(id);
    auto [it, inserted] = aggregations_.emplace(
        agg_id, ControlAggregation{agg_id, target_layer, members, g_name,
                                   AggregationLifetime::live});

    // The target layer consumes the forming service beneath it.
    std::uint64_t t = tick_++;
    nlohmann::ordered_json edge{{"kind", service_kind_name(ServiceKind::uses)},
                                {"from", target_layer},
                                {"to", caller_layer},
                                {"service", g_name}};
    trace_.emit(t, trace_kind::service_call, std::nullopt, edge);
    trace_.emit(t, trace_kind::aggregate, std::nullopt,
                {{"aggregation", agg_id},
                 {"layer", target_layer},
                 {"members", members}});
    trace_.emit(t, trace_kind::service_return, std::nullopt, edge);
    return it->second;
}

void LayerSystem::expire_aggregation(const std::string& agg_id) {
    auto it = aggregations_.find(agg_id);
    if (it == aggregations_.end() ||
        it->second.lifetime == AggregationLifetime::expired)
        raise(Errc::invalid_target, "no live aggregation '" + agg_id + "'");
    for (const std::string& id : it->second.member_ids)
        busy_.erase(id);
    it->second.lifetime = AggregationLifetime::expired;
}

std::string LayerSystem::lift_resource(std::size_t source_layer,
                                       const std::set<std::string>& members,
                                       const std::string& new_id,
                                       const std::string& f_name,
                                       ResourceTable& table) {
    check_layer(source_layer);
    if (source_layer + 1 == layers_.size())
        raise(Errc::top_layer, "nothing above layer " + std::to_string(source_layer));
    auto fit = lifters_.find(f_name);
    if (fit == lifters_.end() || fit->second != source_layer)
        raise(Errc::unregistered_function,
              "no lifter '" + f_name + "' spanning layers " +
                  std::to_string(source_layer) + " and " +
                  std::to_string(source_layer + 1));
    for (const std::string& id : members) {
        auto lit = locus_.find(id);
        if (lit == locus_.end() || lit->second != source_layer)
            raise(Errc::not_owned,
                  "resource '" + id + "' is not owned by layer " +
                      std::to_string(source_layer));
    }
    if (locus_.count(new_id) != 0 || table.contains(new_id))
        raise(Errc::duplicate_id, "resource '" + new_id + "' already exists");

    std::int64_t size = 0;
    std::set<std::string> funcs;
    for (const std::string& id : members) {
        const Resource& r = table.get(id);
        size += static_cast<std::int64_t>(r.size());
        funcs.insert(r.func_ids().begin(), r.func_ids().end());
    }
    table.make_resource(new_id, size, funcs);
    assign_resource(source_layer + 1, new_id);
    substrate_[new_id] = std::vector<std::string>(members.begin(), members.end());

    std::uint64_t t = tick_++;
    nlohmann::ordered_json edge{{"kind", service_kind_name(ServiceKind::controls)},
                                {"from", source_layer},
                                {"to", source_layer + 1},
                                {"service", f_name}};
    trace_.emit(t, trace_kind::service_call, std::nullopt, edge);
    trace_.emit(t, trace_kind::lift, std::nullopt,
                {{"resource", new_id},
                 {"layer", source_layer + 1},
                 {"members", members},
                 {"size", size}});
    trace_.emit(t, trace_kind::service_return, std::nullopt, edge);
    return new_id;
}

std::vector<HierarchyViolation>
validate_service_hierarchy(const std::vector<TraceEvent>& events) {
    std::vector<HierarchyViolation> out;
    std::vector<std::pair<std::size_t, nlohmann::ordered_json>> open;

    auto edge_shape_ok = [](const nlohmann::ordered_json& d) {
        return d.is_object() && d.contains("kind") && d["kind"].is_string() &&
               d.contains("from") && d["from"].is_number_unsigned() &&
               d.contains("to") && d["to"].is_number_unsigned();
    };

    for (std::size_t i = 0; i < events.size(); ++i) {
        const TraceEvent& ev = events[i];
        if (ev.kind != trace_kind::service_call && ev.kind != trace_kind::service_return)
            continue;
        if (!edge_shape_ok(ev.detail)) {
            out.push_back({i, "service edge lacks kind/from/to"});
            continue;
        }
        std::string kind = ev.detail["kind"].get<std::string>();
        std::uint64_t from = ev.detail["from"].get<std::uint64_t>();
        std::uint64_t to = ev.detail["to"].get<std::uint64_t>();
        if (kind == service_kind_name(ServiceKind::uses)) {
            if (from != to + 1)
                out.push_back({i, "USES edge must point one layer down, got " +
                                      std::to_string(from) + " to " + std::to_string(to)});
        } else if (kind == service_kind_name(ServiceKind::controls)) {
            if (to != from + 1)
                out.push_back({i, "CONTROLS edge must point one layer up, got " +
                                      std::to_string(from) + " to " + std::to_string(to)});
        } else {
            out.push_back({i, "unknown service kind '" + kind + "'"});
            continue;
        }
        if (ev.kind == trace_kind::service_call) {
            open.emplace_back(i, ev.detail);
        } else if (open.empty() || open.back().second != ev.detail) {
            out.push_back({i, "return does not match the innermost open call"});
        } else {
            open.pop_back();
        }
    }
    for (const auto& [index, detail] : open)
        out.push_back({index, "service call never returns"});
    return out;
}

} // namespace osforma
