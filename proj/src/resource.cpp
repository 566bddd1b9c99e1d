#include "osforma/resource.hpp"

namespace osforma {

std::string word_to_string(const Word& w) {
    return w.is_undef() ? "UNDEF" : std::to_string(w.value());
}

const Word& StateVector::at(std::uint32_t adr) const {
    if (adr < 1 || adr > values.size())
        raise(Errc::address_out_of_range,
              "address " + std::to_string(adr) + " outside {1.." +
              std::to_string(values.size()) + "}");
    return values[adr - 1];
}

namespace transforms {

TransformFn identity() {
    return {"identity", [](const std::vector<Word>& v) { return v; }};
}

TransformFn store_word(const std::string& name, std::uint32_t adr, Word w) {
    return {name, [adr, w](const std::vector<Word>& v) {
                if (adr < 1 || adr > v.size())
                    raise(Errc::address_out_of_range,
                          "address " + std::to_string(adr) + " outside {1.." +
                          std::to_string(v.size()) + "}");
                std::vector<Word> out = v;
                out[adr - 1] = w;
                return out;
            }};
}

TransformFn add_words(std::uint32_t dst_adr, std::uint32_t src_adr) {
    return {"add", [dst_adr, src_adr](const std::vector<Word>& v) {
                auto check = [&](std::uint32_t adr) -> const Word& {
                    if (adr < 1 || adr > v.size())
                        raise(Errc::address_out_of_range,
                              "address " + std::to_string(adr) + " outside {1.." +
                              std::to_string(v.size()) + "}");
                    return v[adr - 1];
                };
                std::int64_t sum = wrap_add(check(dst_adr).value(), check(src_adr).value());
                std::vector<Word> out = v;
                out[dst_adr - 1] = Word(sum);
                return out;
            }};
}

TransformFn zero_fill() {
    return {"zero_fill", [](const std::vector<Word>& v) {
                return zero_words(v.size());
            }};
}

} // namespace transforms

Resource::Resource(std::string id, std::size_t size, std::set<std::string> func_ids)
    : id_(std::move(id)), func_ids_(std::move(func_ids)), values_(undef_words(size)) {}

const Word& Resource::read(std::uint32_t adr) const {
    if (adr < 1 || adr > values_.size())
        raise(Errc::address_out_of_range,
              id_ + ": address " + std::to_string(adr) + " outside {1.." +
              std::to_string(values_.size()) + "}");
    return values_[adr - 1];
}

StateVector Resource::apply(const TransformFn& fn) {
    if (func_ids_.count(fn.name) == 0)
        raise(Errc::unregistered_function,
              "'" + fn.name + "' is not an admissible function of resource '" + id_ + "'");
    std::vector<Word> next = fn.effect(values_);
    if (next.size() != values_.size())
        raise(Errc::shape_mismatch,
              "transform '" + fn.name + "' changed the length of '" + id_ + "'");
    values_ = std::move(next);
    ++tick_;
    return snapshot();
}

StateVector Resource::reset(const std::vector<Word>& initial) {
    if (initial.size() != values_.size())
        raise(Errc::shape_mismatch, "reset vector length mismatch for '" + id_ + "'");
    values_ = initial;
    ++tick_;
    return snapshot();
}

Resource& ResourceTable::make_resource(const std::string& id, std::int64_t size,
                                       const std::set<std::string>& func_ids) {
    if (id.empty())
        raise(Errc::invalid_size, "resource id must be nonempty");
    if (size < 0)
        raise(Errc::invalid_size, "resource '" + id + "' has negative size");
    if (contains(id))
        raise(Errc::duplicate_id, "resource '" + id + "' already exists");
    auto [it, ok] = resources_.emplace(
        id, Resource(id, static_cast<std::size_t>(size), func_ids));
    (void)ok;
    return it->second;
}

Resource& ResourceTable::get(const std::string& id) {
    auto it = resources_.find(id);
    if (it == resources_.end())
        raise(Errc::unknown_resource, "no resource named '" + id + "'");
    return it->second;
}

const Resource& ResourceTable::get(const std::string& id) const {
    auto it = resources_.find(id);
    if (it == resources_.end())
        raise(Errc::unknown_resource, "no resource named '" + id + "'");
    return it->second;
}

Word ResourceTable::read_element(const std::string& id, std::uint32_t adr) const {
    return get(id).read(adr);
}

StateVector ResourceTable::apply_transform(const std::string& id, const TransformFn& fn) {
    return get(id).apply(fn);
}

} // namespace osforma
