#pragma once

#include <stdexcept>
#include <string>

namespace osforma {

enum class Errc {
    duplicate_id,
    invalid_size,
    address_out_of_range,
    unregistered_function,
    shape_mismatch,
    unknown_resource,
    empty_program,
    undefined_read,
    not_live,
    resource_not_claimed,
    not_held,
    not_active,
    processor_not_releasable,
    invalid_target,
    self_transfer,
    stack_overflow,
    unbalanced_return,
    unknown_layer,
    count_mismatch,
    already_owned,
    wrong_locus,
    not_owned,
    busy_member,
    top_layer,
    overflow,
    model_too_large,
    malformed_trace,
};

const char* errc_name(Errc code) noexcept;

class ModelError : public std::runtime_error {
public:
    ModelError(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw ModelError(code, what);
}

} // namespace osforma
