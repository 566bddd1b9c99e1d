#include "osforma/error.hpp"

namespace osforma {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::invalid_size: return "InvalidSize";
    case Errc::address_out_of_range: return "AddressOutOfRange";
    case Errc::unregistered_function: return "UnregisteredFunction";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::unknown_resource: return "UnknownResource";
    case Errc::empty_program: return "EmptyProgram";
    case Errc::undefined_read: return "UndefinedRead";
    case Errc::not_live: return "NotLive";
    case Errc::resource_not_claimed: return "ResourceNotClaimed";
    case Errc::not_held: return "NotHeld";
    case Errc::not_active: return "NotActive";
    case Errc::processor_not_releasable: return "ProcessorNotReleasable";
    case Errc::invalid_target: return "InvalidTarget";
    case Errc::self_transfer: return "SelfTransfer";
    case Errc::stack_overflow: return "StackOverflow";
    case Errc::unbalanced_return: return "UnbalancedReturn";
    case Errc::unknown_layer: return "UnknownLayer";
    case Errc::count_mismatch: return "CountMismatch";
    case Errc::already_owned: return "AlreadyOwned";
    case Errc::wrong_locus: return "WrongLocus";
    case Errc::not_owned: return "NotOwned";
    case Errc::busy_member: return "BusyMember";
    case Errc::top_layer: return "TopLayer";
    case Errc::overflow: return "Overflow";
    case Errc::model_too_large: return "ModelTooLarge";
    case Errc::malformed_trace: return "MalformedTrace";
    }
    return "UnknownError";
}

} // namespace osforma
