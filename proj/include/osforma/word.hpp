#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osforma/error.hpp"

namespace osforma {

// A single storable value: a 64-bit signed integer or the distinguished
// undefined value. Fresh storage is undefined until written or zero-filled.
class Word {
public:
    constexpr Word() noexcept = default; // undefined
    constexpr explicit Word(std::int64_t v) noexcept : defined_(true), value_(v) {}

    constexpr bool is_undef() const noexcept { return !defined_; }

    // Reading an undefined word is an error; callers that want the raw
    // state use is_undef() first.
    std::int64_t value() const {
        if (!defined_)
            raise(Errc::undefined_read, "read of undefined word");
        return value_;
    }

    friend constexpr bool operator==(const Word&, const Word&) noexcept = default;

private:
    bool defined_ = false;
    std::int64_t value_ = 0;
};

inline std::vector<Word> undef_words(std::size_t n) { return std::vector<Word>(n); }
inline std::vector<Word> zero_words(std::size_t n) { return std::vector<Word>(n, Word(0)); }

// Two's-complement wraparound addition; instruction arithmetic never traps.
inline std::int64_t wrap_add(std::int64_t a, std::int64_t b) noexcept {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}

std::string word_to_string(const Word& w);

} // namespace osforma
