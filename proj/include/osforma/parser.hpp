#pragma once

#include <string>
#include <vector>

#include "osforma/model.hpp"

namespace osforma {

enum class ParseErrorKind { syntax, unknown_reference, duplicate, arity };

const char* parse_error_kind_name(ParseErrorKind) noexcept;

struct ParseError {
    std::size_t line = 1;
    std::size_t column = 1;
    ParseErrorKind kind = ParseErrorKind::syntax;
    std::string message;

    friend bool operator==(const ParseError&, const ParseError&) = default;
};

struct ParseResult {
    ModelDocument document;
    std::vector<ParseError> errors;

    bool ok() const { return errors.empty(); }
};

// Collects every error in the source instead of stopping at the first, and
// never throws, whatever the input bytes.
ParseResult parse_model(const std::string& source);

// Canonical text: LF lines, uppercase opcodes, two-space program indent,
// sorted func lists, defaults written out.  parse(serialize(doc)) equals doc.
std::string serialize_model(const ModelDocument& doc);

} // namespace osforma
