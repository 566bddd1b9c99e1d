#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "osforma/parser.hpp"

namespace testfix {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string model_path(const std::string& name) {
    return std::string(OSFORMA_MODELS_DIR) + "/" + name;
}

inline osforma::ModelDocument load_model(const std::string& name) {
    osforma::ParseResult r = osforma::parse_model(slurp(model_path(name)));
    if (!r.ok()) {
        std::ostringstream msg;
        msg << name << " does not parse:";
        for (const osforma::ParseError& e : r.errors)
            msg << " [" << e.line << ":" << e.column << " " << e.message << "]";
        throw std::runtime_error(msg.str());
    }
    return std::move(r.document);
}

} // namespace testfix
