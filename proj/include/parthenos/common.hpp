#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace parthenos {

// Scalar value used for annotation arguments and graph properties:
// a string/atom, an integer, or a boolean.
using Value = std::variant<std::string, long long, bool>;

std::string value_text(const Value& v);

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : Error {
    using Error::Error;
};

bool is_identifier(std::string_view s);

}  // namespace parthenos
