#pragma once

#include <stdexcept>
#include <string>

namespace rpinfer {

inline constexpr const char* kToolName = "rpinfer";
inline constexpr const char* kToolVersion = "0.1.0";

// Malformed input (bad syntax, bad literal). Carries file/offset context
// when raised by a loader.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input referencing an entity that does not exist
// (e.g. an interface record naming an unknown exchange).
struct LinkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or contradictory configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Semantically invalid data reaching an operation (violated precondition).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rpinfer
