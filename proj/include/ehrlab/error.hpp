#pragma once

#include <stdexcept>
#include <string>

namespace ehrlab {

enum class Errc {
    dimension_mismatch,
    invalid_entry,
    invalid_argument,
    unsupported,
    no_modulus,
    not_injective,
    empty_nullspace,
    out_of_range,
    config,
    internal,
};

inline const char* to_string(Errc code) {
    switch (code) {
        case Errc::dimension_mismatch: return "dimension_mismatch";
        case Errc::invalid_entry: return "invalid_entry";
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::unsupported: return "unsupported";
        case Errc::no_modulus: return "no_modulus";
        case Errc::not_injective: return "not_injective";
        case Errc::empty_nullspace: return "empty_nullspace";
        case Errc::out_of_range: return "out_of_range";
        case Errc::config: return "config";
        case Errc::internal: return "internal";
    }
    return "unknown";
}

// Structured error carried by every module. `where` names the originating
// module or, for configuration errors, the JSON pointer of the bad field.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string where, const std::string& message)
        : std::runtime_error(where + ": " + message), code_(code), where_(std::move(where)) {}

    Errc code() const noexcept { return code_; }
    const std::string& where() const noexcept { return where_; }

private:
    Errc code_;
    std::string where_;
};

} // namespace ehrlab
