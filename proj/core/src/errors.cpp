#include "lrlab/errors.hpp"

namespace lrlab {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid argument";
        case ErrorKind::invalid_input: return "invalid input";
        case ErrorKind::shape: return "shape mismatch";
        case ErrorKind::not_found: return "not found";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::validation: return "validation";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string_view module, const std::string& what)
    : std::runtime_error(std::string(module) + ": " + what), kind_(kind), module_(module) {}

}  // namespace lrlab
