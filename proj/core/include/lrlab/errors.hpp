#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrlab {

enum class ErrorKind {
    invalid_argument,
    invalid_input,
    shape,
    not_found,
    degenerate,
    validation,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library. The message is prefixed with the
// module that raised it, e.g. "linalg: svd input contains non-finite entries".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string_view module, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

}  // namespace lrlab
