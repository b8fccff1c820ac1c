#pragma once

#include <stdexcept>
#include <string>

namespace glr {

enum class Errc {
    bad_magic,
    bad_version,
    duplicate_id,
    non_finite,
    truncated,
    id_too_long,
    io_failure,
    dimension_mismatch,
    empty_input,
    zero_vector,
    unknown_id,
    missing_id,
    bad_argument,
    bad_format,
    shape_mismatch,
};

/// Library-wide exception. Every failure mode carries a distinct code so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message) : std::runtime_error(message), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace glr
