#pragma once

#include <stdexcept>
#include <string>

namespace sjko {

enum class ErrorKind {
    invalid_argument,
    domain_mismatch,
    non_finite,
    solver_failure,
    cfl_violation,
    config,
    io,
};

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::invalid_argument, what);
}

}  // namespace sjko
