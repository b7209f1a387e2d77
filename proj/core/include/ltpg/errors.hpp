#pragma once

#include <stdexcept>
#include <string>

namespace ltpg {

// Computational failure with a stable machine-readable code. Codes are part
// of the CLI contract ("inexact-zero divisor", "exp-divergent", ...); the
// human-readable part may change freely.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw Error(code, what);
}

} // namespace ltpg
