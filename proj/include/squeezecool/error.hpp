#pragma once

#include <stdexcept>
#include <string>

namespace squeezecool {

/// Base exception. `code()` is a short machine-readable tag that the CLI
/// forwards into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

inline void require(bool cond, const char* code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

}  // namespace squeezecool
