#pragma once

#include <stdexcept>
#include <string>

namespace roq {

// Error classes map onto process exit codes in the CLI:
// precondition violations exit with 2, dominance violations with 3,
// everything else (I/O, bad files) with 1.
enum class ErrorKind { Runtime, Precondition, Dominance };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

class PreconditionError : public Error {
public:
    PreconditionError(const std::string& code, const std::string& what)
        : Error(ErrorKind::Precondition, code, what) {}
};

class RuntimeError : public Error {
public:
    RuntimeError(const std::string& code, const std::string& what)
        : Error(ErrorKind::Runtime, code, what) {}
};

class DominanceViolation : public Error {
public:
    explicit DominanceViolation(const std::string& what)
        : Error(ErrorKind::Dominance, "DominanceViolation", what) {}
};

[[noreturn]] inline void fail_precondition(const std::string& code, const std::string& what) {
    throw PreconditionError(code, what);
}

} // namespace roq
