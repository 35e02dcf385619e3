#pragma once

#include <stdexcept>
#include <string>

namespace sobocomp {

// Failure taxonomy; the CLI maps kinds to process exit codes.
enum class ErrorKind {
    Config,        // malformed input / impossible configuration      -> exit 3
    Io,            // unreadable or unwritable paths                  -> exit 3
    Precondition,  // caller violated an operation contract           -> exit 1
    Hypothesis,    // a verified hypothesis failed, witness attached  -> exit 1
    Invariant,     // internal consistency check failed               -> exit 2
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        switch (kind_) {
            case ErrorKind::Config:
            case ErrorKind::Io: return 3;
            case ErrorKind::Precondition:
            case ErrorKind::Hypothesis: return 1;
            case ErrorKind::Invariant: return 2;
        }
        return 2;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { throw Error(ErrorKind::Io, msg); }
[[noreturn]] inline void fail_pre(const std::string& msg) { throw Error(ErrorKind::Precondition, msg); }
[[noreturn]] inline void fail_hypothesis(const std::string& msg) { throw Error(ErrorKind::Hypothesis, msg); }
[[noreturn]] inline void fail_invariant(const std::string& msg) { throw Error(ErrorKind::Invariant, msg); }

inline void require_pre(bool ok, const std::string& msg) {
    if (!ok) fail_pre(msg);
}

}  // namespace sobocomp
