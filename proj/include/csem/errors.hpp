#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace csem {

enum class ErrorKind {
    Type,
    Overflow,
    EnumerationOverflow,
    UnsupportedJoin,
    UnsupportedRange,
    OracleUnavailable,
    Nontermination,
    Parse,
    Config,
    NoCandidate,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// Checked 64-bit arithmetic. Interval endpoints are mathematical integers in
// the source material; wrapping silently would break the soundness oracles,
// so any overflow raises instead.
inline int64_t checked_add(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_add_overflow(a, b, &r)) fail(ErrorKind::Overflow, "integer overflow in add");
    return r;
}

inline int64_t checked_sub(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) fail(ErrorKind::Overflow, "integer overflow in sub");
    return r;
}

inline int64_t checked_mul(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) fail(ErrorKind::Overflow, "integer overflow in mul");
    return r;
}

} // namespace csem
