#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

enum class ErrorKind {
    InvalidArgument,
    Dimension,
    Singular,
    Truncation,
    Infeasible,
    Unphysical,
    Config,
    Io,
    Reconciliation,
    Estimation,
};

// Base exception for every failure raised by the library. The C API maps
// kind() onto cvqkd_status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, int photon_number)
        : Error(ErrorKind::Infeasible, what), photon_number_(photon_number) {}
    // Photon number k at which p·f(k) exceeds g(k).
    int photon_number() const noexcept { return photon_number_; }

private:
    int photon_number_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line) : Error(ErrorKind::Config, what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
    if (!ok) fail(kind, what);
}

}  // namespace cvqkd
