#pragma once

#include <stdexcept>
#include <string>

namespace dfl {

// Error taxonomy shared by all modules. The C API maps kinds onto its
// status codes, the CLI onto exit codes.
enum class ErrorKind {
    parameter,    // bad argument / out-of-range value
    validation,   // config or pre-flight validation failure
    format,       // malformed input file (magic number, structure)
    io,           // read/write failure, truncation
    consistency,  // cross-field contract broken (e.g. flagged sample with wrong label)
    numeric,      // non-finite values during compute
    aggregation   // shape mismatch or empty input when averaging models
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace dfl
