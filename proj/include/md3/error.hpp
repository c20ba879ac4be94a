#pragma once

#include <stdexcept>
#include <string>

namespace md3 {

enum class ErrorKind {
    format,
    parse,
    empty_input,
    shape,
    index,
    parameter,
    configuration,
    missing_labels,
    degenerate_training,
    degenerate_data,
    degenerate_histogram,
    state_machine,
    io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::format: return "format error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::index: return "index error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::missing_labels: return "missing labels";
    case ErrorKind::degenerate_training: return "degenerate training data";
    case ErrorKind::degenerate_data: return "degenerate data";
    case ErrorKind::degenerate_histogram: return "degenerate histogram";
    case ErrorKind::state_machine: return "state machine error";
    case ErrorKind::io: return "i/o error";
    }
    return "error";
}

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace md3
