#pragma once

#include <stdexcept>
#include <string>

namespace kdet {

enum class ErrorKind {
    PoleAtC,
    PoleAtNonpositiveInteger,
    NoConvergence,
    DomainError,
    NearDiagonal,
    OrderTooLarge,
    InvalidUnion,
    SingularResolvent,
    OracleInapplicable,
    PoleCollision,
    InvariantDrift,
    DegenerateData,
    ResidualDrift,
    BlowUp,
    ConfigError,
};

const char* to_string(ErrorKind kind);

// Every numerical failure surfaces as this exception; `op` names the
// operation that raised it so the CLI can report it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string op, const std::string& detail);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& op() const noexcept { return op_; }

private:
    ErrorKind kind_;
    std::string op_;
};

// Warnings (parameter perturbations and the like) go through a replaceable
// sink; the default writes to stderr.
using WarningSink = void (*)(const std::string&);
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace kdet
