#include "kdet/errors.hpp"

#include <atomic>
#include <cstdio>

namespace kdet {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::PoleAtC: return "PoleAtC";
        case ErrorKind::PoleAtNonpositiveInteger: return "PoleAtNonpositiveInteger";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NearDiagonal: return "NearDiagonal";
        case ErrorKind::OrderTooLarge: return "OrderTooLarge";
        case ErrorKind::InvalidUnion: return "InvalidUnion";
        case ErrorKind::SingularResolvent: return "SingularResolvent";
        case ErrorKind::OracleInapplicable: return "OracleInapplicable";
        case ErrorKind::PoleCollision: return "PoleCollision";
        case ErrorKind::InvariantDrift: return "InvariantDrift";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::ResidualDrift: return "ResidualDrift";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, std::string op, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " in " + op + ": " + detail),
      kind_(kind),
      op_(std::move(op)) {}

namespace {
void stderr_sink(const std::string& message) {
    std::fprintf(stderr, "warning: %s\n", message.c_str());
}
std::atomic<WarningSink> g_sink{&stderr_sink};
}  // namespace

void set_warning_sink(WarningSink sink) { g_sink.store(sink ? sink : &stderr_sink); }

void warn(const std::string& message) { g_sink.load()(message); }

}  // namespace kdet
