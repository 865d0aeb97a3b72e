#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "kdet/fredholm.hpp"
#include "kdet/kernels.hpp"

namespace kdet::cli {

enum class Family { RightTail, LeftInterval, Explicit };
enum class Format { Csv, Json };

struct RunConfig {
    KernelSpec kernel = SineKernel{};
    Family family = Family::RightTail;
    // Endpoints of J with endpoint `moving` replaced by each grid value.
    std::vector<double> endpoints;
    int moving = 0;
    std::vector<double> grid;
    // kernel-eval only: second arguments; empty means the diagonal.
    std::vector<double> y_grid;
    int order = 64;
    int order_infinite = 128;
    double fd_step = 1e-3;
    Format format = Format::Csv;
    std::string out;  // empty: stdout
    int threads = 1;
    // schlesinger-check: reconstruction point (defaults to the first grid value)
    std::optional<double> s_start;
    bool synthetic_zero_c = false;
};

// Builds a config from a JSON document (flags already merged in). Every
// failure is a ConfigError.
RunConfig parse_config(const nlohmann::json& doc);

// "a,b,c" or "start:stop:count" (inclusive, evenly spaced); "" is empty.
std::vector<double> parse_grid_spec(const std::string& text);

// Command-specific checks (kernel, family, every interval on the grid) run
// before any computation; ConfigError on failure.
void validate(const std::string& command, const RunConfig& config);

IntervalUnion union_at(const RunConfig& config, double value);
GridOptions grid_options(const RunConfig& config, const IntervalUnion& J);

struct Table {
    std::string command;
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> summary;
};

// Numerical failures propagate as kdet::Error.
Table cmd_det_curve(const RunConfig& config);
Table cmd_sigma_check(const RunConfig& config);
Table cmd_airy_crosscheck(const RunConfig& config);
Table cmd_schlesinger_check(const RunConfig& config);
Table cmd_kernel_eval(const RunConfig& config);

// %.17g throughout; CSV comment and summary rows start with '#'.
std::string render(const Table& table, Format format);

}  // namespace kdet::cli
