#include "cli.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "kdet/errors.hpp"

namespace kdet::cli {

using nlohmann::json;

namespace {

constexpr const char* kOp = "parse_config";
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& detail) { throw Error(ErrorKind::ConfigError, kOp, detail); }

double to_double(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    fail(what + ": expected a number");
}

double finite_double(const json& v, const std::string& what) {
    double x = to_double(v, what);
    if (!std::isfinite(x)) fail(what + ": must be finite");
    return x;
}

cplx to_complex(const json& v, const std::string& what) {
    if (v.is_array() && v.size() == 2) return {finite_double(v[0], what), finite_double(v[1], what)};
    if (v.is_number()) return finite_double(v, what);
    fail(what + ": expected a number or [re, im]");
}

int to_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) fail(what + ": expected an integer");
    return v.get<int>();
}

std::vector<double> to_grid(const json& v, const std::string& what) {
    std::vector<double> out;
    if (v.is_string()) {
        out = parse_grid_spec(v.get<std::string>());
    } else if (v.is_array()) {
        for (const auto& x : v) out.push_back(finite_double(x, what));
    } else {
        fail(what + ": expected an array or a grid string");
    }
    for (size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) fail(what + ": values must be strictly increasing");
    return out;
}

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& what) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(what + ": unknown key '" + key + "'");
}

const json& required(const json& obj, const std::string& key, const std::string& what) {
    if (!obj.contains(key)) fail(what + ": missing '" + key + "'");
    return obj.at(key);
}

KernelSpec make_kernel(const std::string& name, const json& params) {
    if (!params.is_object()) fail("params: expected an object");
    try {
        if (name == "f21") {
            only_keys(params, {"z", "zp", "w", "wp", "strict"}, "params");
            bool strict = params.value("strict", false);
            return F21Kernel{HypParams::make(to_complex(required(params, "z", "params"), "z"),
                                             to_complex(required(params, "zp", "params"), "zp"),
                                             to_complex(required(params, "w", "params"), "w"),
                                             to_complex(required(params, "wp", "params"), "wp"), strict)};
        }
        if (name == "whittaker") {
            only_keys(params, {"z", "zp"}, "params");
            return make_whittaker(to_complex(required(params, "z", "params"), "z"),
                                  to_complex(required(params, "zp", "params"), "zp"));
        }
        if (name == "confluent") {
            only_keys(params, {"r"}, "params");
            return make_confluent(to_complex(required(params, "r", "params"), "r"));
        }
        if (name == "jacobi") {
            only_keys(params, {"n", "alpha", "beta"}, "params");
            return make_jacobi(to_int(required(params, "n", "params"), "n"),
                               finite_double(required(params, "alpha", "params"), "alpha"),
                               finite_double(required(params, "beta", "params"), "beta"));
        }
        if (name == "sine" || name == "airy") {
            only_keys(params, {}, "params");
            if (name == "sine") return SineKernel{};
            return AiryKernel{};
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        fail(std::string("kernel parameters rejected: ") + e.what());
    }
    fail("unknown kernel '" + name + "'");
}

Family default_family(const KernelSpec& k) {
    if (std::holds_alternative<SineKernel>(k) || std::holds_alternative<ConfluentKernel>(k))
        return Family::LeftInterval;
    return Family::RightTail;
}

}  // namespace

std::vector<double> parse_grid_spec(const std::string& text) {
    std::vector<double> out;
    if (text.find_first_not_of(" \t") == std::string::npos) return out;
    auto number = [](const std::string& s) {
        size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("grid: cannot parse '" + s + "'");
        }
        if (s.find_first_not_of(" \t", used) != std::string::npos) fail("grid: cannot parse '" + s + "'");
        if (!std::isfinite(x)) fail("grid: values must be finite");
        return x;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) fail("grid: expected start:stop:count");
        double a = number(parts[0]), b = number(parts[1]);
        double c = number(parts[2]);
        if (c < 1 || c != std::floor(c)) fail("grid: count must be a positive integer");
        int n = static_cast<int>(c);
        if (n == 1) return {a};
        for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? b : a + (b - a) * i / (n - 1));
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
    return out;
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) fail("config: expected a JSON object");
    only_keys(doc,
              {"kernel", "params", "family", "endpoints", "moving", "grid", "y_grid", "order", "order_infinite",
               "fd_step", "format", "out", "threads", "s_start", "synthetic_zero_c"},
              "config");
    RunConfig c;
    const auto& kernel = required(doc, "kernel", "config");
    if (!kernel.is_string()) fail("kernel: expected a name");
    c.kernel = make_kernel(kernel.get<std::string>(), doc.value("params", json::object()));

    c.family = default_family(c.kernel);
    if (doc.contains("family")) {
        const auto& f = doc.at("family");
        if (f == "right_tail") c.family = Family::RightTail;
        else if (f == "left_interval") c.family = Family::LeftInterval;
        else if (f == "explicit") c.family = Family::Explicit;
        else fail("family: expected right_tail, left_interval or explicit");
    }
    const bool jacobi = std::holds_alternative<JacobiKernel>(c.kernel);
    switch (c.family) {
        case Family::RightTail:
            c.endpoints = {0.0, jacobi ? 0.5 : kInf};
            c.moving = 0;
            break;
        case Family::LeftInterval:
            if (jacobi) c.endpoints = {-0.5, 0.0};
            else if (default_family(c.kernel) == Family::LeftInterval) c.endpoints = {0.0, 0.0};
            else fail("family: left_interval needs the sine, confluent or Jacobi kernel");
            c.moving = 1;
            break;
        case Family::Explicit: {
            const auto& e = required(doc, "endpoints", "config");
            if (!e.is_array() || e.empty() || e.size() % 2) fail("endpoints: expected an even, nonempty array");
            for (const auto& x : e) {
                double v = to_double(x, "endpoints");
                if (std::isnan(v)) fail("endpoints: NaN");
                c.endpoints.push_back(v);
            }
            c.moving = to_int(required(doc, "moving", "config"), "moving");
            if (c.moving < 0 || c.moving >= static_cast<int>(c.endpoints.size())) fail("moving: out of range");
            break;
        }
    }
    if (c.family != Family::Explicit && (doc.contains("endpoints") || doc.contains("moving")))
        fail("endpoints/moving apply to the explicit family only");

    if (doc.contains("grid")) c.grid = to_grid(doc.at("grid"), "grid");
    if (doc.contains("y_grid")) c.y_grid = to_grid(doc.at("y_grid"), "y_grid");
    if (doc.contains("order")) c.order = to_int(doc.at("order"), "order");
    if (doc.contains("order_infinite")) c.order_infinite = to_int(doc.at("order_infinite"), "order_infinite");
    if (c.order < 2 || c.order > 2048 || c.order_infinite < 2 || c.order_infinite > 2048)
        fail("order: expected 2..2048");
    if (doc.contains("fd_step")) c.fd_step = finite_double(doc.at("fd_step"), "fd_step");
    if (!(c.fd_step > 0.0)) fail("fd_step: must be positive");
    if (doc.contains("format")) {
        const auto& f = doc.at("format");
        if (f == "csv") c.format = Format::Csv;
        else if (f == "json") c.format = Format::Json;
        else fail("format: expected csv or json");
    }
    if (doc.contains("out")) {
        if (!doc.at("out").is_string()) fail("out: expected a path");
        c.out = doc.at("out").get<std::string>();
    }
    c.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (doc.contains("threads")) c.threads = to_int(doc.at("threads"), "threads");
    if (c.threads < 1) fail("threads: must be positive");
    if (doc.contains("s_start")) c.s_start = finite_double(doc.at("s_start"), "s_start");
    if (doc.contains("synthetic_zero_c")) {
        if (!doc.at("synthetic_zero_c").is_boolean()) fail("synthetic_zero_c: expected a boolean");
        c.synthetic_zero_c = doc.at("synthetic_zero_c").get<bool>();
    }
    return c;
}

IntervalUnion union_at(const RunConfig& config, double value) {
    auto e = config.endpoints;
    e[config.moving] = value;
    return IntervalUnion::make(e);
}

GridOptions grid_options(const RunConfig& config, const IntervalUnion& J) {
    auto opt = default_grid_options(config.kernel, J, config.order);
    opt.order_infinite = config.order_infinite;
    return opt;
}

}  // namespace kdet::cli
