// kdet: Fredholm determinant curves, σ-form residuals and cross-checks.
// Exit codes: 0 ok, 2 config error, 3 numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "kdet/errors.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

struct Flags {
    std::string config, kernel, params, grid, y_grid, format, out, family;
    std::optional<int> order, order_infinite, threads;
    std::optional<double> fd_step, s_start;
    bool synthetic_zero_c = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--kernel", f.kernel, "f21, whittaker, confluent, sine, airy or jacobi");
    cmd->add_option("--params", f.params, "kernel parameters as a JSON object, merged over the config");
    cmd->add_option("--grid", f.grid, "a,b,c or start:stop:count");
    cmd->add_option("--family", f.family, "right_tail, left_interval or explicit");
    cmd->add_option("--order", f.order, "nodes per finite interval");
    cmd->add_option("--order-infinite", f.order_infinite, "nodes per semi-infinite interval");
    cmd->add_option("--fd-step", f.fd_step, "finite-difference step for d2, d3");
    cmd->add_option("--format", f.format, "csv or json");
    cmd->add_option("--out", f.out, "output path (default stdout)");
    cmd->add_option("--threads", f.threads, "worker threads (default: hardware concurrency)");
}

nlohmann::json merged_config(const Flags& f) {
    nlohmann::json doc = nlohmann::json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw kdet::Error(kdet::ErrorKind::ConfigError, "cli", "cannot read " + f.config);
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw kdet::Error(kdet::ErrorKind::ConfigError, "cli", f.config + ": " + e.what());
        }
    }
    if (!doc.is_object()) throw kdet::Error(kdet::ErrorKind::ConfigError, "cli", "config must be a JSON object");
    if (!f.kernel.empty()) doc["kernel"] = f.kernel;
    if (!f.params.empty()) {
        nlohmann::json p;
        try {
            p = nlohmann::json::parse(f.params);
        } catch (const nlohmann::json::exception& e) {
            throw kdet::Error(kdet::ErrorKind::ConfigError, "cli", std::string("--params: ") + e.what());
        }
        if (!doc.contains("params")) doc["params"] = nlohmann::json::object();
        doc["params"].merge_patch(p);
    }
    if (!f.grid.empty()) doc["grid"] = f.grid;
    if (!f.y_grid.empty()) doc["y_grid"] = f.y_grid;
    if (!f.family.empty()) doc["family"] = f.family;
    if (!f.format.empty()) doc["format"] = f.format;
    if (!f.out.empty()) doc["out"] = f.out;
    if (f.order) doc["order"] = *f.order;
    if (f.order_infinite) doc["order_infinite"] = *f.order_infinite;
    if (f.threads) doc["threads"] = *f.threads;
    if (f.fd_step) doc["fd_step"] = *f.fd_step;
    if (f.s_start) doc["s_start"] = *f.s_start;
    if (f.synthetic_zero_c) doc["synthetic_zero_c"] = true;
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fredholm determinants of hypergeometric-type kernels and their Painleve checks"};
    app.require_subcommand(1);
    Flags flags;
    auto* det = app.add_subcommand("det-curve", "log det, d1, d2 along a grid of the moving endpoint");
    auto* sigma = app.add_subcommand("sigma-check", "sigma-form Painleve residuals along the grid");
    auto* airy = app.add_subcommand("airy-crosscheck", "Hastings-McLeod u against -d2 ln det of the Airy kernel");
    auto* schl = app.add_subcommand("schlesinger-check", "residue reconstruction, Schlesinger flow and tau check");
    auto* keval = app.add_subcommand("kernel-eval", "pointwise kernel values");
    for (auto* cmd : {det, sigma, airy, schl, keval}) add_flags(cmd, flags);
    schl->add_option("--s-start", flags.s_start, "reconstruction point (default: first grid value)");
    schl->add_flag("--synthetic-zero-c", flags.synthetic_zero_c, "start from a synthetic system with C = 0");
    keval->add_option("--y-grid", flags.y_grid, "second arguments (default: diagonal)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    kdet::cli::RunConfig config;
    try {
        auto doc = merged_config(flags);
        if (command == "airy-crosscheck" && !doc.contains("kernel")) doc["kernel"] = "airy";
        config = kdet::cli::parse_config(doc);
        kdet::cli::validate(command, config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigExit;
    }

    std::string text;
    try {
        kdet::cli::Table table;
        if (command == "det-curve") table = kdet::cli::cmd_det_curve(config);
        else if (command == "sigma-check") table = kdet::cli::cmd_sigma_check(config);
        else if (command == "airy-crosscheck") table = kdet::cli::cmd_airy_crosscheck(config);
        else if (command == "schlesinger-check") table = kdet::cli::cmd_schlesinger_check(config);
        else table = kdet::cli::cmd_kernel_eval(config);
        text = kdet::cli::render(table, config.format);
    } catch (const kdet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == kdet::ErrorKind::ConfigError ? kConfigExit : kNumericExit;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error in %s: %s\n", command.c_str(), e.what());
        return kNumericExit;
    }

    if (config.out.empty()) {
        std::cout << text << std::flush;
    } else {
        std::ofstream out(config.out, std::ios::binary);
        out << text;
        if (!out) {
            std::fprintf(stderr, "config error: cannot write %s\n", config.out.c_str());
            return kConfigExit;
        }
    }
    return 0;
}
