#include <doctest.h>
#include <gsl/gsl_sf_airy.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "kdet/errors.hpp"

using kdet::ErrorKind;
using kdet::cli::Format;
using kdet::cli::RunConfig;
using nlohmann::json;

namespace {

template <class F>
ErrorKind error_kind(F&& f) {
    try {
        f();
    } catch (const kdet::Error& e) {
        return e.kind();
    }
    FAIL("no kdet::Error raised");
    return ErrorKind::DomainError;
}

std::string golden(const std::string& name) {
    std::ifstream in(std::string(KDET_GOLDEN_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json demo_params() {
    return {{"z", {0.3, 0.4}}, {"zp", {0.3, -0.4}}, {"w", {0.2, 0.1}}, {"wp", {0.2, -0.1}}, {"strict", true}};
}

RunConfig config(const std::string& command, json doc) {
    doc["threads"] = 2;
    auto c = kdet::cli::parse_config(doc);
    kdet::cli::validate(command, c);
    return c;
}

double column(const kdet::cli::Table& t, size_t row, const std::string& name) {
    for (size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return t.rows.at(row).at(i);
    FAIL("no column " << name);
    return 0.0;
}

double summary(const kdet::cli::Table& t, const std::string& name) {
    for (const auto& [k, v] : t.summary)
        if (k == name) return v;
    FAIL("no summary " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("grid specs") {
    using kdet::cli::parse_grid_spec;
    CHECK(parse_grid_spec("").empty());
    CHECK(parse_grid_spec("0.5,1, 2") == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(parse_grid_spec("1:2:5") == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});
    CHECK(parse_grid_spec("3:9:1") == std::vector<double>{3.0});
    for (const char* bad : {"1,x", "1:2", "1:2:0", "1:2:2.5", "nan", "1,inf", "1e999"})
        CHECK(error_kind([&] { parse_grid_spec(bad); }) == ErrorKind::ConfigError);
}

TEST_CASE("config validation") {
    auto rejects = [](const json& doc) {
        return error_kind([&] { kdet::cli::parse_config(doc); }) == ErrorKind::ConfigError;
    };
    CHECK(rejects(json::array()));
    CHECK(rejects(json{{"grid", {1}}}));
    CHECK(rejects(json{{"kernel", "bessel"}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"colour", "red"}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"params", {{"r", 1}}}}));
    CHECK(rejects(json{{"kernel", "f21"}, {"params", {{"z", {0.3, 0.4}}}}}));
    // z, z′ not an admissible pair
    CHECK(rejects(json{{"kernel", "f21"}, {"params", {{"z", 0.3}, {"zp", 1.7}, {"w", 0.2}, {"wp", 0.1}}}}));
    CHECK(rejects(json{{"kernel", "jacobi"}, {"params", {{"n", 1.5}, {"alpha", 0.2}, {"beta", 0.2}}}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"grid", {1, 1}}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"grid", "2,1"}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"order", 1}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"fd_step", 0}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"format", "xml"}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"threads", 0}}));
    CHECK(rejects(json{{"kernel", "airy"}, {"family", "left_interval"}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"family", "explicit"}, {"endpoints", {0, 1, 2}}, {"moving", 0}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"family", "explicit"}, {"endpoints", {0, 1}}, {"moving", 2}}));
    CHECK(rejects(json{{"kernel", "sine"}, {"moving", 0}}));

    auto c = kdet::cli::parse_config({{"kernel", "sine"}, {"grid", "0.5:1:2"}});
    CHECK(c.family == kdet::cli::Family::LeftInterval);
    CHECK(c.grid == std::vector<double>{0.5, 1.0});
    CHECK(c.threads >= 1);
    auto e = kdet::cli::parse_config({{"kernel", "airy"},
                                      {"family", "explicit"},
                                      {"endpoints", {-1, 0, 1, "inf"}},
                                      {"moving", 2}});
    auto J = kdet::cli::union_at(e, 2.0);
    CHECK(J.count() == 2);
    CHECK(J.lower(1) == 2.0);
    CHECK(std::isinf(J.upper(1)));

    // command-level checks
    auto invalid = [](const std::string& cmd, const json& doc) {
        return error_kind([&] { config(cmd, doc); }) == ErrorKind::ConfigError;
    };
    CHECK(invalid("sigma-check", {{"kernel", "airy"}}));
    CHECK(invalid("sigma-check", {{"kernel", "jacobi"},
                                  {"params", {{"n", 4}, {"alpha", 0.25}, {"beta", 0.25}}},
                                  {"family", "left_interval"}}));
    CHECK(invalid("airy-crosscheck", {{"kernel", "airy"}, {"grid", {-5}}}));
    CHECK(invalid("airy-crosscheck", {{"kernel", "sine"}}));
    CHECK(invalid("det-curve", {{"kernel", "f21"}, {"params", demo_params()}, {"grid", {0.5}}}));
    auto loose = demo_params();
    loose.erase("strict");
    CHECK(invalid("schlesinger-check", {{"kernel", "f21"}, {"params", loose}, {"grid", {1}}}));
    CHECK(invalid("launch", {{"kernel", "sine"}}));
}

TEST_CASE("det-curve") {
    SUBCASE("sine on (0, 0.1) against the Fredholm series") {
        auto t = kdet::cli::cmd_det_curve(config("det-curve", {{"kernel", "sine"}, {"grid", {0.1}}}));
        double series = kdet::fredholm_series_oracle(kdet::SineKernel{}, kdet::IntervalUnion::single(0.0, 0.1), 4);
        CHECK(std::exp(column(t, 0, "log_det")) == doctest::Approx(series).epsilon(1e-10));
        CHECK(std::exp(column(t, 0, "log_det")) == doctest::Approx(0.96817).epsilon(1e-5));
    }
    SUBCASE("empty grid") {
        auto t = kdet::cli::cmd_det_curve(config("det-curve", {{"kernel", "sine"}, {"grid", json::array()}}));
        CHECK(t.rows.empty());
        CHECK(kdet::cli::render(t, Format::Csv) == golden("det_curve_empty.csv"));
    }
    SUBCASE("Airy at s = 5 is within the trace bound of 1") {
        auto t = kdet::cli::cmd_det_curve(config("det-curve", {{"kernel", "airy"}, {"grid", {5}}}));
        const double s = 5.0;
        double ai = gsl_sf_airy_Ai(s, GSL_PREC_DOUBLE), aip = gsl_sf_airy_Ai_deriv(s, GSL_PREC_DOUBLE);
        // ∫_s^∞ (Ai′² − x Ai²) dx
        double trace = (2 * s * s * ai * ai - 2 * s * aip * aip - ai * aip) / 3;
        double det = std::exp(column(t, 0, "log_det"));
        CHECK(std::abs(det - 1.0) < 1e-6);
        CHECK(std::abs(det - 1.0) <= trace * (1 + 1e-3));
        // d1 = R(s, s) ≈ A(s, s) when the kernel is this small
        CHECK(column(t, 0, "d1") == doctest::Approx(aip * aip - s * ai * ai).epsilon(1e-6));
    }
    SUBCASE("golden output and thread independence") {
        json doc{{"kernel", "sine"}, {"grid", {0.1, 0.5}}};
        auto c = config("det-curve", doc);
        std::string one = kdet::cli::render(kdet::cli::cmd_det_curve(c), Format::Csv);
        c.threads = 7;
        CHECK(kdet::cli::render(kdet::cli::cmd_det_curve(c), Format::Csv) == one);
        CHECK(one == golden("det_curve_sine.csv"));
    }
}

TEST_CASE("sigma-check") {
    SUBCASE("sine") {
        auto t = kdet::cli::cmd_sigma_check(config("sigma-check", {{"kernel", "sine"}, {"grid", {0.5, 1, 2}}}));
        CHECK(t.rows.size() == 3);
        CHECK(summary(t, "max_normalized_residual") < 1e-5);
    }
    SUBCASE("F21 strict demo parameters") {
        auto t = kdet::cli::cmd_sigma_check(
            config("sigma-check", {{"kernel", "f21"}, {"params", demo_params()}, {"grid", {1, 2}}}));
        CHECK(t.rows.size() == 2);
        CHECK(std::isfinite(summary(t, "max_normalized_residual")));
    }
    SUBCASE("Jacobi n = 4 on (s, 1/2)") {
        auto t = kdet::cli::cmd_sigma_check(
            config("sigma-check", {{"kernel", "jacobi"},
                                   {"params", {{"n", 4}, {"alpha", 0.25}, {"beta", 0.25}}},
                                   {"grid", {-0.2, 0, 0.2}}}));
        CHECK(summary(t, "max_normalized_residual") < 1e-5);
    }
    SUBCASE("header") {
        auto t = kdet::cli::cmd_sigma_check(config("sigma-check", {{"kernel", "sine"}}));
        CHECK(kdet::cli::render(t, Format::Csv) == golden("sigma_check_header.csv"));
    }
}

TEST_CASE("airy-crosscheck") {
    auto t = kdet::cli::cmd_airy_crosscheck(config("airy-crosscheck", {{"kernel", "airy"}, {"grid", {0, 2}}}));
    REQUIRE(t.rows.size() == 2);
    CHECK(std::abs(column(t, 0, "diff")) < 1e-5);
    double ai2 = gsl_sf_airy_Ai(2.0, GSL_PREC_DOUBLE);
    CHECK(std::abs(column(t, 1, "u_pii") / -ai2 - 1.0) < 0.01);
    CHECK(std::abs(column(t, 1, "u_fredholm") / -ai2 - 1.0) < 0.01);

    auto single = kdet::cli::cmd_airy_crosscheck(config("airy-crosscheck", {{"kernel", "airy"}, {"grid", {1}}}));
    CHECK(single.rows.size() == 1);
    auto empty = kdet::cli::cmd_airy_crosscheck(config("airy-crosscheck", {{"kernel", "airy"}}));
    CHECK(kdet::cli::render(empty, Format::Csv) == golden("airy_crosscheck_header.csv"));
}

TEST_CASE("schlesinger-check") {
    SUBCASE("demo parameters") {
        auto t = kdet::cli::cmd_schlesinger_check(
            config("schlesinger-check", {{"kernel", "f21"}, {"params", demo_params()}, {"grid", "1:2:5"}}));
        CHECK(t.rows.size() == 5);
        CHECK(summary(t, "max_tau_error") < 1e-4);
        CHECK(summary(t, "max_drift") < 1e-7);
        CHECK(summary(t, "max_invariant_error") < 1e-7);
    }
    SUBCASE("start inside the grid, flows in both directions") {
        auto t = kdet::cli::cmd_schlesinger_check(config(
            "schlesinger-check",
            {{"kernel", "f21"}, {"params", demo_params()}, {"grid", {0.8, 1.2, 2}}, {"s_start", 1.0}}));
        CHECK(t.rows.size() == 3);
        CHECK(column(t, 0, "s") == 0.8);
        CHECK(summary(t, "max_tau_error") < 1e-4);
    }
    SUBCASE("synthetic system with C = 0") {
        auto c = config("schlesinger-check",
                        {{"kernel", "f21"}, {"params", demo_params()}, {"grid", {1, 2}}, {"synthetic_zero_c", true}});
        auto t = kdet::cli::cmd_schlesinger_check(c);
        CHECK(summary(t, "max_drift") == 0.0);
        CHECK(kdet::cli::render(t, Format::Json) == golden("schlesinger_zero_c.json"));
        auto parsed = json::parse(kdet::cli::render(t, Format::Json));
        CHECK(parsed["rows"][0][2].is_null());
        CHECK(parsed["columns"].size() == 6);
    }
    SUBCASE("pole collision") {
        auto c = config("schlesinger-check",
                        {{"kernel", "f21"}, {"params", demo_params()}, {"grid", {0.5, 0.75}}, {"s_start", 1}});
        CHECK(error_kind([&] { kdet::cli::cmd_schlesinger_check(c); }) == ErrorKind::PoleCollision);
    }
    SUBCASE("header") {
        auto t = kdet::cli::cmd_schlesinger_check(
            config("schlesinger-check", {{"kernel", "f21"}, {"params", demo_params()}}));
        CHECK(kdet::cli::render(t, Format::Csv) == golden("schlesinger_check_header.csv"));
    }
}

TEST_CASE("kernel-eval") {
    auto t = kdet::cli::cmd_kernel_eval(
        config("kernel-eval", {{"kernel", "sine"}, {"grid", {0, 0.5, 1}}, {"y_grid", {0.25, 1}}}));
    CHECK(kdet::cli::render(t, Format::Csv) == golden("kernel_eval_sine.csv"));
    // sin(x − y)/(π(x − y)), 1/π on the diagonal
    CHECK(column(t, 5, "K") == doctest::Approx(1.0 / M_PI).epsilon(1e-15));
    CHECK(column(t, 0, "K") == doctest::Approx(std::sin(0.25) / (M_PI * 0.25)).epsilon(1e-14));
    auto diag = kdet::cli::cmd_kernel_eval(config("kernel-eval", {{"kernel", "airy"}, {"grid", {0}}}));
    double ai = gsl_sf_airy_Ai(0.0, GSL_PREC_DOUBLE), aip = gsl_sf_airy_Ai_deriv(0.0, GSL_PREC_DOUBLE);
    CHECK(column(diag, 0, "K") == doctest::Approx(aip * aip).epsilon(1e-12));
    auto near = config("kernel-eval", {{"kernel", "sine"}, {"grid", {0.5}}, {"y_grid", {0.5 + 1e-10}}});
    CHECK(error_kind([&] { kdet::cli::cmd_kernel_eval(near); }) == ErrorKind::NearDiagonal);
}

TEST_CASE("JSON rendering") {
    kdet::cli::Table t{"x", {"a \"quoted\" note"}, {"a", "b"}, {{0.1, std::numeric_limits<double>::infinity()}}, {{"m", 2}}};
    auto parsed = json::parse(kdet::cli::render(t, Format::Json));
    CHECK(parsed["comments"][0] == "a \"quoted\" note");
    CHECK(parsed["rows"][0][0].get<double>() == 0.1);
    CHECK(parsed["rows"][0][1].is_null());
    CHECK(parsed["summary"]["m"] == 2.0);
    CHECK(kdet::cli::render(t, Format::Csv) == "# a \"quoted\" note\na,b\n0.10000000000000001,inf\n# summary: m=2\n");
}
