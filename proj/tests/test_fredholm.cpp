#include <doctest.h>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <numbers>

#include "kdet/errors.hpp"
#include "kdet/fredholm.hpp"
#include "kdet/quadrature.hpp"
#include "identity_checks.hpp"
#include "support.hpp"

using kdet::ErrorKind;
using kdet::Grid;
using kdet::GridOptions;
using kdet::HypParams;
using kdet::IntervalUnion;
using kdet::KernelSpec;

namespace {

const nlohmann::json& oracle() {
    static const nlohmann::json data = kdet_test::load_fixture("fredholm_oracle.json");
    return data;
}

template <class F>
ErrorKind error_kind(F&& f) {
    try {
        f();
    } catch (const kdet::Error& e) {
        return e.kind();
    }
    FAIL("no kdet::Error raised");
    return ErrorKind::ConfigError;
}

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kPi = std::numbers::pi;

const HypParams kRealStrict = HypParams::make(0.3, 0.2, 0.25, 0.15, true);
const HypParams kComplexStrict = HypParams::make({0.3, 0.4}, {0.3, -0.4}, {0.2, 0.1}, {0.2, -0.1}, true);

double sine_log_det(double t, int order) {
    return kdet::log_det(kdet::discretize(kdet::SineKernel{}, IntervalUnion::single(0, t), order));
}

}  // namespace

TEST_CASE("gauss_legendre_rule") {
    auto r1 = kdet::gauss_legendre_rule(1);
    REQUIRE(r1.nodes.size() == 1);
    CHECK(std::abs(r1.nodes[0]) < 1e-15);
    CHECK(r1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

    auto r2 = kdet::gauss_legendre_rule(2);
    std::vector<double> x2 = r2.nodes;
    std::sort(x2.begin(), x2.end());
    CHECK(std::abs(x2[0] + 1 / std::sqrt(3.0)) < 1e-15);
    CHECK(std::abs(x2[1] - 1 / std::sqrt(3.0)) < 1e-15);
    CHECK(std::abs(r2.weights[0] - 1) < 1e-15);

    auto r16 = kdet::gauss_legendre_rule(16);
    double s = 0;
    for (size_t i = 0; i < r16.nodes.size(); ++i) s += r16.weights[i] * std::pow(r16.nodes[i], 30);
    CHECK(std::abs(s - 2.0 / 31) < 1e-13);

    for (int n : {3, 7, 64, 200, 512}) {
        auto r = kdet::gauss_legendre_rule(n);
        double total = 0, odd = 0, top = 0;
        for (int i = 0; i < n; ++i) {
            total += r.weights[i];
            odd += r.weights[i] * r.nodes[i];
            top += r.weights[i] * std::pow(r.nodes[i], 2 * n - 2);
        }
        CHECK(std::abs(total - 2) < 1e-13);
        CHECK(std::abs(odd) < 1e-13);
        // degree 2n−1 is odd and integrates to 0; check the even neighbour as well
        if (n <= 64) CHECK(std::abs(top - 2.0 / (2 * n - 1)) < 1e-12);
    }
    CHECK(error_kind([] { kdet::gauss_legendre_rule(513); }) == ErrorKind::OrderTooLarge);
    CHECK(error_kind([] { kdet::gauss_legendre_rule(0); }) == ErrorKind::OrderTooLarge);
}

TEST_CASE("interval unions") {
    CHECK(error_kind([] { IntervalUnion::make({1, 0}); }) == ErrorKind::InvalidUnion);
    CHECK(error_kind([] { IntervalUnion::make({0, 1, 1, 2}); }) == ErrorKind::InvalidUnion);
    CHECK(error_kind([] { IntervalUnion::make({0, 1, 2}); }) == ErrorKind::InvalidUnion);
    CHECK(error_kind([] { IntervalUnion::make({0, kInf, 3, 4}); }) == ErrorKind::InvalidUnion);
    CHECK(error_kind([] { IntervalUnion::make({0, std::nan("")}); }) == ErrorKind::InvalidUnion);
    auto J = IntervalUnion::make({-kInf, -1, 2, kInf});
    CHECK(J.count() == 2);
    CHECK(J.contains(-5));
    CHECK_FALSE(J.contains(0));
    CHECK(error_kind([&] { J.with_endpoint(1, 3); }) == ErrorKind::InvalidUnion);

    KernelSpec f21 = kdet::F21Kernel{kRealStrict};
    CHECK(error_kind([&] { kdet::check_union(f21, IntervalUnion::single(0.5, 2)); }) == ErrorKind::InvalidUnion);
    CHECK(error_kind([&] { kdet::check_union(f21, IntervalUnion::single(-1, 1)); }) == ErrorKind::InvalidUnion);
    kdet::check_union(f21, IntervalUnion::make({0.6, 1, 2, kInf}));
    CHECK(error_kind([] { kdet::check_union(kdet::make_jacobi(3, 0.5, 0.5), IntervalUnion::single(0, 0.7)); }) ==
          ErrorKind::InvalidUnion);
    CHECK(error_kind([] { kdet::check_union(kdet::make_whittaker(0.4, 0.55), IntervalUnion::single(0, 1)); }) ==
          ErrorKind::InvalidUnion);
}

TEST_CASE("build_grid") {
    Grid g = kdet::build_grid(IntervalUnion::single(-1, 1), 2);
    REQUIRE(g.nodes.size() == 2);
    CHECK(std::abs(g.nodes[0] + 1 / std::sqrt(3.0)) < 1e-15);
    CHECK(std::abs(g.nodes[1] - 1 / std::sqrt(3.0)) < 1e-15);
    CHECK(std::abs(g.weights[0] - 1) < 1e-15);
    CHECK(std::abs(g.weights[1] - 1) < 1e-15);

    for (int n : {1, 5, 32}) {
        Grid u = kdet::build_grid(IntervalUnion::make({0, 2, 3, 5}), n);
        CHECK(u.nodes.size() == static_cast<size_t>(2 * n));
        double total = 0;
        for (double w : u.weights) total += w;
        CHECK(std::abs(total - 4) < 1e-12);
    }

    Grid r = kdet::build_grid(IntervalUnion::single(1, kInf), 64);
    double s = 0;
    for (size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] / (r.nodes[i] * r.nodes[i]);
    CHECK(std::abs(s - 1) < 1e-10);

    Grid left = kdet::build_grid(IntervalUnion::make({-kInf, -1}), 64);
    s = 0;
    for (size_t i = 0; i < left.nodes.size(); ++i) s += left.weights[i] / (left.nodes[i] * left.nodes[i]);
    CHECK(std::abs(s - 1) < 1e-10);

    Grid t = kdet::build_grid(IntervalUnion::single(1, kInf), 64, kdet::InfiniteMap::Truncation, 50);
    for (double x : t.nodes) CHECK(x < 50);

    // Graded endpoint: ∫₀¹ x^{-1/2} dx = 2 with power 2 is exact for the mapped polynomial.
    GridOptions opt;
    opt.order = 16;
    opt.graded = {{0.0, 2}};
    Grid gr = kdet::build_grid(IntervalUnion::single(0, 1), opt);
    s = 0;
    for (size_t i = 0; i < gr.nodes.size(); ++i) s += gr.weights[i] / std::sqrt(gr.nodes[i]);
    CHECK(std::abs(s - 2) < 1e-13);

    // Power map: ∫₁^∞ x^{-2.5} dx = 2/3 with power 2 (smooth in t).
    opt = GridOptions{};
    opt.order_infinite = 64;
    opt.infinite_power = 2;
    Grid pm = kdet::build_grid(IntervalUnion::single(1, kInf), opt);
    s = 0;
    for (size_t i = 0; i < pm.nodes.size(); ++i) s += pm.weights[i] * std::pow(pm.nodes[i], -2.5);
    CHECK(std::abs(s - 2.0 / 3) < 1e-12);
}

TEST_CASE("discretize") {
    auto zero = kdet::discretize(kdet::ZeroKernel{}, IntervalUnion::single(0, 1), 16);
    CHECK(zero.matrix.cwiseAbs().maxCoeff() == 0.0);

    auto sine = kdet::discretize(kdet::SineKernel{}, IntervalUnion::single(0, 0.1), 8);
    CHECK(sine.nodes.size() == 8);
    CHECK(std::abs(sine.matrix.trace() - 0.1 / kPi) < 1e-12);
    CHECK((sine.matrix - sine.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    auto airy = kdet::discretize(kdet::AiryKernel{}, IntervalUnion::single(3, kInf), 128);
    CHECK((airy.matrix - airy.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& e : oracle()["airy_trace"]) {
        double s = e["s"], want = e["trace"];
        auto sys = kdet::discretize(kdet::AiryKernel{}, IntervalUnion::single(s, kInf), 128);
        INFO("s = " << s);
        CHECK(std::abs(sys.matrix.trace() - want) < 1e-8);
    }

    // Airy trace against adaptive quadrature of the library's own kernel_diag.
    gsl_set_error_handler_off();
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(1000);
    gsl_function f;
    f.function = [](double x, void*) { return kdet::kernel_diag(kdet::AiryKernel{}, x); };
    f.params = nullptr;
    double quad = 0, err = 0;
    gsl_integration_qagiu(&f, 3.0, 1e-14, 1e-11, 1000, ws, &quad, &err);
    gsl_integration_workspace_free(ws);
    CHECK(std::abs(airy.matrix.trace() - quad) < 1e-8);

    auto jac = kdet::discretize(kdet::make_jacobi(4, 0.25, 0.25), IntervalUnion::single(-0.2, 0.5), 32);
    CHECK((jac.matrix - jac.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    auto f21 = kdet::discretize(kdet::F21Kernel{kComplexStrict}, IntervalUnion::single(1, kInf), 32);
    CHECK(f21.nodes.size() == 64);
    CHECK(f21.matrix.allFinite());

    // Threads do not change the matrix.
    auto single = kdet::discretize(kdet::F21Kernel{kRealStrict}, IntervalUnion::make({-3, -1, 1, kInf}), 24);
    GridOptions opt = kdet::default_grid_options(kdet::F21Kernel{kRealStrict}, IntervalUnion::make({-3, -1, 1, kInf}), 24);
    opt.threads = 4;
    auto multi = kdet::discretize(kdet::F21Kernel{kRealStrict}, IntervalUnion::make({-3, -1, 1, kInf}), opt);
    CHECK((single.matrix - multi.matrix).cwiseAbs().maxCoeff() == 0.0);

    CHECK(error_kind([] { kdet::discretize(kdet::F21Kernel{kRealStrict}, IntervalUnion::single(0.2, 0.5), 8); }) ==
          ErrorKind::InvalidUnion);
    CHECK(error_kind([] { kdet::discretize(kdet::SineKernel{}, IntervalUnion::single(0, 1), 600); }) ==
          ErrorKind::OrderTooLarge);
}

TEST_CASE("truncation reports a tail bound") {
    GridOptions opt;
    opt.infinite_map = kdet::InfiniteMap::Truncation;
    opt.x_max = 40;
    auto J = IntervalUnion::single(1, kInf);
    auto trunc = kdet::discretize(kdet::F21Kernel{kRealStrict}, J, opt);
    auto mapped = kdet::discretize(kdet::F21Kernel{kRealStrict}, J, kdet::default_grid_options(kdet::F21Kernel{kRealStrict}, J));
    CHECK(trunc.tail_bound > 0);
    CHECK(mapped.tail_bound == 0);
    double diff = std::abs(kdet::log_det(trunc) - kdet::log_det(mapped));
    INFO("diff " << diff << " bound " << trunc.tail_bound);
    CHECK(diff < 2 * trunc.tail_bound + 1e-8);
}

TEST_CASE("log_det") {
    CHECK(kdet::log_det(kdet::discretize(kdet::ZeroKernel{}, IntervalUnion::single(0, 1), 8)) == 0.0);
    auto one = kdet::discretize(kdet::ConstantKernel{1.0}, IntervalUnion::single(0, 0.5), 16);
    CHECK(std::abs(kdet::log_det(one) - std::log(0.5)) < 1e-13);

    double series = kdet::fredholm_series_oracle(kdet::SineKernel{}, IntervalUnion::single(0, 0.5), 4);
    CHECK(std::abs(sine_log_det(0.5, 64) - std::log(series)) < 1e-10);

    for (const auto& e : oracle()["sine"]) {
        double t = e["t"], want = e["det"];
        INFO("t = " << t);
        CHECK(std::abs(sine_log_det(t, 64) - std::log(want)) < 1e-12);
    }
    for (const auto& e : oracle()["airy"]) {
        double s = e["s"], want = e["det"];
        auto sys = kdet::discretize(kdet::AiryKernel{}, IntervalUnion::single(s, kInf), 64);
        INFO("s = " << s);
        CHECK(std::abs(kdet::log_det(sys) - std::log(want)) < 1e-10);
    }

    auto singular = kdet::discretize(kdet::ConstantKernel{1.0}, IntervalUnion::single(0, 1), 8);
    CHECK(error_kind([&] { kdet::log_det(singular); }) == ErrorKind::SingularResolvent);
    auto negative = kdet::discretize(kdet::ConstantKernel{2.0}, IntervalUnion::single(0, 1), 8);
    CHECK(error_kind([&] { kdet::log_det(negative); }) == ErrorKind::DomainError);
    CHECK(std::abs(kdet::fredholm_det(negative) + 1) < 1e-13);

    // Deterministic for fixed inputs.
    CHECK(sine_log_det(2, 48) == sine_log_det(2, 48));
}

TEST_CASE("fredholm_series_oracle") {
    CHECK(kdet::fredholm_series_oracle(kdet::ZeroKernel{}, IntervalUnion::single(0, 1), 4) == 1.0);
    for (double c : {0.05, 0.2, 0.29}) {
        double d = kdet::fredholm_series_oracle(kdet::ConstantKernel{1.0}, IntervalUnion::single(0, c), 4);
        CHECK(std::abs(d - (1 - c)) < 1e-12);
    }
    double sine = kdet::fredholm_series_oracle(kdet::SineKernel{}, IntervalUnion::single(0, 0.1), 4);
    CHECK(std::abs(sine - 0.9681690) < 5e-7);
    CHECK(std::abs(std::log(sine) - sine_log_det(0.1, 64)) < 1e-9);
    CHECK(std::abs(sine - oracle()["sine"][0]["det"].get<double>()) < 1e-12);

    CHECK(error_kind([] { kdet::fredholm_series_oracle(kdet::SineKernel{}, IntervalUnion::single(0, 2), 4); }) ==
          ErrorKind::OracleInapplicable);

    // Two-interval unions and non-classical kernels with small trace.
    auto J2 = IntervalUnion::make({0, 0.2, 0.5, 0.7});
    double two = kdet::fredholm_series_oracle(kdet::SineKernel{}, J2, 4);
    CHECK(std::abs(std::log(two) - kdet::log_det(kdet::discretize(kdet::SineKernel{}, J2, 32))) < 1e-10);

    struct Case {
        KernelSpec spec;
        IntervalUnion J;
    };
    const Case cases[] = {
        {kdet::F21Kernel{kRealStrict}, IntervalUnion::single(2, 3)},
        {kdet::F21Kernel{kComplexStrict}, IntervalUnion::make({-0.4, -0.2, 1.5, 2})},
        {kdet::make_whittaker(0.4, 0.55), IntervalUnion::single(1, 1.5)},
        {kdet::make_confluent({0.2, 0.3}), IntervalUnion::single(0.5, 0.8)},
        {kdet::make_jacobi(4, 0.25, 0.25), IntervalUnion::single(0.47, 0.5)},
        {kdet::AiryKernel{}, IntervalUnion::single(1.5, kInf)},
    };
    for (const auto& c : cases) {
        INFO(kdet::kernel_name(c.spec));
        double want = kdet::fredholm_series_oracle(c.spec, c.J, 4);
        double got = kdet::log_det(kdet::discretize(c.spec, c.J, 48));
        CHECK(std::abs(got - std::log(want)) < 1e-9);
    }
}

TEST_CASE("resolvent_diag") {
    auto zero = kdet::discretize(kdet::ZeroKernel{}, IntervalUnion::single(0, 1), 8);
    CHECK(kdet::resolvent_diag(zero, 0.3) == 0.0);
    auto c = kdet::discretize(kdet::ConstantKernel{1.0}, IntervalUnion::single(0, 0.5), 16);
    CHECK(std::abs(kdet::resolvent_diag(c, 0.2) - 2) < 1e-12);
    CHECK(std::abs(kdet::resolvent_diag(c, 0.0) - 2) < 1e-12);

    auto airy = [](double s) { return kdet::log_det(kdet::discretize(kdet::AiryKernel{}, IntervalUnion::single(s, kInf), 64)); };
    auto sys = kdet::discretize(kdet::AiryKernel{}, IntervalUnion::single(0, kInf), 64);
    double h = 1e-3;
    double fd = (airy(h) - airy(-h)) / (2 * h);
    CHECK(std::abs(kdet::resolvent_diag(sys, 0.0) - fd) < 1e-6);

    auto singular = kdet::discretize(kdet::ConstantKernel{1.0}, IntervalUnion::single(0, 1), 8);
    CHECK(error_kind([&] { kdet::resolvent_diag(singular, 0.5); }) == ErrorKind::SingularResolvent);
}

TEST_CASE("logdet_derivatives") {
    for (double s : {-3.0, 0.0, 2.0}) CHECK(kdet::logdet_derivatives(kdet::AiryKernel{}, s, 1).d1 >= 0);
    for (double s : {0.8, 1.5, 4.0}) {
        CHECK(kdet::logdet_derivatives(kdet::F21Kernel{kComplexStrict}, s, 1).d1 >= 0);
        CHECK(kdet::logdet_derivatives(kdet::F21Kernel{kRealStrict}, s, 1).d1 >= 0);
    }
    for (double s : {0.5, 2.0}) CHECK(kdet::logdet_derivatives(kdet::make_whittaker(0.4, 0.55), s, 1).d1 >= 0);

    double d1 = kdet::logdet_derivatives(kdet::AiryKernel{}, 4.0, 1).d1;
    double a44 = kdet::kernel_diag(kdet::AiryKernel{}, 4.0);
    CHECK(std::abs(d1 / a44 - 1) < 0.01);

    // Right endpoint of (0, t): d/dt ln det = −R(t, t) = −1/π − t/π² + O(t³); the
    // t/π² term is 5e-3 at t = 0.05, so the leading term alone is not within 1e-3.
    auto J = IntervalUnion::single(0, 0.05);
    auto dt = kdet::logdet_derivatives(kdet::SineKernel{}, J, 1, 1, 1e-3, GridOptions{});
    CHECK(std::abs(dt.d1 + 1 / kPi + 0.05 / (kPi * kPi)) < 2e-4);
    CHECK(std::abs(dt.d1 + 1 / kPi) < 6e-3);

    // Second and third derivatives against differences of the sine oracle log det.
    double t = 1.0, step = 1e-2;
    auto d = kdet::logdet_derivatives(kdet::SineKernel{}, IntervalUnion::single(0, t), 1, 2, 1e-3, GridOptions{});
    double fm = sine_log_det(t - step, 64), f0 = sine_log_det(t, 64), fp = sine_log_det(t + step, 64);
    CHECK(std::abs(d.d1 - (fp - fm) / (2 * step)) < 1e-4);
    CHECK(std::abs(d.d2 - (fp - 2 * f0 + fm) / (step * step)) < 1e-3);
    auto dp = kdet::logdet_derivatives(kdet::SineKernel{}, IntervalUnion::single(0, t + step), 1, 2, 1e-3, GridOptions{});
    auto dm = kdet::logdet_derivatives(kdet::SineKernel{}, IntervalUnion::single(0, t - step), 1, 2, 1e-3, GridOptions{});
    CHECK(std::abs(d.d3 - (dp.d2 - dm.d2) / (2 * step)) < 1e-3);

    CHECK(error_kind([] { kdet::logdet_derivatives(kdet::AiryKernel{}, 0.0, 3); }) == ErrorKind::DomainError);
    CHECK(error_kind([] { kdet::logdet_derivatives(kdet::AiryKernel{}, 0.0, 2, 0.1); }) == ErrorKind::DomainError);
    CHECK(error_kind([] { kdet::logdet_derivatives(kdet::AiryKernel{}, 0.0, 2, 1e-6); }) == ErrorKind::DomainError);
}

TEST_CASE("spectral convergence on finite J") {
    struct Case {
        KernelSpec spec;
        IntervalUnion J;
    };
    const Case cases[] = {
        {kdet::SineKernel{}, IntervalUnion::single(0, 6)},
        {kdet::F21Kernel{kRealStrict}, IntervalUnion::single(0.7, 3)},
        {kdet::make_whittaker(0.4, 0.55), IntervalUnion::single(0.3, 4)},
    };
    for (const auto& c : cases) {
        INFO(kdet::kernel_name(c.spec));
        double ref = kdet::log_det(kdet::discretize(c.spec, c.J, 96));
        double prev = std::abs(kdet::log_det(kdet::discretize(c.spec, c.J, 4)) - ref);
        for (int n : {8, 16}) {
            double err = std::abs(kdet::log_det(kdet::discretize(c.spec, c.J, n)) - ref);
            INFO("order " << n << ": " << prev << " -> " << err);
            CHECK(err * 4 <= prev);
            prev = err;
        }
    }
}

TEST_CASE("gap probabilities lie in (0, 1] and shrink as J grows") {
    struct Case {
        KernelSpec spec;
        std::vector<IntervalUnion> nested;
    };
    const Case cases[] = {
        {kdet::SineKernel{}, {IntervalUnion::single(0, 0.5), IntervalUnion::single(0, 1), IntervalUnion::single(-1, 2),
                              IntervalUnion::single(-2, 3)}},
        {kdet::AiryKernel{}, {IntervalUnion::single(3, kInf), IntervalUnion::single(1, kInf), IntervalUnion::single(-1, kInf),
                              IntervalUnion::single(-3, kInf)}},
        {kdet::F21Kernel{kComplexStrict},
         {IntervalUnion::single(4, kInf), IntervalUnion::single(1.5, kInf), IntervalUnion::make({-3, -1, 1.5, kInf}),
          IntervalUnion::make({-kInf, -1, 0.8, kInf})}},
        {kdet::F21Kernel{kRealStrict},
         {IntervalUnion::single(-0.3, 0.3), IntervalUnion::single(-0.45, 0.45), IntervalUnion::make({-0.45, 0.45, 0.6, 5})}},
    };
    for (const auto& c : cases) {
        INFO(kdet::kernel_name(c.spec));
        double prev = 0.0;
        for (const auto& J : c.nested) {
            double ld = kdet::log_det(kdet::discretize(c.spec, J, 64));
            CHECK(ld <= 1e-14);
            CHECK(ld <= prev + 1e-12);
            CHECK(std::isfinite(ld));
            prev = ld;
        }
    }
    for (double s : {-1.0, 0.0, 2.0}) {
        auto sys = kdet::discretize(kdet::AiryKernel{}, IntervalUnion::single(s, kInf), 48);
        auto ev = kdet::kernel_eigenvalues(sys);
        CHECK(ev.minCoeff() > -1e-12);
        CHECK(ev.maxCoeff() < 1.0);
    }
}

TEST_CASE("resolvent identity and integrable form of K") {
    for (const HypParams& p : {kRealStrict, kComplexStrict}) {
        double prev_r = kInf, prev_a = kInf;
        for (int order : {32, 64, 128}) {
            kdet_test::IdentityErrors e = kdet_test::identity_errors(p, order);
            INFO("order " << order << ": resolvent " << e.resolvent << ", integrable " << e.integrable);
            CHECK(e.resolvent < prev_r);
            CHECK(e.integrable < prev_a);
            prev_r = e.resolvent;
            prev_a = e.integrable;
        }
        CHECK(prev_r < 1e-3);
        CHECK(prev_a < 1e-3);
    }
}
