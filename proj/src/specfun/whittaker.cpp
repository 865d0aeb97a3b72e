#include <cmath>

#include "kdet/errors.hpp"
#include "kdet/quadrature.hpp"
#include "kdet/specfun.hpp"

namespace kdet {

namespace {

constexpr double kIntegralMinRe = 0.25;
constexpr double kPanelEnd = 80.0;

// ∫₀^δ u^{a−1} e^{−u}(1+u/x)^p du by termwise integration of the Taylor
// series of e^{−u}(1+u/x)^p; requires δ ≤ x/2.
cplx head_integral(cplx a, cplx p, double x, double delta) {
    constexpr int kTerms = 200;
    cplx binom[kTerms];
    binom[0] = 1.0;
    for (int k = 1; k < kTerms; ++k) binom[k] = binom[k - 1] * (p - static_cast<double>(k - 1)) / (k * x);
    cplx sum = 0.0;
    cplx delta_pow = std::exp(a * std::log(delta));
    int small = 0;
    for (int k = 0; k < kTerms; ++k) {
        cplx d = 0.0;
        double e = 1.0;  // (−1)^j / j!
        for (int j = 0; j <= k; ++j) {
            d += e * binom[k - j];
            e *= -1.0 / (j + 1);
        }
        cplx term = d * delta_pow / (a + static_cast<double>(k));
        sum += term;
        delta_pow *= delta;
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            if (++small >= 3) return sum;
        } else {
            small = 0;
        }
    }
    throw Error(ErrorKind::NoConvergence, "whittaker_w", "head series of the integral did not converge");
}

cplx integrand(cplx a, cplx p, double x, double u) {
    return std::exp(-u + (a - 1.0) * std::log(u) + p * std::log1p(u / x));
}

cplx panel(cplx a, cplx p, double x, double lo, double hi, const QuadRule& rule) {
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    cplx acc = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * integrand(a, p, x, mid + half * rule.nodes[i]);
    return acc * half;
}

// Adaptive refinement: accept a panel when the 24- and 32-point rules agree.
cplx adaptive_panel(cplx a, cplx p, double x, double lo, double hi, const QuadRule& coarse,
                    const QuadRule& fine, int depth) {
    cplx c = panel(a, p, x, lo, hi, coarse);
    cplx f = panel(a, p, x, lo, hi, fine);
    if (std::abs(f - c) <= 1e-15 * std::abs(f) + 1e-300 || depth > 30) return f;
    double mid = 0.5 * (lo + hi);
    return adaptive_panel(a, p, x, lo, mid, coarse, fine, depth + 1) +
           adaptive_panel(a, p, x, mid, hi, coarse, fine, depth + 1);
}

// I(a, p, x) = ∫₀^∞ e^{−u} u^{a−1} (1+u/x)^p du, Re a > 0.
cplx tricomi_integral(cplx a, cplx p, double x) {
    static const QuadRule coarse = gauss_legendre_rule(24);
    static const QuadRule fine = gauss_legendre_rule(32);
    static const QuadRule laguerre = gauss_laguerre_rule(32);
    double delta = std::min(1.0, 0.5 * x);
    cplx total = head_integral(a, p, x, delta);
    double lo = delta;
    while (lo < kPanelEnd) {
        double hi = std::min(2.0 * lo, kPanelEnd);
        total += adaptive_panel(a, p, x, lo, hi, coarse, fine, 0);
        lo = hi;
    }
    cplx tail = 0.0;
    for (size_t i = 0; i < laguerre.nodes.size(); ++i) {
        double u = kPanelEnd + laguerre.nodes[i];
        tail += laguerre.weights[i] * std::exp((a - 1.0) * std::log(u) + p * std::log1p(u / x));
    }
    return total + std::exp(-kPanelEnd) * tail;
}

cplx tricomi_direct(cplx a, cplx b, double x) {
    cplx I = tricomi_integral(a, b - a - 1.0, x);
    return std::exp(-a * std::log(x) - log_gamma(a)) * I;
}

}  // namespace

cplx hyperu(cplx a, cplx b, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::DomainError, "hyperu", "x must be positive");
    if (a.real() >= kIntegralMinRe) return tricomi_direct(a, b, x);
    cplx a2 = a - b + 1.0;
    if (a2.real() >= kIntegralMinRe) return std::exp((1.0 - b) * std::log(x)) * tricomi_direct(a2, 2.0 - b, x);
    // Downward recurrence in a:
    // U(a−1) = −(b − 2a − x)U(a) − a(a − b + 1)U(a + 1).
    int m = static_cast<int>(std::ceil(kIntegralMinRe - a.real()));
    cplx top = a + static_cast<double>(m);
    cplx u_hi = tricomi_direct(top + 1.0, b, x);
    cplx u_cur = tricomi_direct(top, b, x);
    for (int k = 0; k < m; ++k) {
        cplx ak = top - static_cast<double>(k);
        cplx u_lo = -(b - 2.0 * ak - x) * u_cur - ak * (ak - b + 1.0) * u_hi;
        u_hi = u_cur;
        u_cur = u_lo;
    }
    return u_cur;
}

cplx whittaker_w(cplx kappa, cplx mu, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::DomainError, "whittaker_w", "x must be positive");
    cplx u = hyperu(mu - kappa + 0.5, 1.0 + 2.0 * mu, x);
    return std::exp(-0.5 * x + (mu + 0.5) * std::log(x)) * u;
}

}  // namespace kdet
