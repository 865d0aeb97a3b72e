#include <cmath>
#include <numbers>

#include "kdet/specfun.hpp"

namespace kdet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kAip0 = 0.258819403792806798405183560189203963L;  // −Ai′(0)

// Maclaurin series in extended precision; used on [−8, 1).
AiryValues airy_maclaurin(double xd) {
    long double x = xd, x3 = x * x * x;
    long double f = 1.0L, fp = 0.0L, g = x, gp = 1.0L;
    long double fk = 1.0L, fpk = x * x / 2.0L, gk = x, gpk = 1.0L;
    fp = fpk;
    for (int k = 1; k < 400; ++k) {
        long double kk = k;
        fk *= x3 / ((3 * kk - 1) * (3 * kk));
        gk *= x3 / ((3 * kk) * (3 * kk + 1));
        gpk *= x3 / ((3 * kk) * (3 * kk - 2));
        if (k >= 2) {
            fpk *= x3 / ((3 * kk - 3) * (3 * kk - 1));
            fp += fpk;
        }
        f += fk;
        g += gk;
        gp += gpk;
        long double scale = std::fabs(f) + std::fabs(g) + std::fabs(fp) + std::fabs(gp);
        if (std::fabs(fk) + std::fabs(gk) + std::fabs(fpk) + std::fabs(gpk) < 1e-22L * scale && k > 3) break;
    }
    return {static_cast<double>(kAi0 * f - kAip0 * g), static_cast<double>(kAi0 * fp - kAip0 * gp)};
}

// e^{ζ} K_ν(ζ) = ∫₀^∞ exp(−ζ(cosh t − 1)) cosh(νt) dt by the trapezoidal rule,
// which converges geometrically for this entire, rapidly decaying integrand.
double scaled_bessel_k(double nu, double zeta) {
    constexpr double h = 0.05;
    double sum = 0.5;
    for (int k = 1; k < 20000; ++k) {
        double t = k * h;
        double e = zeta * (std::cosh(t) - 1.0);
        double term = std::exp(-e) * std::cosh(nu * t);
        sum += term;
        if (e > 50.0 && term < 1e-18 * sum) break;
    }
    return sum * h;
}

AiryValues airy_positive(double x) {
    double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    double e = std::exp(-zeta);
    double ai = e / kPi * std::sqrt(x / 3.0) * scaled_bessel_k(1.0 / 3.0, zeta);
    double aip = -e * x / (kPi * std::sqrt(3.0)) * scaled_bessel_k(2.0 / 3.0, zeta);
    return {ai, aip};
}

// Oscillatory asymptotic expansion for x < −8.
AiryValues airy_negative_asymptotic(double x) {
    double X = -x;
    double zeta = 2.0 / 3.0 * X * std::sqrt(X);
    double u[64], v[64];
    u[0] = 1.0;
    v[0] = 1.0;
    for (int k = 1; k < 64; ++k) {
        u[k] = u[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
        v[k] = -(6.0 * k + 1) / (6.0 * k - 1) * u[k];
    }
    double pu = 0, qu = 0, pv = 0, qv = 0;
    double zp = 1.0, last = INFINITY;
    for (int k = 0; k < 63; ++k) {
        double mag = std::abs(u[k]) * zp;
        if (mag > last || mag < 1e-18) break;
        last = mag;
        double sgn = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            pu += sgn * u[k] * zp;
            pv += sgn * v[k] * zp;
        } else {
            qu += sgn * u[k] * zp;
            qv += sgn * v[k] * zp;
        }
        zp /= zeta;
    }
    double phase = zeta - kPi / 4.0;
    double c = std::cos(phase), s = std::sin(phase);
    double root = std::sqrt(kPi);
    double ai = std::pow(X, -0.25) / root * (c * pu + s * qu);
    double aip = std::pow(X, 0.25) / root * (s * pv - c * qv);
    return {ai, aip};
}

}  // namespace

AiryValues airy(double x) {
    if (x >= 1.0) return airy_positive(x);
    if (x >= -8.0) return airy_maclaurin(x);
    return airy_negative_asymptotic(x);
}

}  // namespace kdet
