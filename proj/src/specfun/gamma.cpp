#include <cmath>
#include <numbers>

#include "kdet/errors.hpp"
#include "kdet/specfun.hpp"

namespace kdet {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients, g = 7, nine terms.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
    771.32342877765313,    -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7,
};

// Reduce x to r in (−1, 1] with x = r + 2m.
double reduce_period2(double x) {
    double r = std::fmod(x, 2.0);
    if (r <= -1.0) r += 2.0;
    if (r > 1.0) r -= 2.0;
    return r;
}

double sinpi_real(double x) {
    double r = reduce_period2(x);
    if (r == 0.0 || r == 1.0) return 0.0;
    if (r == 0.5) return 1.0;
    if (r == -0.5) return -1.0;
    return std::sin(kPi * r);
}

double cospi_real(double x) {
    double r = reduce_period2(x);
    if (r == 0.5 || r == -0.5) return 0.0;
    if (r == 0.0) return 1.0;
    if (r == 1.0) return -1.0;
    return std::cos(kPi * r);
}

cplx log_gamma_lanczos(cplx z) {
    // Valid for Re z ≥ 0.5.
    cplx zm = z - 1.0;
    cplx acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (zm + static_cast<double>(i));
    cplx t = zm + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (zm + 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace

bool is_nonpositive_integer(cplx z, double tol) {
    if (std::abs(z.imag()) > tol) return false;
    double r = std::round(z.real());
    return r <= 0.0 && std::abs(z.real() - r) <= tol;
}

cplx sin_pi(cplx z) {
    double x = z.real(), y = z.imag();
    return {sinpi_real(x) * std::cosh(kPi * y), cospi_real(x) * std::sinh(kPi * y)};
}

cplx cos_pi(cplx z) {
    double x = z.real(), y = z.imag();
    return {cospi_real(x) * std::cosh(kPi * y), -sinpi_real(x) * std::sinh(kPi * y)};
}

cplx log_sin_pi(cplx z) {
    double y = z.imag();
    if (std::abs(y) < 8.0) return std::log(sin_pi(z));
    const cplx i(0.0, 1.0);
    // sin(πz) = e^{∓iπz}(e^{±2iπz} − 1)/(±2i), written so the exponential is small.
    double x = reduce_period2(z.real());
    cplx zr(x, y);
    if (y > 0) return -i * kPi * zr + std::log(std::exp(2.0 * i * kPi * zr) - 1.0) - std::log(2.0 * i);
    return i * kPi * zr + std::log(1.0 - std::exp(-2.0 * i * kPi * zr)) - std::log(2.0 * i);
}

cplx log_gamma(cplx z) {
    if (is_nonpositive_integer(z))
        throw Error(ErrorKind::PoleAtNonpositiveInteger, "log_gamma", "argument is a pole of Gamma");
    if (z.real() >= 0.5) return log_gamma_lanczos(z);
    return std::log(kPi) - log_sin_pi(z) - log_gamma_lanczos(1.0 - z);
}

cplx gamma(cplx z) {
    if (is_nonpositive_integer(z))
        throw Error(ErrorKind::PoleAtNonpositiveInteger, "gamma", "argument is a pole of Gamma");
    if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 170.0) return std::tgamma(z.real());
    return std::exp(log_gamma(z));
}

cplx rgamma(cplx z) {
    if (is_nonpositive_integer(z)) return 0.0;
    if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 170.0) return 1.0 / std::tgamma(z.real());
    return std::exp(-log_gamma(z));
}

cplx log_gamma_bracket(const GammaBracket& b) {
    cplx acc = 0.0;
    for (cplx a : b.numerators) {
        if (is_nonpositive_integer(a))
            throw Error(ErrorKind::PoleAtNonpositiveInteger, "gamma_bracket", "numerator argument is a pole");
        acc += log_gamma(a);
    }
    for (cplx a : b.denominators) {
        if (is_nonpositive_integer(a))
            throw Error(ErrorKind::PoleAtNonpositiveInteger, "gamma_bracket", "denominator argument is a pole");
        acc -= log_gamma(a);
    }
    return acc;
}

cplx gamma_bracket(const GammaBracket& b) { return std::exp(log_gamma_bracket(b)); }

}  // namespace kdet
