#include <cmath>
#include <sstream>

#include "kdet/errors.hpp"
#include "kdet/kernels.hpp"

namespace kdet {

namespace {

constexpr double kPairTol = 1e-12;
constexpr double kLogCaseGap = 1e-6;

bool is_integer(double v) { return v == std::round(v); }

std::string describe(cplx a, cplx b) {
    std::ostringstream out;
    out << "(" << a << ", " << b << ")";
    return out.str();
}

}  // namespace

bool admissible_pair(cplx a, cplx b) {
    double scale = kPairTol * (1.0 + std::abs(a));
    bool real_pair = std::abs(a.imag()) <= scale && std::abs(b.imag()) <= scale;
    if (real_pair) {
        if (is_integer(a.real()) || is_integer(b.real())) return false;
        return std::floor(a.real()) == std::floor(b.real());
    }
    if (std::abs(b - std::conj(a)) > scale) return false;
    return true;  // a non-real conjugate pair is never integral
}

HypParams HypParams::make(cplx z, cplx zp, cplx w, cplx wp, bool strict) {
    const char* op = "HypParams";
    if (!admissible_pair(z, zp))
        throw Error(ErrorKind::DomainError, op, "(z, z') " + describe(z, zp) + " is not an admissible pair");
    if (!admissible_pair(w, wp))
        throw Error(ErrorKind::DomainError, op, "(w, w') " + describe(w, wp) + " is not an admissible pair");
    if (std::abs(z - zp) <= kLogCaseGap || std::abs(w - wp) <= kLogCaseGap)
        throw Error(ErrorKind::DomainError, op, "z = z' or w = w' (logarithmic case) is not supported");
    double s = (z + zp + w + wp).real();
    if (!(s > -1.0)) throw Error(ErrorKind::DomainError, op, "z + z' + w + w' must exceed -1");
    if (std::abs(s) < 1e-12) throw Error(ErrorKind::DomainError, op, "z + z' + w + w' = 0 is excluded");
    if (strict) {
        if (!(s > 0.0)) throw Error(ErrorKind::DomainError, op, "strict mode requires z + z' + w + w' > 0");
        if (!(std::abs(z + zp) < 1.0) || !(std::abs(w + wp) < 1.0))
            throw Error(ErrorKind::DomainError, op, "strict mode requires |z + z'| < 1 and |w + w'| < 1");
    }
    return HypParams(z, zp, w, wp, strict);
}

HypParams HypParams::unchecked(cplx z, cplx zp, cplx w, cplx wp) { return HypParams(z, zp, w, wp, false); }

std::array<cplx, 4> HypParams::nu() const {
    cplx n1 = 0.5 * (z_ + zp_ + w_ + wp_);
    return {n1, n1, 0.5 * (z_ - zp_ + w_ - wp_), 0.5 * (z_ - zp_ - w_ + wp_)};
}

KernelSpec make_whittaker(cplx z, cplx zp) {
    if (!admissible_pair(z, zp))
        throw Error(ErrorKind::DomainError, "make_whittaker", "(z, z') " + describe(z, zp) + " is not an admissible pair");
    if (std::abs(z - zp) <= kLogCaseGap)
        throw Error(ErrorKind::DomainError, "make_whittaker", "z = z' (logarithmic case) is not supported");
    return WhittakerKernel{z, zp};
}

KernelSpec make_confluent(cplx r) {
    if (!(r.real() > -0.5)) throw Error(ErrorKind::DomainError, "make_confluent", "Re r must exceed -1/2");
    return ConfluentKernel{r};
}

KernelSpec make_jacobi(int n, double alpha, double beta) {
    if (n < 1) throw Error(ErrorKind::DomainError, "make_jacobi", "n must be a positive integer");
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw Error(ErrorKind::DomainError, "make_jacobi", "alpha and beta must exceed -1");
    return JacobiKernel{n, alpha, beta};
}

}  // namespace kdet
