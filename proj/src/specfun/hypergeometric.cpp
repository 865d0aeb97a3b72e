#include <cmath>

#include "kdet/errors.hpp"
#include "kdet/specfun.hpp"

namespace kdet {

namespace {

constexpr int kMaxTerms = 10000;
constexpr double kSeriesTol = 1e-16;
constexpr double kSeriesRadius = 0.7;
constexpr double kIntegerGuard = 1e-8;

// Tracks the stopping rule: three consecutive terms below tol·|sum|.
struct SmallTermCounter {
    int run = 0;
    bool update(cplx term, cplx sum) {
        if (std::abs(term) <= kSeriesTol * std::abs(sum) || term == 0.0)
            ++run;
        else
            run = 0;
        return run >= 3;
    }
};

cplx series_2f1(cplx a, cplx b, cplx c, cplx zeta, const char* op) {
    cplx sum = 1.0, term = 1.0;
    SmallTermCounter stop;
    for (int k = 0; k < kMaxTerms; ++k) {
        double kk = static_cast<double>(k);
        term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * zeta;
        sum += term;
        if (stop.update(term, sum)) return sum;
    }
    throw Error(ErrorKind::NoConvergence, op, "2F1 power series did not converge");
}

bool near_integer(cplx d) {
    return std::abs(d.imag()) < kIntegerGuard && std::abs(d.real() - std::round(d.real())) < kIntegerGuard;
}

cplx connection_inverse(cplx a, cplx b, cplx c, cplx zeta) {
    // ₂F₁(a,b;c;ζ) in terms of functions of 1/ζ; (−ζ)^{−a} on the principal branch.
    cplx inv = 1.0 / zeta;
    cplx lmz = std::log(-zeta);
    cplx result = 0.0;
    // Gamma ratios are combined in log form so that large c does not overflow.
    if (!is_nonpositive_integer(b) && !is_nonpositive_integer(c - a)) {
        cplx lc = log_gamma(b - a) + log_gamma(c) - log_gamma(b) - log_gamma(c - a);
        result += std::exp(lc - a * lmz) * series_2f1(a, 1.0 - c + a, 1.0 - b + a, inv, "gauss_2f1");
    }
    if (!is_nonpositive_integer(a) && !is_nonpositive_integer(c - b)) {
        cplx lc = log_gamma(a - b) + log_gamma(c) - log_gamma(a) - log_gamma(c - b);
        result += std::exp(lc - b * lmz) * series_2f1(b, 1.0 - c + b, 1.0 - a + b, inv, "gauss_2f1");
    }
    return result;
}

// ₂F₁(a,b;c;1−w) in terms of functions of w; needs c − a − b off the integers.
cplx connection_one(cplx a, cplx b, cplx c, cplx w) {
    cplx d = c - a - b;
    cplx result = 0.0;
    if (!is_nonpositive_integer(c - a) && !is_nonpositive_integer(c - b)) {
        cplx lc = log_gamma(c) + log_gamma(d) - log_gamma(c - a) - log_gamma(c - b);
        result += std::exp(lc) * series_2f1(a, b, 1.0 - d, w, "gauss_2f1");
    }
    if (!is_nonpositive_integer(a) && !is_nonpositive_integer(b)) {
        cplx lc = log_gamma(c) + log_gamma(-d) - log_gamma(a) - log_gamma(b);
        result += std::exp(lc + d * std::log(w)) * series_2f1(c - a, c - b, 1.0 + d, w, "gauss_2f1");
    }
    return result;
}

// Taylor re-expansion of z(1−z)f″ + (c − (a+b+1)z)f′ − ab f = 0 along the
// segment from z0, where f and f′ are known, to zeta.
cplx taylor_path(cplx a, cplx b, cplx c, cplx z0, cplx f, cplx df, cplx zeta) {
    const cplx ab = a * b;
    const cplx B1 = -(a + b + 1.0);
    for (int step = 0; step < 2000; ++step) {
        cplx remaining = zeta - z0;
        if (std::abs(remaining) == 0.0) return f;
        double radius = std::min(std::abs(z0), std::abs(1.0 - z0));
        double hmax = 0.5 * radius;
        cplx h = std::abs(remaining) <= hmax ? remaining : remaining * (hmax / std::abs(remaining));
        cplx A0 = z0 * (1.0 - z0);
        cplx A1 = 1.0 - 2.0 * z0;
        cplx B0 = c - (a + b + 1.0) * z0;
        // e_k = c_k h^k, kept scaled so that small radii do not overflow c_k
        cplx ekm = f, ek = df * h;
        cplx val = f + ek, dsum = ek;  // dsum = Σ k e_k = h f′
        SmallTermCounter stop;
        for (int k = 0; k < 500; ++k) {
            double kk = static_cast<double>(k);
            cplx next = -((A1 * kk + B0) * (kk + 1.0) * ek * h + (-kk * (kk - 1.0) + B1 * kk - ab) * ekm * h * h) /
                        (A0 * (kk + 2.0) * (kk + 1.0));
            dsum += (kk + 2.0) * next;
            val += next;
            ekm = ek;
            ek = next;
            // Relative to the local scale of f, which may pass through a zero.
            if (stop.update(next, std::abs(val) + std::abs(dsum))) break;
            if (k == 499) throw Error(ErrorKind::NoConvergence, "gauss_2f1", "Taylor continuation did not converge");
        }
        cplx der = dsum / h;
        f = val;
        df = der;
        z0 += h;
    }
    throw Error(ErrorKind::NoConvergence, "gauss_2f1", "continuation path too long");
}

cplx continue_2f1(cplx a, cplx b, cplx c, cplx zeta) {
    cplx z0 = zeta * (0.5 / std::abs(zeta));
    cplx f = series_2f1(a, b, c, z0, "gauss_2f1");
    cplx df = a * b / c * series_2f1(a + 1.0, b + 1.0, c + 1.0, z0, "gauss_2f1");
    return taylor_path(a, b, c, z0, f, df, zeta);
}

}  // namespace

cplx gauss_2f1(cplx a, cplx b, cplx c, cplx zeta) {
    if (is_nonpositive_integer(c, 1e-14))
        throw Error(ErrorKind::PoleAtC, "gauss_2f1", "c is a nonpositive integer");
    if (!(std::isfinite(zeta.real()) && std::isfinite(zeta.imag())))
        throw Error(ErrorKind::DomainError, "gauss_2f1", "non-finite argument");
    if (zeta == 0.0) return 1.0;
    if (zeta.imag() == 0.0 && zeta.real() >= 1.0)
        throw Error(ErrorKind::DomainError, "gauss_2f1", "argument on the branch cut [1, inf)");
    // Terminating series are summed directly.
    bool poly = (is_nonpositive_integer(a) && a.real() > -200) || (is_nonpositive_integer(b) && b.real() > -200);
    double az = std::abs(zeta);
    if (az <= kSeriesRadius || (poly && az <= 4.0)) return series_2f1(a, b, c, zeta, "gauss_2f1");
    cplx pf = zeta / (zeta - 1.0);
    if (std::abs(pf) <= kSeriesRadius)
        return std::exp(-a * std::log(1.0 - zeta)) * series_2f1(a, c - b, c, pf, "gauss_2f1");
    // The connection formula is singular when b − a is an integer (logarithmic
    // case); those arguments go through the ODE continuation instead.
    if (1.0 / az <= kSeriesRadius && !near_integer(b - a)) return connection_inverse(a, b, c, zeta);
    if (std::abs(1.0 - zeta) <= 0.5 && !near_integer(c - a - b)) return connection_one(a, b, c, 1.0 - zeta);
    return continue_2f1(a, b, c, zeta);
}

cplx gauss_2f1_complement(cplx a, cplx b, cplx c, cplx w) {
    if (std::abs(w) > 0.5) return gauss_2f1(a, b, c, 1.0 - w);
    if (is_nonpositive_integer(c, 1e-14))
        throw Error(ErrorKind::PoleAtC, "gauss_2f1", "c is a nonpositive integer");
    if (w == 0.0 || (w.imag() == 0.0 && w.real() < 0.0))
        throw Error(ErrorKind::DomainError, "gauss_2f1", "argument on the branch cut [1, inf)");
    if (!near_integer(c - a - b)) return connection_one(a, b, c, w);
    // Logarithmic case: g(w) = F(1 − w) solves the hypergeometric equation
    // with c replaced by a + b + 1 − c; continue it from w = 1/2 in w itself.
    cplx f = series_2f1(a, b, c, 0.5, "gauss_2f1");
    cplx df = -a * b / c * series_2f1(a + 1.0, b + 1.0, c + 1.0, 0.5, "gauss_2f1");
    return taylor_path(a, b, a + b + 1.0 - c, 0.5, f, df, w);
}

cplx gauss_2f1_complement_deriv(cplx a, cplx b, cplx c, cplx w) {
    if (is_nonpositive_integer(c, 1e-14))
        throw Error(ErrorKind::PoleAtC, "gauss_2f1_deriv", "c is a nonpositive integer");
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b / c * gauss_2f1_complement(a + 1.0, b + 1.0, c + 1.0, w);
}

cplx gauss_2f1_deriv(cplx a, cplx b, cplx c, cplx zeta) {
    if (is_nonpositive_integer(c, 1e-14))
        throw Error(ErrorKind::PoleAtC, "gauss_2f1_deriv", "c is a nonpositive integer");
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b / c * gauss_2f1(a + 1.0, b + 1.0, c + 1.0, zeta);
}

namespace {

cplx series_1f1(cplx a, cplx c, cplx x) {
    cplx sum = 1.0, term = 1.0;
    SmallTermCounter stop;
    for (int k = 0; k < kMaxTerms; ++k) {
        double kk = static_cast<double>(k);
        term *= (a + kk) / ((c + kk) * (kk + 1.0)) * x;
        sum += term;
        if (stop.update(term, sum)) return sum;
    }
    throw Error(ErrorKind::NoConvergence, "kummer_1f1", "1F1 power series did not converge");
}

constexpr double kKummerSeriesLimit = 4.0;

// Taylor re-expansion of x f'' + (c − x) f' − a f = 0 along the ray to x.
cplx continue_1f1(cplx a, cplx c, cplx x) {
    cplx x0 = x * (kKummerSeriesLimit / std::abs(x));
    cplx f = series_1f1(a, c, x0);
    cplx df = a / c * series_1f1(a + 1.0, c + 1.0, x0);
    for (int step = 0; step < 10000; ++step) {
        cplx remaining = x - x0;
        if (std::abs(remaining) == 0.0) return f;
        double hmax = std::min(0.5 * std::abs(x0), 2.0);
        cplx h = std::abs(remaining) <= hmax ? remaining : remaining * (hmax / std::abs(remaining));
        cplx ckm = f, ck = df;
        cplx val = f + df * h, der = df;
        cplx hp = h;
        SmallTermCounter stop;
        for (int k = 0; k < 500; ++k) {
            double kk = static_cast<double>(k);
            cplx next = -((kk + 1.0) * (kk + c - x0) * ck - (kk + a) * ckm) / (x0 * (kk + 2.0) * (kk + 1.0));
            der += (kk + 2.0) * next * hp;
            hp *= h;
            cplx term = next * hp;
            val += term;
            ckm = ck;
            ck = next;
            if (stop.update(term, val)) break;
            if (k == 499) throw Error(ErrorKind::NoConvergence, "kummer_1f1", "Taylor continuation did not converge");
        }
        f = val;
        df = der;
        x0 += h;
    }
    throw Error(ErrorKind::NoConvergence, "kummer_1f1", "continuation path too long");
}

}  // namespace

cplx kummer_1f1(cplx a, cplx c, cplx x) {
    if (is_nonpositive_integer(c, 1e-14))
        throw Error(ErrorKind::PoleAtC, "kummer_1f1", "c is a nonpositive integer");
    if (!(std::isfinite(x.real()) && std::isfinite(x.imag())))
        throw Error(ErrorKind::DomainError, "kummer_1f1", "non-finite argument");
    if (x == 0.0) return 1.0;
    if (x.real() < 0.0) return std::exp(x) * kummer_1f1(c - a, c, -x);
    if (std::abs(x) <= kKummerSeriesLimit || is_nonpositive_integer(a)) return series_1f1(a, c, x);
    return continue_1f1(a, c, x);
}

}  // namespace kdet
