#pragma once

#include <complex>
#include <vector>

namespace kdet {

using cplx = std::complex<double>;

// Ratio of Gamma products Γ(n₁)Γ(n₂)⋯ / Γ(d₁)Γ(d₂)⋯.
struct GammaBracket {
    std::vector<cplx> numerators;
    std::vector<cplx> denominators;
};

struct AiryValues {
    double ai;
    double ai_prime;
};

bool is_nonpositive_integer(cplx z, double tol = 0.0);

// sin(πz) and cos(πz) with exact zeros at the integers / half-integers.
cplx sin_pi(cplx z);
cplx cos_pi(cplx z);
// log sin(πz) that stays finite for large |Im z|.
cplx log_sin_pi(cplx z);

// Lanczos log-Gamma; the imaginary part is fixed only modulo 2π.
cplx log_gamma(cplx z);
cplx gamma(cplx z);
// 1/Γ(z), zero at the poles of Γ.
cplx rgamma(cplx z);

cplx gamma_bracket(const GammaBracket& b);
// Σ log Γ(num) − Σ log Γ(den); throws at poles like gamma_bracket.
cplx log_gamma_bracket(const GammaBracket& b);

cplx gauss_2f1(cplx a, cplx b, cplx c, cplx zeta);
cplx gauss_2f1_deriv(cplx a, cplx b, cplx c, cplx zeta);
// ₂F₁(a,b;c;1−w) and its ζ-derivative, accurate in w when ζ is within rounding of 1.
cplx gauss_2f1_complement(cplx a, cplx b, cplx c, cplx w);
cplx gauss_2f1_complement_deriv(cplx a, cplx b, cplx c, cplx w);

cplx kummer_1f1(cplx a, cplx c, cplx x);

// Tricomi U(a, b, x) for real x > 0.
cplx hyperu(cplx a, cplx b, double x);
cplx whittaker_w(cplx kappa, cplx mu, double x);

AiryValues airy(double x);

}  // namespace kdet
