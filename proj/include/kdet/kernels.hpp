#pragma once

#include <array>
#include <memory>
#include <variant>

#include "kdet/specfun.hpp"

namespace kdet {

// Parameters (z, z′, w, w′) of the ₂F₁ kernel.
class HypParams {
public:
    // Validates admissibility; strict additionally requires 𝔰 > 0, |z+z′| < 1, |w+w′| < 1.
    static HypParams make(cplx z, cplx zp, cplx w, cplx wp, bool strict = false);
    // No validation; used for integer specializations and scaling limits.
    static HypParams unchecked(cplx z, cplx zp, cplx w, cplx wp);

    cplx z() const { return z_; }
    cplx zp() const { return zp_; }
    cplx w() const { return w_; }
    cplx wp() const { return wp_; }
    bool strict() const { return strict_; }
    // 𝔰 = Re(z + z′ + w + w′)
    double sigma() const { return (z_ + zp_ + w_ + wp_).real(); }
    // ν₁ = ν₂ = 𝔰/2, ν₃ = (z−z′+w−w′)/2, ν₄ = (z−z′−w+w′)/2
    std::array<cplx, 4> nu() const;
    cplx theta_a() const { return 0.5 * (z_ - zp_); }
    cplx theta_b() const { return 0.5 * (w_ - wp_); }

private:
    HypParams(cplx z, cplx zp, cplx w, cplx wp, bool strict) : z_(z), zp_(zp), w_(w), wp_(wp), strict_(strict) {}
    cplx z_, zp_, w_, wp_;
    bool strict_;
};

// True if (a, b) is a conjugate pair off ℤ or a real pair inside one (k, k+1).
bool admissible_pair(cplx a, cplx b);

struct F21Kernel {
    HypParams params;
};
struct WhittakerKernel {
    cplx z, zp;
};
struct ConfluentKernel {
    cplx r;
};
struct SineKernel {};
struct AiryKernel {};
struct JacobiKernel {
    int n;
    double alpha, beta;
};
// Test hooks: K ≡ 0 and K ≡ value.
struct ZeroKernel {};
struct ConstantKernel {
    double value;
};

using KernelSpec = std::variant<F21Kernel, WhittakerKernel, ConfluentKernel, SineKernel, AiryKernel, JacobiKernel,
                                ZeroKernel, ConstantKernel>;

// Validating constructors for the non-F21 variants.
KernelSpec make_whittaker(cplx z, cplx zp);
KernelSpec make_confluent(cplx r);
KernelSpec make_jacobi(int n, double alpha, double beta);

const char* kernel_name(const KernelSpec& spec);

enum class Region { Out, In };

// Out = 𝔛_out (|x| > 1/2) for F21 and x > 0 for Whittaker; In otherwise.
Region region_of(const KernelSpec& spec, double x);

// ψ_out or ψ_in at x.
double psi(const HypParams& params, double x);

struct RSValues {
    cplx r_out, s_out, r_in, s_in;
};
// For real ζ the out pair is NaN on [−1/2, 1/2] and the in pair NaN off (−1/2, 1/2).
RSValues rs_functions(const HypParams& params, cplx zeta);

// Per-point data for kernels of the form
//   same block:  e^{(λx+λy)/2 + κ} (r(x)s(y) − s(x)r(y)) / (x−y)
//   cross block: e^{(λx+λy)/2} (r(x)r(y) − e^{κx+κy} s(x)s(y)) / (x−y)
// with λ = log_psi and κ = log_scale.
struct KernelPoint {
    double x = 0.0;
    Region region = Region::Out;
    double log_psi = 0.0;
    cplx log_scale = 0.0;
    cplx r, s;
    cplx dr, ds;
    bool has_derivatives = false;
};

namespace detail {
class KernelImpl;
}

class KernelEvaluator {
public:
    explicit KernelEvaluator(const KernelSpec& spec);
    const KernelSpec& spec() const;
    KernelPoint point(double x, bool with_derivatives = false) const;
    // Off-diagonal value; NearDiagonal below 1e-8 separation.
    double pair(const KernelPoint& p, const KernelPoint& q) const;
    // K(x, x); p must carry derivatives.
    double diag(const KernelPoint& p) const;
    double eval(double x, double y) const;
    double diag(double x) const;

private:
    std::shared_ptr<const detail::KernelImpl> impl_;
};

double kernel_eval(const KernelSpec& spec, double x, double y);
double kernel_diag(const KernelSpec& spec, double x);

// L(x, y): zero within a block, A(x, y) = √(ψ_out(x)ψ_in(y))/(x−y) for x out, y in.
double l_kernel_eval(const HypParams& params, double x, double y);

constexpr double kNearDiagonal = 1e-8;
constexpr double kBlendRadius = 1e-5;

}  // namespace kdet
