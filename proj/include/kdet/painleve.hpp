#pragma once

#include <array>
#include <vector>

#include "kdet/fredholm.hpp"
#include "kdet/kernels.hpp"

namespace kdet {

struct NuQuad {
    std::array<cplx, 4> nu;

    // ν₁ = ν₂ = 𝔰/2, ν₃ = (z−z′+w−w′)/2, ν₄ = (z−z′−w+w′)/2
    static NuQuad f21(const HypParams& p);
    // ν₁ = ν₂ = n + (α+β)/2, ν₃ = (α+β)/2, ν₄ = (α−β)/2
    static NuQuad jacobi(int n, double alpha, double beta);
    // ν₁ = ν₂ = 0, ν₃ = −z, ν₄ = −z′
    static NuQuad whittaker(cplx z, cplx zp);
};

struct SigmaSample {
    double s = 0.0;
    double sigma = 0.0;
    double dsigma = 0.0;
    double d2sigma = 0.0;
};

// raw = LHS − RHS; normalized = raw / max |constituent term| (0 if all vanish).
struct Residual {
    double raw = 0.0;
    double normalized = 0.0;
    double scale = 0.0;
};

// −σ′((s−½)(s+½)σ″)² − (2(sσ′−σ)σ′ − ν₁ν₂ν₃ν₄)² + Π(σ′+ν_i²)
// Complex ν are allowed when the products entering are real (conjugate
// parameter pairs); DomainError if the result has an imaginary part.
Residual sigma_pvi_residual(const SigmaSample& x, const NuQuad& nu);
// (sσ″)² − (2σ′² − sσ′ + σ + Σν σ′)² + 4Π(σ′+ν_i)
Residual sigma_pv_residual(const SigmaSample& x, const NuQuad& nu);
// −(tσ″)² − (2(tσ′−σ) + σ′² + i(r̄−r)σ′)² + σ′²(σ′−2ir)(σ′+2ir̄), with t = x.s.
Residual sigma_pv_confluent_residual(const SigmaSample& x, cplx r);
// r = 0: −(tσ″)² − 4(tσ′−σ)(tσ′−σ+σ′²)
Residual sigma_jmms_residual(const SigmaSample& x);

// σ-samples from derivatives of ln det in the moving endpoint s.
// PVI (F21 on (s,∞), Jacobi on (s,1/2)): σ = (s²−¼)D − ν₁²s + ν₃ν₄/2.
SigmaSample pvi_sample(double s, const LogDetDerivatives& d, const NuQuad& nu);
// σ = s·D (Whittaker on (s,∞); sine/confluent on (0,t) with D = d/dt).
SigmaSample pv_sample(double s, const LogDetDerivatives& d);

enum class AsymptoteCoefficient {
    // sin πz sin πz′/π²
    Stated,
    // sin πz sin πz′/π² · Γ[z+w+1, z+w′+1, z′+w+1, z′+w′+1; 𝔰+1, 𝔰+2], the
    // coefficient of s^{−𝔰} in (s²−¼)K(s,s)
    KernelDiagonal,
};

// σ ≈ −ν₁²s + ν₃ν₄/2 + C s^{−2ν₁}, with σ′ and σ″ from the same expression.
SigmaSample pvi_sigma_asymptote(double s, const HypParams& params,
                                AsymptoteCoefficient coefficient = AsymptoteCoefficient::Stated);
double pvi_asymptote_coefficient(const HypParams& params, AsymptoteCoefficient coefficient);

struct PiiPoint {
    double s, u, du;
};

// u″ = 2u³ + su from arbitrary data, tabulated at `steps`+1 equally spaced
// points. BlowUp if |u| exceeds 1e6 or the step size collapses at a pole.
std::vector<PiiPoint> integrate_pii(PiiPoint start, double s_end, int steps);

// Hastings–McLeod: u″ = 2u³ + su from u = −Ai, u′ = −Ai′ at s_start, integrated
// backward to s_end; the table holds `steps`+1 equally spaced points from
// s_start to s_end. BlowUp if |u| exceeds 1e6.
std::vector<PiiPoint> integrate_pii_hastings_mcleod(double s_start = 8.0, double s_end = -8.0, int steps = 160);

struct P34Point {
    double r, dr;
};
// r = −u², r′ = −2uu′
P34Point p34_from_pii(double u, double du, double s);
// r″ − ((r′)²/(2r) − 4r² + 2sr), relative to the largest term.
double p34_residual(double s, double r, double dr, double d2r);

struct PviOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    // Accepted steps must keep the normalized algebraic residual below this.
    double residual_tol = 1e-8;
};

// Integrates σ‴ from the once-differentiated σ-PVI equation (divided by σ″),
// carrying (σ, σ′, σ″), from init.s to each point of s_out (monotone, on one
// side of init.s). The initial σ″ is replaced by the root of the algebraic
// equation nearest to it when the undifferentiated equation has real roots.
// ResidualDrift if the algebraic residual cannot be kept below tolerance,
// BlowUp if the state leaves finite range.
std::vector<SigmaSample> pvi_integrate(SigmaSample init, const NuQuad& nu, const std::vector<double>& s_out,
                                       const PviOptions& options = {});

// The once-differentiated equation solved for σ‴.
double pvi_third_derivative(const SigmaSample& x, const NuQuad& nu);

}  // namespace kdet
