#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "kdet/kernels.hpp"
#include "kdet/painleve.hpp"

namespace kdet {

using Mat2 = Eigen::Matrix2cd;

// Residues of dM/dζ = (Σ_l B_l/(ζ − b_l) + D) M.
struct ResidueSystem {
    std::vector<double> poles;  // strictly increasing
    std::vector<Mat2> residues;
    std::optional<Mat2> d_matrix;
    std::vector<int> moving;  // indices into poles

    const Mat2& at(double pole) const;
};

// One-interval layout on (s, ∞): poles {−1/2, 1/2, s} carrying 𝔟, 𝔞, 𝔠.
ResidueSystem one_interval_system(double s, const Mat2& a, const Mat2& b, const Mat2& c);

// ∂B_l/∂b_j for every l, j = moving pole `j` (a pole index):
// [B_j, B_l]/(b_j − b_l) for l ≠ j, −Σ_{l≠j}[B_j, B_l]/(b_j − b_l) − [B_j, D] for l = j.
std::vector<Mat2> schlesinger_rhs(const ResidueSystem& sys, int j);

// ω_j = Σ_{l≠j} tr(B_j B_l)/(b_j − b_l) (+ tr(B_j D)), one entry per moving pole.
std::vector<double> omega_eval(const ResidueSystem& sys);

// σ̂ = σ + 𝔰²s/4 − (θ_a² − θ_b²)/2, θ_a = (z−z′)/2, θ_b = (w−w′)/2.
double sigma_hat(const SigmaSample& x, const HypParams& params);

struct Reconstruction {
    ResidueSystem system;
    // |(s²−¼)σ̂″/𝔰 − (x_c y_a − x_a y_c)| for the selected branch, relative to
    // the larger side; the other root's mismatch for comparison.
    double mismatch = 0.0;
    double rejected_mismatch = 0.0;
};

// 𝔞, 𝔠 from σ-data in the gauge x_c = 1: z_c = −σ̂′/𝔰, z_a from
// (s+½)σ̂′ − σ̂ = 𝔰z_a + θ_a² − θ_b² + 𝔰²/4, y_c = −z_c², and (x_a, y_a) from
// tr 𝔞𝔠 = σ̂ − (s−½)σ̂′ with x_a y_a = θ_a² − z_a². The two roots are told apart
// by (s²−¼)σ̂″ = 𝔰(x_c y_a − x_a y_c); 𝔟 = −(𝔰/2)σ₃ − 𝔞 − 𝔠. DegenerateData if
// z_c vanishes, the roots tie, or the better one misses by more than tol.
Reconstruction reconstruct_residues(const SigmaSample& x, const HypParams& params, double tol = 1e-8);

// Deviations of the one-interval system from tr = 0, det 𝔞 = −θ_a²,
// det 𝔟 = −θ_b², det 𝔠 = 0, 𝔞 + 𝔟 + 𝔠 = −(𝔰/2)σ₃.
struct InvariantReport {
    double trace = 0.0;
    double det_a = 0.0;
    double det_b = 0.0;
    double det_c = 0.0;
    double sum_rule = 0.0;
    double max() const;
};
InvariantReport residue_invariants(const ResidueSystem& sys, const HypParams& params);

struct FlowOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-13;
    // drift of traces, determinants and Σ B_l from their initial values
    double invariant_tol = 1e-7;
};

// Moves pole `pole_index` (a moving pole) through the points of `b_out`
// (monotone) under the Schlesinger equations; returns the system at each.
// PoleCollision if the path comes within 1e-9 of another pole,
// InvariantDrift if a conserved quantity drifts beyond tolerance.
std::vector<ResidueSystem> integrate_flow(const ResidueSystem& sys0, int pole_index, const std::vector<double>& b_out,
                                          const FlowOptions& options = {});

}  // namespace kdet
