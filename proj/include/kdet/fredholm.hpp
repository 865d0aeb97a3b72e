#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "kdet/kernels.hpp"

namespace kdet {

// J = (a₁, a₂) ∪ (a₃, a₄) ∪ …; only a₁ may be −∞ and only the last endpoint +∞.
class IntervalUnion {
public:
    static IntervalUnion make(std::vector<double> endpoints);
    static IntervalUnion single(double a, double b) { return make({a, b}); }

    const std::vector<double>& endpoints() const { return endpoints_; }
    int count() const { return static_cast<int>(endpoints_.size() / 2); }
    double lower(int i) const { return endpoints_[2 * i]; }
    double upper(int i) const { return endpoints_[2 * i + 1]; }
    bool contains(double x) const;
    // Same union with endpoint k replaced; InvalidUnion if ordering breaks.
    IntervalUnion with_endpoint(int k, double value) const;

private:
    explicit IntervalUnion(std::vector<double> e) : endpoints_(std::move(e)) {}
    std::vector<double> endpoints_;
};

// Checks the kernel-specific restrictions on J (closure off ±1/2 for F21,
// off 0 for Whittaker, inside [−1/2, 1/2] for Jacobi).
void check_union(const KernelSpec& spec, const IntervalUnion& J);

enum class InfiniteMap { Rational, Truncation };

struct GradedEndpoint {
    double x;
    int power;  // x = e ± len·τ^power near the endpoint
};

struct GridOptions {
    int order = 64;            // nodes per finite interval
    int order_infinite = 128;  // nodes per semi-infinite interval
    InfiniteMap infinite_map = InfiniteMap::Rational;
    double x_max = 50.0;     // truncation radius
    // x = a + scale·((1−t)^{−power} − 1) on semi-infinite pieces; power 1 is
    // the rational map a + scale·t/(1−t). A power with power·(1+𝔰) integral
    // makes algebraically decaying integrands smooth in t.
    double map_scale = 1.0;
    int infinite_power = 1;
    std::vector<GradedEndpoint> graded;
    int threads = 1;
};

struct Grid {
    std::vector<double> nodes;
    std::vector<double> weights;
};

Grid build_grid(const IntervalUnion& J, const GridOptions& options);
Grid build_grid(const IntervalUnion& J, int order, InfiniteMap map = InfiniteMap::Rational, double x_max = 50.0);

struct NystromSystem {
    KernelSpec spec = ZeroKernel{};
    std::vector<double> nodes;
    std::vector<double> weights;
    // √w_i K(x_i, x_j) √w_j
    Eigen::MatrixXd matrix;
    // Estimate of ∫ K(x, x) dx beyond the truncation radius (0 for mapped grids).
    double tail_bound = 0.0;
    std::shared_ptr<const KernelEvaluator> evaluator;
    std::vector<KernelPoint> points;
};

// Default grid options for a kernel and J: Jacobi endpoints at ±1/2 are
// graded and the F21 infinite map power is matched to the decay x^{−2−𝔰}.
GridOptions default_grid_options(const KernelSpec& spec, const IntervalUnion& J, int order = 64);

NystromSystem discretize(const KernelSpec& spec, const IntervalUnion& J, const GridOptions& options);
NystromSystem discretize(const KernelSpec& spec, const IntervalUnion& J, int order = 64);
// Arbitrary nodes and positive weights; no union checks.
NystromSystem discretize_grid(const KernelSpec& spec, const Grid& grid, int threads = 1);

// √w_i L(x_i, x_j) √w_j for the F21 L kernel.
Eigen::MatrixXd discretize_l(const HypParams& params, const Grid& grid);

// log det(I − matrix); SingularResolvent if a pivot falls below 1e-14,
// DomainError if the determinant is negative.
double log_det(const NystromSystem& sys);
// det(I − matrix) with its sign.
double fredholm_det(const NystromSystem& sys);
// Eigenvalues of the symmetrized matrix (self-adjoint kernels only).
Eigen::VectorXd kernel_eigenvalues(const NystromSystem& sys);

// R(x, x) for R = K(1−K)^{-1}, by Nyström interpolation.
double resolvent_diag(const NystromSystem& sys, double x);

// Σ_{k≤terms} (−1)^k/k! ∫_{J^k} det[K(x_i, x_j)] by nested adaptive quadrature.
// OracleInapplicable when ∫_J K(x, x) dx ≥ 0.3.
double fredholm_series_oracle(const KernelSpec& spec, const IntervalUnion& J, int terms);

struct LogDetDerivatives {
    double d1 = 0.0;
    double d2 = 0.0;
    // d³/da³, a by-product of the d2 stencil (needed for σ″).
    double d3 = 0.0;
};

// Derivatives of ln det(1 − K|_J) in the endpoint a = endpoints[k].
// d1 = ±R(a, a) (+ for a left endpoint). For order 2, d2 and d3 come from
// Richardson-extrapolated central differences of d1 on a, a ± h/2, a ± h.
LogDetDerivatives logdet_derivatives(const KernelSpec& spec, const IntervalUnion& J, int endpoint, int order,
                                     double h, const GridOptions& options);
// J = (s, +∞).
LogDetDerivatives logdet_derivatives(const KernelSpec& spec, double s, int order, double h = 1e-3);

}  // namespace kdet
