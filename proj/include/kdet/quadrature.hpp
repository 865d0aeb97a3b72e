#pragma once

#include <vector>

namespace kdet {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss–Legendre on [−1, 1], 1 ≤ n ≤ 512 (OrderTooLarge otherwise).
QuadRule gauss_legendre_rule(int n);
// Gauss–Laguerre for ∫₀^∞ e^{−x} f(x) dx.
QuadRule gauss_laguerre_rule(int n);

}  // namespace kdet
