#include <cmath>
#include <numbers>

#include "impl.hpp"
#include "kdet/errors.hpp"

namespace kdet {

namespace {

class SineImpl final : public detail::KernelImpl {
public:
    SineImpl() : KernelImpl(SineKernel{}) {}
    const char* name() const override { return "sine"; }
    KernelPoint point(double x, bool derivs) const override {
        KernelPoint p;
        p.x = x;
        p.has_derivatives = derivs;
        p.log_psi = -std::log(std::numbers::pi);
        p.r = std::sin(x);
        p.s = std::cos(x);
        p.dr = p.s;
        p.ds = -p.r;
        return p;
    }
};

class AiryImpl final : public detail::KernelImpl {
public:
    AiryImpl() : KernelImpl(AiryKernel{}) {}
    const char* name() const override { return "airy"; }
    KernelPoint point(double x, bool derivs) const override {
        AiryValues a = airy(x);
        KernelPoint p;
        p.x = x;
        p.has_derivatives = derivs;
        p.r = a.ai;
        p.s = a.ai_prime;
        p.dr = a.ai_prime;
        p.ds = x * a.ai;
        return p;
    }
};

struct JacobiPair {
    double p, dp;
};

// P_n^{(α,β)}(u) by the three-term recurrence.
double jacobi_p(int n, double a, double b, double u) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = (a + 1.0) + 0.5 * (a + b + 2.0) * (u - 1.0);
    for (int k = 2; k <= n; ++k) {
        double s = 2.0 * k + a + b;
        double c0 = 2.0 * k * (k + a + b) * (s - 2.0);
        double c1 = (s - 1.0) * (s * (s - 2.0) * u + a * a - b * b);
        double c2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        double next = (c1 * cur - c2 * prev) / c0;
        prev = cur;
        cur = next;
    }
    return cur;
}

JacobiPair jacobi_with_deriv(int n, double a, double b, double u) {
    double dp = n == 0 ? 0.0 : 0.5 * (n + a + b + 1.0) * jacobi_p(n - 1, a + 1.0, b + 1.0, u);
    return {jacobi_p(n, a, b, u), dp};
}

// log h_n, the squared norm of P_n against (1−u)^α (1+u)^β on (−1, 1).
double log_norm(int n, double a, double b) {
    double l = (a + b + 1.0) * std::log(2.0) + std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) -
               std::lgamma(n + 1.0);
    if (n == 0) return l - std::lgamma(a + b + 2.0);
    return l - std::log(2.0 * n + a + b + 1.0) - std::lgamma(n + a + b + 1.0);
}

// log k_n, the leading coefficient of P_n.
double log_leading(int n, double a, double b) {
    if (n == 0) return 0.0;
    return std::lgamma(2.0 * n + a + b + 1.0) - n * std::log(2.0) - std::lgamma(n + 1.0) -
           std::lgamma(n + a + b + 1.0);
}

class JacobiImpl final : public detail::KernelImpl {
public:
    explicit JacobiImpl(const JacobiKernel& k) : KernelImpl(k), n_(k.n), a_(k.alpha), b_(k.beta) {
        log_const_ = log_leading(n_ - 1, a_, b_) - log_leading(n_, a_, b_) - log_norm(n_ - 1, a_, b_);
    }

    const char* name() const override { return "jacobi"; }

    KernelPoint point(double x, bool derivs) const override {
        if (!(std::abs(x) < 0.5))
            throw Error(ErrorKind::DomainError, "jacobi", "x must lie in (-1/2, 1/2)");
        double u = 2.0 * x;
        KernelPoint p;
        p.x = x;
        p.has_derivatives = derivs;
        p.region = Region::In;
        p.log_psi = a_ * std::log1p(-u) + b_ * std::log1p(u) + log_const_;
        JacobiPair hi = jacobi_with_deriv(n_, a_, b_, u);
        JacobiPair lo = jacobi_with_deriv(n_ - 1, a_, b_, u);
        p.r = hi.p;
        p.s = lo.p;
        p.dr = 2.0 * hi.dp;
        p.ds = 2.0 * lo.dp;
        return p;
    }

private:
    int n_;
    double a_, b_;
    double log_const_;
};

}  // namespace

namespace detail {
std::shared_ptr<const KernelImpl> make_sine_impl() { return std::make_shared<SineImpl>(); }
std::shared_ptr<const KernelImpl> make_airy_impl() { return std::make_shared<AiryImpl>(); }
std::shared_ptr<const KernelImpl> make_jacobi_impl(const JacobiKernel& k) { return std::make_shared<JacobiImpl>(k); }
}  // namespace detail

}  // namespace kdet
