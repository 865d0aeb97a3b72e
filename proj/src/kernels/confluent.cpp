#include <cmath>
#include <numbers>

#include "impl.hpp"
#include "kdet/errors.hpp"

namespace kdet {

namespace {

constexpr double kPi = std::numbers::pi;
// Below this |2 Re r| the P function is replaced by P − i(r/2Re r)Q, which
// leaves the kernel unchanged and stays finite as Re r → 0.
constexpr double kRegularizeBelow = 0.1;

struct Series {
    cplx h, dh;
};

// h(y) = 1 − a y Σ_{j≥1} j (a+1)_j y^j / ((c+1)_{j+1} (j+1)!) and dh/dy.
Series regularized_series(cplx a, double c, cplx y) {
    if (a == 0.0) return {1.0, 0.0};
    cplx t = 1.0 / (c + 1.0);  // T_0
    cplx sum = 0.0, dsum = 0.0;
    double biggest = 0.0;
    int small = 0;
    for (int j = 1; j < 2000; ++j) {
        t *= (a + static_cast<double>(j)) * y / ((c + j + 1.0) * (j + 1.0));
        cplx term = static_cast<double>(j) * t;
        sum += term;
        dsum += static_cast<double>(j + 1) * term;
        biggest = std::max(biggest, std::abs(term));
        if (std::abs(term) <= 1e-17 * std::abs(sum) && j > std::abs(y)) {
            if (++small >= 3) {
                if (biggest > 1e8 * std::abs(sum) && biggest > 1e8)
                    throw Error(ErrorKind::NoConvergence, "confluent", "cancellation in the regularized series");
                return {1.0 - a * y * sum, -a * dsum};
            }
        } else {
            small = 0;
        }
    }
    throw Error(ErrorKind::NoConvergence, "confluent", "regularized series did not converge");
}

class ConfluentImpl final : public detail::KernelImpl {
public:
    explicit ConfluentImpl(const ConfluentKernel& k) : KernelImpl(k), r_(k.r) {
        c_ = 2.0 * r_.real();
        log_scale_ = -std::log(2.0 * kPi) + log_gamma_bracket({{r_ + 1.0, std::conj(r_) + 1.0}, {c_ + 1.0, c_ + 2.0}});
    }

    const char* name() const override { return "confluent"; }

    KernelPoint point(double x, bool derivs) const override {
        if (x == 0.0) throw Error(ErrorKind::DomainError, "confluent", "x = 0 is not in the phase space");
        const cplx i(0.0, 1.0);
        KernelPoint p;
        p.x = x;
        p.has_derivatives = derivs;
        p.region = Region::Out;
        // |2x|^{Re r} from P and Q goes into ψ, leaving r and s smooth at 0
        p.log_psi = 2.0 * r_.real() * std::log(std::abs(2.0 * x));
        p.log_scale = log_scale_;
        double sgn = x > 0 ? 1.0 : -1.0;
        cplx pref = std::exp(-i * x + kPi * r_.imag() * sgn / 2.0);
        cplx dlog = -i;
        cplx y = 2.0 * i * x;
        cplx a = r_;
        cplx m2 = kummer_1f1(a + 1.0, c_ + 2.0, y);
        p.r = pref * 2.0 * x * m2;
        if (std::abs(c_) > kRegularizeBelow) {
            cplx m = kummer_1f1(a, c_, y);
            p.s = pref * m;
            if (derivs) p.ds = pref * (dlog * m + 2.0 * i * (a / c_) * kummer_1f1(a + 1.0, c_ + 1.0, y));
        } else {
            Series h = regularized_series(a, c_, y);
            p.s = pref * h.h;
            if (derivs) p.ds = pref * (dlog * h.h + 2.0 * i * h.dh);
        }
        if (derivs) {
            p.dr = pref * ((dlog * 2.0 * x + 2.0) * m2 +
                           2.0 * x * 2.0 * i * (a + 1.0) / (c_ + 2.0) * kummer_1f1(a + 2.0, c_ + 3.0, y));
        }
        return p;
    }

private:
    cplx r_;
    double c_;
    cplx log_scale_;
};

}  // namespace

namespace detail {
std::shared_ptr<const KernelImpl> make_confluent_impl(const ConfluentKernel& k) {
    return std::make_shared<ConfluentImpl>(k);
}
}  // namespace detail

}  // namespace kdet
