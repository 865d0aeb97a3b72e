#include <cmath>

#include "impl.hpp"
#include "kdet/errors.hpp"

namespace kdet {

namespace {

// f = X^p U(a, b, X) and df/dX, using U′(a, b, X) = −a U(a+1, b+1, X).
struct PowU {
    cplx f, df;
};

PowU pow_u(cplx p, cplx a, cplx b, double X, bool derivs) {
    double lx = std::log(X);
    cplx xp = std::exp(p * lx);
    PowU out;
    cplx u = hyperu(a, b, X);
    out.f = xp * u;
    if (derivs) out.df = p / X * out.f - xp * a * hyperu(a + 1.0, b + 1.0, X);
    return out;
}

class WhittakerImpl final : public detail::KernelImpl {
public:
    explicit WhittakerImpl(const WhittakerKernel& k) : KernelImpl(k), z_(k.z), zp_(k.zp) {
        zsum_ = (z_ + zp_).real();
        b_ = 1.0 + z_ - zp_;
        log_c_ = detail::log_c_factor(z_, zp_, "whittaker");
        s_plus_ = gamma(z_ + 1.0) * gamma(zp_ + 1.0);
        s_minus_ = -rgamma(z_) * rgamma(zp_);
    }

    const char* name() const override { return "whittaker"; }

    KernelPoint point(double x, bool derivs) const override {
        if (x == 0.0) throw Error(ErrorKind::DomainError, "whittaker", "x = 0 is not in the phase space");
        KernelPoint p;
        p.x = x;
        p.has_derivatives = derivs;
        if (x > 0.0) {
            p.region = Region::Out;
            p.log_psi = log_c_ - zsum_ * std::log(x) - x;
            PowU r = pow_u(z_, z_, b_, x, derivs);
            PowU s = pow_u(z_, z_ + 1.0, b_, x, derivs);
            p.r = r.f;
            p.s = s_plus_ * s.f;
            p.dr = r.df;
            p.ds = s_plus_ * s.df;
        } else {
            double X = -x;
            p.region = Region::In;
            p.log_psi = zsum_ * std::log(X) - X;
            PowU r = pow_u(-zp_, -zp_, b_, X, derivs);
            PowU s = pow_u(-zp_, 1.0 - zp_, b_, X, derivs);
            p.r = r.f;
            p.s = s_minus_ * s.f;
            // d/dx = −d/dX
            p.dr = -r.df;
            p.ds = -s_minus_ * s.df;
        }
        return p;
    }

private:
    cplx z_, zp_, b_;
    double zsum_;
    double log_c_;
    cplx s_plus_, s_minus_;
};

}  // namespace

namespace detail {
std::shared_ptr<const KernelImpl> make_whittaker_impl(const WhittakerKernel& k) {
    return std::make_shared<WhittakerImpl>(k);
}
}  // namespace detail

}  // namespace kdet
