#include <cmath>
#include <numbers>
#include <sstream>

#include "impl.hpp"
#include "kdet/errors.hpp"

namespace kdet {

namespace detail {

double real_checked(cplx v, const char* op) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::DomainError, op, "non-finite kernel value");
    if (std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v.real()))) {
        std::ostringstream msg;
        msg << "value " << v << " is not real";
        throw Error(ErrorKind::DomainError, op, msg.str());
    }
    return v.real();
}

double log_c_factor(cplx a, cplx b, const char* op) {
    constexpr double kPi = std::numbers::pi;
    if (std::abs(a.imag()) < 8.0 && std::abs(b.imag()) < 8.0) {
        cplx c = sin_pi(a) * sin_pi(b);
        if (c == 0.0) return -INFINITY;
        if (std::abs(c.imag()) > 1e-12 * std::abs(c) || c.real() < 0.0)
            throw Error(ErrorKind::DomainError, op, "sin(pi a) sin(pi b) is not positive");
        return std::log(c.real()) - 2.0 * std::log(kPi);
    }
    cplx lc = log_sin_pi(a) + log_sin_pi(b);
    double phase = std::remainder(lc.imag(), 2.0 * kPi);
    if (std::abs(phase) > 1e-12 * (1.0 + std::abs(lc.imag())))
        throw Error(ErrorKind::DomainError, op, "sin(pi a) sin(pi b) is not positive");
    return lc.real() - 2.0 * std::log(kPi);
}

double KernelImpl::pair(const KernelPoint& p, const KernelPoint& q) const {
    double dx = p.x - q.x;
    if (std::abs(dx) <= kNearDiagonal)
        throw Error(ErrorKind::NearDiagonal, "kernel_eval", "points closer than 1e-8; use kernel_diag");
    if (p.log_psi == -INFINITY || q.log_psi == -INFINITY) return 0.0;
    double half = 0.5 * (p.log_psi + q.log_psi);
    cplx v;
    if (p.region == q.region) {
        if (std::abs(dx) < kBlendRadius) {
            // (r(x)s(y) − s(x)r(y))/(x−y) = r′s − s′r at the midpoint, up to O((x−y)²)
            KernelPoint m = point(0.5 * (p.x + q.x), true);
            v = std::exp(half + m.log_scale) * (m.dr * m.s - m.ds * m.r);
        } else {
            v = std::exp(half + p.log_scale) * (p.r * q.s - p.s * q.r) / dx;
        }
    } else {
        v = (std::exp(cplx(half)) * p.r * q.r - std::exp(half + p.log_scale + q.log_scale) * p.s * q.s) / dx;
    }
    return real_checked(v, "kernel_eval");
}

double KernelImpl::diag(const KernelPoint& p) const {
    if (!p.has_derivatives) throw Error(ErrorKind::DomainError, "kernel_diag", "point evaluated without derivatives");
    if (p.log_psi == -INFINITY) return 0.0;
    cplx v = std::exp(p.log_psi + p.log_scale) * (p.dr * p.s - p.ds * p.r);
    return real_checked(v, "kernel_diag");
}

namespace {

class ZeroImpl final : public KernelImpl {
public:
    ZeroImpl() : KernelImpl(ZeroKernel{}) {}
    KernelPoint point(double x, bool d) const override {
        KernelPoint p;
        p.x = x;
        p.has_derivatives = d;
        return p;
    }
    double pair(const KernelPoint&, const KernelPoint&) const override { return 0.0; }
    double diag(const KernelPoint&) const override { return 0.0; }
    const char* name() const override { return "zero"; }
};

class ConstantImpl final : public KernelImpl {
public:
    explicit ConstantImpl(ConstantKernel k) : KernelImpl(k), value_(k.value) {}
    KernelPoint point(double x, bool d) const override {
        KernelPoint p;
        p.x = x;
        p.has_derivatives = d;
        return p;
    }
    double pair(const KernelPoint&, const KernelPoint&) const override { return value_; }
    double diag(const KernelPoint&) const override { return value_; }
    const char* name() const override { return "constant"; }

private:
    double value_;
};

}  // namespace

std::shared_ptr<const KernelImpl> make_zero_impl() { return std::make_shared<ZeroImpl>(); }
std::shared_ptr<const KernelImpl> make_constant_impl(const ConstantKernel& k) {
    return std::make_shared<ConstantImpl>(k);
}

}  // namespace detail

namespace {

template <class... F>
struct Overload : F... {
    using F::operator()...;
};
template <class... F>
Overload(F...) -> Overload<F...>;

std::shared_ptr<const detail::KernelImpl> build(const KernelSpec& spec) {
    return std::visit(Overload{
                          [](const F21Kernel& k) { return detail::make_f21_impl(k); },
                          [](const WhittakerKernel& k) { return detail::make_whittaker_impl(k); },
                          [](const ConfluentKernel& k) { return detail::make_confluent_impl(k); },
                          [](const SineKernel&) { return detail::make_sine_impl(); },
                          [](const AiryKernel&) { return detail::make_airy_impl(); },
                          [](const JacobiKernel& k) { return detail::make_jacobi_impl(k); },
                          [](const ZeroKernel&) { return detail::make_zero_impl(); },
                          [](const ConstantKernel& k) { return detail::make_constant_impl(k); },
                      },
                      spec);
}

}  // namespace

KernelEvaluator::KernelEvaluator(const KernelSpec& spec) : impl_(build(spec)) {}

const KernelSpec& KernelEvaluator::spec() const { return impl_->spec(); }

KernelPoint KernelEvaluator::point(double x, bool with_derivatives) const {
    if (!std::isfinite(x)) throw Error(ErrorKind::DomainError, "kernel_eval", "non-finite point");
    return impl_->point(x, with_derivatives);
}

double KernelEvaluator::pair(const KernelPoint& p, const KernelPoint& q) const { return impl_->pair(p, q); }

double KernelEvaluator::diag(const KernelPoint& p) const { return impl_->diag(p); }

double KernelEvaluator::eval(double x, double y) const {
    if (std::abs(x - y) <= kNearDiagonal)
        throw Error(ErrorKind::NearDiagonal, "kernel_eval", "points closer than 1e-8; use kernel_diag");
    return pair(point(x), point(y));
}

double KernelEvaluator::diag(double x) const { return diag(point(x, true)); }

double kernel_eval(const KernelSpec& spec, double x, double y) { return KernelEvaluator(spec).eval(x, y); }

double kernel_diag(const KernelSpec& spec, double x) { return KernelEvaluator(spec).diag(x); }

const char* kernel_name(const KernelSpec& spec) {
    return std::visit(Overload{
                          [](const F21Kernel&) { return "f21"; },
                          [](const WhittakerKernel&) { return "whittaker"; },
                          [](const ConfluentKernel&) { return "confluent"; },
                          [](const SineKernel&) { return "sine"; },
                          [](const AiryKernel&) { return "airy"; },
                          [](const JacobiKernel&) { return "jacobi"; },
                          [](const ZeroKernel&) { return "zero"; },
                          [](const ConstantKernel&) { return "constant"; },
                      },
                      spec);
}

Region region_of(const KernelSpec& spec, double x) {
    if (std::holds_alternative<F21Kernel>(spec)) {
        if (std::abs(x) == 0.5) throw Error(ErrorKind::DomainError, "region_of", "x = +/-1/2 is not in the phase space");
        return std::abs(x) > 0.5 ? Region::Out : Region::In;
    }
    if (std::holds_alternative<WhittakerKernel>(spec)) {
        if (x == 0.0) throw Error(ErrorKind::DomainError, "region_of", "x = 0 is not in the phase space");
        return x > 0.0 ? Region::Out : Region::In;
    }
    if (std::holds_alternative<JacobiKernel>(spec)) return Region::In;
    return Region::Out;
}

}  // namespace kdet
