#pragma once

#include <memory>

#include "kdet/kernels.hpp"

namespace kdet::detail {

class KernelImpl {
public:
    explicit KernelImpl(KernelSpec spec) : spec_(std::move(spec)) {}
    virtual ~KernelImpl() = default;

    const KernelSpec& spec() const { return spec_; }
    virtual KernelPoint point(double x, bool with_derivatives) const = 0;
    // Integrable-form combination; overridden by the test hooks.
    virtual double pair(const KernelPoint& p, const KernelPoint& q) const;
    virtual double diag(const KernelPoint& p) const;
    virtual const char* name() const = 0;

private:
    KernelSpec spec_;
};

std::shared_ptr<const KernelImpl> make_f21_impl(const F21Kernel& k);
std::shared_ptr<const KernelImpl> make_whittaker_impl(const WhittakerKernel& k);
std::shared_ptr<const KernelImpl> make_confluent_impl(const ConfluentKernel& k);
std::shared_ptr<const KernelImpl> make_sine_impl();
std::shared_ptr<const KernelImpl> make_airy_impl();
std::shared_ptr<const KernelImpl> make_jacobi_impl(const JacobiKernel& k);
std::shared_ptr<const KernelImpl> make_zero_impl();
std::shared_ptr<const KernelImpl> make_constant_impl(const ConstantKernel& k);

// log C(a, b) = log(sin πa sin πb / π²); −∞ when a factor vanishes.
double log_c_factor(cplx a, cplx b, const char* op);

// Real part of a value that must be real; throws DomainError otherwise.
double real_checked(cplx v, const char* op);

}  // namespace kdet::detail
