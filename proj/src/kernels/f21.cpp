#include <cmath>
#include <limits>
#include <numbers>

#include "impl.hpp"
#include "kdet/errors.hpp"

namespace kdet {

namespace {

constexpr double kPi = std::numbers::pi;

// −sin(πa)/π · e^{lb}, kept finite when sin(πa) is huge and the bracket tiny.
cplx sine_times_bracket(cplx a, cplx lb) {
    if (std::abs(a.imag()) < 8.0) {
        cplx s = sin_pi(a);
        if (s == 0.0) return 0.0;
        return -s / kPi * std::exp(lb);
    }
    return -std::exp(log_sin_pi(a) - std::log(kPi) + lb);
}

struct OutValues {
    cplx r, s_hat, dr, ds_hat;
};

struct InValues {
    cplx r, s, dr, ds;
};

class F21Impl final : public detail::KernelImpl {
public:
    explicit F21Impl(const F21Kernel& k) : KernelImpl(k), p_(k.params) {
        cplx z = p_.z(), zp = p_.zp(), w = p_.w(), wp = p_.wp();
        s_ = z + zp + w + wp;
        zsum_ = (z + zp).real();
        wsum_ = (w + wp).real();
        log_cz_ = detail::log_c_factor(z, zp, "psi");
        log_cw_ = detail::log_c_factor(w, wp, "psi");
        log_bracket_ = log_gamma_bracket({{z + w + 1.0, z + wp + 1.0, zp + w + 1.0, zp + wp + 1.0}, {s_ + 1.0, s_ + 2.0}});
        r_coef_[0] = sine_times_bracket(z, log_gamma_bracket({{zp - z, z + w + 1.0, z + wp + 1.0}, {s_ + 1.0}}));
        r_coef_[1] = sine_times_bracket(zp, log_gamma_bracket({{z - zp, zp + w + 1.0, zp + wp + 1.0}, {s_ + 1.0}}));
        s_coef_[0] = sine_times_bracket(z, log_gamma_bracket({{zp - z, s_}, {zp + w, zp + wp}}));
        s_coef_[1] = sine_times_bracket(zp, log_gamma_bracket({{z - zp, s_}, {z + w, z + wp}}));
    }

    const char* name() const override { return "f21"; }

    cplx log_bracket() const { return log_bracket_; }

    double log_psi(double x) const {
        if (x > 0.5) return log_cz_ - zsum_ * std::log(x - 0.5) - wsum_ * std::log(x + 0.5);
        if (x < -0.5) return log_cw_ - wsum_ * std::log(-x - 0.5) - zsum_ * std::log(0.5 - x);
        if (x > -0.5 && x < 0.5) return zsum_ * std::log(0.5 - x) + wsum_ * std::log(0.5 + x);
        throw Error(ErrorKind::DomainError, "psi", "x = +/-1/2 is not in the phase space");
    }

    OutValues out_values(cplx zeta, bool derivs) const {
        cplx z = p_.z(), zp = p_.zp(), wp = p_.wp();
        cplx g = (zeta + 0.5) / (zeta - 0.5);
        cplx gw = std::exp(wp * std::log(g));
        cplx t = 1.0 / (0.5 - zeta);
        // 1 − t, formed without cancellation near ζ = −1/2
        cplx wt = (-0.5 - zeta) / (0.5 - zeta);
        cplx f1 = gauss_2f1_complement(z + wp, zp + wp, s_, wt);
        cplx f2 = gauss_2f1_complement(z + wp + 1.0, zp + wp + 1.0, s_ + 2.0, wt);
        OutValues v;
        v.r = gw * f1;
        v.s_hat = gw * f2 / (zeta - 0.5);
        if (derivs) {
            cplx dlg = -1.0 / (zeta * zeta - 0.25);
            cplx dt = t * t;
            v.dr = v.r * wp * dlg + gw * gauss_2f1_complement_deriv(z + wp, zp + wp, s_, wt) * dt;
            v.ds_hat = v.s_hat * (wp * dlg - 1.0 / (zeta - 0.5)) +
                       gw / (zeta - 0.5) * gauss_2f1_complement_deriv(z + wp + 1.0, zp + wp + 1.0, s_ + 2.0, wt) * dt;
        }
        return v;
    }

    InValues in_values(cplx zeta, bool derivs) const {
        cplx z = p_.z(), zp = p_.zp(), w = p_.w(), wp = p_.wp();
        cplx u = 0.5 - zeta, v = 0.5 + zeta;
        cplx lu = std::log(u), lv = std::log(v);
        InValues out{};
        // Second summands are the first with z and z′ interchanged.
        const cplx zs[2] = {z, zp}, zps[2] = {zp, z};
        for (int k = 0; k < 2; ++k) {
            cplx a = zs[k], b = zps[k];
            if (r_coef_[k] == 0.0 && s_coef_[k] == 0.0) continue;
            cplx pw = std::exp(-w * lv - b * lu);
            cplx dlog = -w / v + b / u;
            cplx c = a - b + 1.0;
            if (r_coef_[k] != 0.0) {
                cplx f = gauss_2f1_complement(a + wp + 1.0, -b - w, c, v);
                out.r += r_coef_[k] * pw * f;
                if (derivs)
                    out.dr += r_coef_[k] * pw * (dlog * f - gauss_2f1_complement_deriv(a + wp + 1.0, -b - w, c, v));
            }
            if (s_coef_[k] != 0.0) {
                cplx f = gauss_2f1_complement(a + wp, -b - w + 1.0, c, v);
                out.s += s_coef_[k] * pw * f;
                if (derivs) out.ds += s_coef_[k] * pw * (dlog * f - gauss_2f1_complement_deriv(a + wp, -b - w + 1.0, c, v));
            }
        }
        return out;
    }

    KernelPoint point(double x, bool derivs) const override {
        KernelPoint p;
        p.x = x;
        p.log_psi = log_psi(x);
        p.has_derivatives = derivs;
        if (std::abs(x) > 0.5) {
            p.region = Region::Out;
            p.log_scale = log_bracket_;
            if (p.log_psi == -INFINITY) return p;
            OutValues v = out_values(x, derivs);
            p.r = v.r;
            p.s = v.s_hat;
            p.dr = v.dr;
            p.ds = v.ds_hat;
        } else {
            p.region = Region::In;
            InValues v = in_values(x, derivs);
            p.r = v.r;
            p.s = v.s;
            p.dr = v.dr;
            p.ds = v.ds;
        }
        return p;
    }

private:
    HypParams p_;
    cplx s_;
    double zsum_, wsum_;
    double log_cz_, log_cw_;
    cplx log_bracket_;
    cplx r_coef_[2], s_coef_[2];
};

}  // namespace

namespace detail {
std::shared_ptr<const KernelImpl> make_f21_impl(const F21Kernel& k) { return std::make_shared<F21Impl>(k); }
}  // namespace detail

double psi(const HypParams& params, double x) { return std::exp(F21Impl(F21Kernel{params}).log_psi(x)); }

RSValues rs_functions(const HypParams& params, cplx zeta) {
    F21Impl impl(F21Kernel{params});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    RSValues v{nan, nan, nan, nan};
    // On the real axis each pair is defined only off its own cut.
    bool real = zeta.imag() == 0.0;
    if (!real || std::abs(zeta.real()) > 0.5) {
        OutValues o = impl.out_values(zeta, false);
        v.r_out = o.r;
        v.s_out = std::exp(impl.log_bracket()) * o.s_hat;
    }
    if (!real || std::abs(zeta.real()) < 0.5) {
        InValues i = impl.in_values(zeta, false);
        v.r_in = i.r;
        v.s_in = i.s;
    }
    return v;
}

double l_kernel_eval(const HypParams& params, double x, double y) {
    Region rx = region_of(F21Kernel{params}, x), ry = region_of(F21Kernel{params}, y);
    if (rx == ry) return 0.0;
    if (!(params.strict()))
        throw Error(ErrorKind::DomainError, "l_kernel_eval", "the L kernel requires strict-mode parameters");
    F21Impl impl(F21Kernel{params});
    double v = std::exp(0.5 * (impl.log_psi(x) + impl.log_psi(y))) / (x - y);
    // A(x, y) for x out; −A*(x, y) = −A(y, x) for x in, which has the same form.
    return v;
}

}  // namespace kdet
