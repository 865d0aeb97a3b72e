#include "kdet/painleve.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kdet/errors.hpp"
#include "kdet/specfun.hpp"

namespace kdet {

namespace odeint = boost::numeric::odeint;

namespace {

const cplx I(0.0, 1.0);

// exact for small integers, unlike std::pow on complex arguments
template <class T>
T sq(T v) {
    return v * v;
}

// Real part of a value that must be real up to rounding relative to scale.
double real_part(cplx v, double scale, const char* op) {
    if (std::abs(v.imag()) > 1e-9 * std::max(scale, 1e-300) && std::abs(v.imag()) > 1e-300) {
        std::ostringstream msg;
        msg << "imaginary part " << v.imag() << " relative to scale " << scale;
        throw Error(ErrorKind::DomainError, op, msg.str());
    }
    return v.real();
}

Residual make_residual(cplx raw, std::initializer_list<cplx> terms, const char* op) {
    double scale = 0.0;
    for (cplx t : terms) scale = std::max(scale, std::abs(t));
    Residual r;
    r.scale = scale;
    r.raw = real_part(raw, scale, op);
    r.normalized = scale > 0.0 ? r.raw / scale : 0.0;
    return r;
}

// ν-dependent constants of σ-PVI, real for the admissible parameter families.
struct PviConstants {
    std::array<double, 4> nu2;  // ν_i²
    double prod;                // ν₁ν₂ν₃ν₄
};

PviConstants pvi_constants(const NuQuad& nu) {
    PviConstants c;
    cplx prod = 1.0;
    double scale = 0.0;
    for (int i = 0; i < 4; ++i) {
        cplx sq = nu.nu[i] * nu.nu[i];
        c.nu2[i] = real_part(sq, std::abs(sq) + 1.0, "sigma_pvi");
        prod *= nu.nu[i];
        scale = std::max(scale, std::abs(sq));
    }
    c.prod = real_part(prod, scale * scale + 1.0, "sigma_pvi");
    return c;
}

struct PviTerms {
    double t1, q, pi, s_sum;  // σ′(Pσ″)², Q, Π(σ′+ν_i²), Σ_i Π_{j≠i}(σ′+ν_j²)
};

PviTerms pvi_terms(const SigmaSample& x, const PviConstants& c) {
    const double P = x.s * x.s - 0.25;
    PviTerms t;
    t.t1 = x.dsigma * sq(P * x.d2sigma);
    t.q = 2.0 * (x.s * x.dsigma - x.sigma) * x.dsigma - c.prod;
    std::array<double, 4> f;
    for (int i = 0; i < 4; ++i) f[i] = x.dsigma + c.nu2[i];
    t.pi = f[0] * f[1] * f[2] * f[3];
    t.s_sum = f[1] * f[2] * f[3] + f[0] * f[2] * f[3] + f[0] * f[1] * f[3] + f[0] * f[1] * f[2];
    return t;
}

// Normalized by the terms' magnitudes before internal cancellation, so that
// solutions on which every term vanishes (the linear one) stay well scaled.
double pvi_normalized(const SigmaSample& x, const PviConstants& c) {
    PviTerms t = pvi_terms(x, c);
    double q2 = t.q * t.q;
    double qm = std::abs(2.0 * (x.s * x.dsigma - x.sigma) * x.dsigma) + std::abs(c.prod);
    double pm = 1.0;
    for (double n2 : c.nu2) pm *= std::abs(x.dsigma) + std::abs(n2);
    double scale = std::max({std::abs(t.t1), qm * qm, pm});
    double raw = -t.t1 - q2 + t.pi;
    return scale > 0.0 ? raw / scale : 0.0;
}

double third_derivative(const SigmaSample& x, const PviConstants& c) {
    const double s = x.s, P = s * s - 0.25, dP = 2.0 * s;
    PviTerms t = pvi_terms(x, c);
    double num = -P * P * x.d2sigma * x.d2sigma - 2.0 * x.dsigma * P * dP * x.d2sigma -
                 4.0 * t.q * (2.0 * s * x.dsigma - x.sigma) + t.s_sum;
    return num / (2.0 * x.dsigma * P * P);
}

}  // namespace

NuQuad NuQuad::f21(const HypParams& p) {
    auto v = p.nu();
    return NuQuad{{v[0], v[1], v[2], v[3]}};
}

NuQuad NuQuad::jacobi(int n, double alpha, double beta) {
    double n1 = n + 0.5 * (alpha + beta);
    return NuQuad{{n1, n1, 0.5 * (alpha + beta), 0.5 * (alpha - beta)}};
}

NuQuad NuQuad::whittaker(cplx z, cplx zp) { return NuQuad{{0.0, 0.0, -z, -zp}}; }

Residual sigma_pvi_residual(const SigmaSample& x, const NuQuad& nu) {
    const cplx P = x.s * x.s - 0.25;
    const cplx sp = x.dsigma;
    cplx t1 = sp * sq(P * x.d2sigma);
    cplx prod = nu.nu[0] * nu.nu[1] * nu.nu[2] * nu.nu[3];
    cplx t2 = sq(2.0 * (x.s * sp - x.sigma) * sp - prod);
    cplx t3 = 1.0;
    for (cplx v : nu.nu) t3 *= sp + v * v;
    return make_residual(-t1 - t2 + t3, {t1, t2, t3}, "sigma_pvi_residual");
}

Residual sigma_pv_residual(const SigmaSample& x, const NuQuad& nu) {
    const cplx sp = x.dsigma;
    cplx sum = nu.nu[0] + nu.nu[1] + nu.nu[2] + nu.nu[3];
    cplx t1 = sq(cplx(x.s * x.d2sigma));
    cplx t2 = sq(2.0 * sp * sp - x.s * sp + x.sigma + sum * sp);
    cplx t3 = 4.0;
    for (cplx v : nu.nu) t3 *= sp + v;
    return make_residual(t1 - t2 + t3, {t1, t2, t3}, "sigma_pv_residual");
}

Residual sigma_pv_confluent_residual(const SigmaSample& x, cplx r) {
    const double t = x.s;
    const cplx sp = x.dsigma;
    cplx t1 = sq(cplx(t * x.d2sigma));
    cplx t2 = sq(2.0 * (t * sp - x.sigma) + sp * sp + I * (std::conj(r) - r) * sp);
    cplx t3 = sp * sp * (sp - 2.0 * I * r) * (sp + 2.0 * I * std::conj(r));
    return make_residual(-t1 - t2 + t3, {t1, t2, t3}, "sigma_pv_confluent_residual");
}

Residual sigma_jmms_residual(const SigmaSample& x) {
    const double t = x.s, a = t * x.dsigma - x.sigma;
    double t1 = sq(t * x.d2sigma);
    double t2 = 4.0 * a * (a + x.dsigma * x.dsigma);
    return make_residual(-t1 - t2, {t1, t2}, "sigma_jmms_residual");
}

SigmaSample pvi_sample(double s, const LogDetDerivatives& d, const NuQuad& nu) {
    PviConstants c = pvi_constants(nu);
    const double P = s * s - 0.25;
    SigmaSample x;
    x.s = s;
    x.sigma = P * d.d1 - c.nu2[0] * s + 0.5 * real_part(nu.nu[2] * nu.nu[3], 1.0, "pvi_sample");
    x.dsigma = 2.0 * s * d.d1 + P * d.d2 - c.nu2[0];
    x.d2sigma = 2.0 * d.d1 + 4.0 * s * d.d2 + P * d.d3;
    return x;
}

SigmaSample pv_sample(double s, const LogDetDerivatives& d) {
    return {s, s * d.d1, d.d1 + s * d.d2, 2.0 * d.d2 + s * d.d3};
}

double pvi_asymptote_coefficient(const HypParams& p, AsymptoteCoefficient coefficient) {
    const double pi = std::numbers::pi;
    cplx c = std::sin(pi * p.z()) * std::sin(pi * p.zp()) / (pi * pi);
    if (coefficient == AsymptoteCoefficient::KernelDiagonal) {
        cplx z = p.z(), zp = p.zp(), w = p.w(), wp = p.wp();
        double s = p.sigma();
        c *= std::exp(log_gamma_bracket({{z + w + 1.0, z + wp + 1.0, zp + w + 1.0, zp + wp + 1.0}, {s + 1.0, s + 2.0}}));
    }
    return real_part(c, std::abs(c), "pvi_sigma_asymptote");
}

SigmaSample pvi_sigma_asymptote(double s, const HypParams& p, AsymptoteCoefficient coefficient) {
    NuQuad nu = NuQuad::f21(p);
    PviConstants k = pvi_constants(nu);
    const double c = pvi_asymptote_coefficient(p, coefficient);
    const double e = 2.0 * nu.nu[0].real();
    const double pw = c * std::pow(s, -e);
    SigmaSample x;
    x.s = s;
    x.sigma = -k.nu2[0] * s + 0.5 * real_part(nu.nu[2] * nu.nu[3], 1.0, "pvi_sigma_asymptote") + pw;
    x.dsigma = -k.nu2[0] - e * pw / s;
    x.d2sigma = e * (e + 1.0) * pw / (s * s);
    return x;
}

std::vector<PiiPoint> integrate_pii(PiiPoint start, double s_end, int steps) {
    const char* op = "integrate_pii";
    if (!(s_end != start.s) || steps < 1 || !std::isfinite(start.u) || !std::isfinite(start.du))
        throw Error(ErrorKind::DomainError, op, "need finite start, s_end != s_start, steps >= 1");
    using State = std::array<double, 2>;
    State x{start.u, start.du};
    auto rhs = [](const State& y, State& dy, double s) {
        dy[0] = y[1];
        dy[1] = 2.0 * y[0] * y[0] * y[0] + s * y[0];
    };
    auto blown = [](const State& y) { return !std::isfinite(y[0]) || std::abs(y[0]) > 1e6; };
    auto blow_up = [&](double s) {
        return Error(ErrorKind::BlowUp, op, "solution left finite range near s = " + std::to_string(s));
    };
    auto stepper = odeint::make_controlled(1e-16, 1e-10, odeint::runge_kutta_fehlberg78<State>());
    std::vector<PiiPoint> out;
    out.reserve(steps + 1);
    out.push_back(start);
    const double ds = (s_end - start.s) / steps;
    double s = start.s;
    for (int i = 1; i <= steps; ++i) {
        double target = i == steps ? s_end : start.s + i * ds;
        try {
            odeint::integrate_adaptive(stepper, rhs, x, s, target, ds / 8, [&](const State& y, double t) {
                if (blown(y)) throw blow_up(t);
            });
        } catch (const odeint::step_adjustment_error&) {
            throw blow_up(s);
        }
        s = target;
        if (blown(x)) throw blow_up(s);
        out.push_back({s, x[0], x[1]});
    }
    return out;
}

std::vector<PiiPoint> integrate_pii_hastings_mcleod(double s_start, double s_end, int steps) {
    const char* op = "integrate_pii_hastings_mcleod";
    if (!(s_start >= 6.0) || !(s_end >= -8.0) || !(s_end < s_start) || steps < 1)
        throw Error(ErrorKind::DomainError, op, "need s_start >= 6, -8 <= s_end < s_start, steps >= 1");
    AiryValues a = airy(s_start);
    if (std::abs(a.ai) >= 1e-6) throw Error(ErrorKind::DomainError, op, "|Ai(s_start)| must be below 1e-6");
    return integrate_pii({s_start, -a.ai, -a.ai_prime}, s_end, steps);
}

P34Point p34_from_pii(double u, double du, double) { return {-u * u, -2.0 * u * du}; }

double p34_residual(double s, double r, double dr, double d2r) {
    double t1 = dr * dr / (2.0 * r), t2 = 4.0 * r * r, t3 = 2.0 * s * r;
    double scale = std::max({std::abs(d2r), std::abs(t1), std::abs(t2), std::abs(t3)});
    double raw = d2r - (t1 - t2 + t3);
    return scale > 0.0 ? raw / scale : 0.0;
}

double pvi_third_derivative(const SigmaSample& x, const NuQuad& nu) { return third_derivative(x, pvi_constants(nu)); }

std::vector<SigmaSample> pvi_integrate(SigmaSample init, const NuQuad& nu, const std::vector<double>& s_out,
                                       const PviOptions& options) {
    const char* op = "pvi_integrate";
    const PviConstants c = pvi_constants(nu);
    if (s_out.empty()) return {};
    const double dir = s_out.front() >= init.s ? 1.0 : -1.0;
    for (size_t i = 0; i < s_out.size(); ++i) {
        double prev = i == 0 ? init.s : s_out[i - 1];
        if (dir * (s_out[i] - prev) < 0.0) throw Error(ErrorKind::DomainError, op, "output points must be monotone");
        if (std::abs(s_out[i]) <= 0.5) throw Error(ErrorKind::DomainError, op, "|s| must stay above 1/2");
    }

    // Put σ″ on the algebraic equation: σ′P²σ″² = Π − Q².
    {
        const double P = init.s * init.s - 0.25;
        PviTerms t = pvi_terms(init, c);
        double ratio = (t.pi - t.q * t.q) / (init.dsigma * P * P);
        if (ratio >= 0.0) {
            double root = std::sqrt(ratio);
            init.d2sigma = std::abs(init.d2sigma - root) <= std::abs(init.d2sigma + root) ? root : -root;
        }
    }
    if (std::abs(pvi_normalized(init, c)) > options.residual_tol)
        throw Error(ErrorKind::ResidualDrift, op, "initial data do not satisfy the algebraic equation");

    using State = std::array<double, 3>;
    auto rhs = [&](const State& y, State& dy, double s) {
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = third_derivative({s, y[0], y[1], y[2]}, c);
    };
    auto stepper =
        odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_fehlberg78<State>());
    State y{init.sigma, init.dsigma, init.d2sigma};
    double s = init.s;
    double dt = dir * 1e-3 * std::max(1.0, std::abs(s));
    std::vector<SigmaSample> out;
    out.reserve(s_out.size());
    for (double target : s_out) {
        while (dir * (target - s) > 0.0) {
            double step = dir * std::min(std::abs(dt), std::abs(target - s));
            State trial = y;
            double st = s;
            double h = step;
            if (stepper.try_step(rhs, trial, st, h) == odeint::fail) {
                dt = h;
                if (std::abs(dt) < 1e-14 * std::max(1.0, std::abs(s)))
                    throw Error(ErrorKind::ResidualDrift, op, "step size underflow");
                continue;
            }
            for (double v : trial)
                if (!std::isfinite(v) || std::abs(v) > 1e12)
                    throw Error(ErrorKind::BlowUp, op, "state left finite range near s = " + std::to_string(st));
            if (std::abs(pvi_normalized({st, trial[0], trial[1], trial[2]}, c)) > options.residual_tol) {
                dt = 0.5 * step;
                if (std::abs(dt) < 1e-14 * std::max(1.0, std::abs(s)))
                    throw Error(ErrorKind::ResidualDrift, op,
                                "algebraic residual above tolerance near s = " + std::to_string(s));
                continue;
            }
            y = trial;
            s = (dir * (target - st) <= 1e-15 * std::max(1.0, std::abs(target))) ? target : st;
            // keep the grown step unless we only shortened it to hit the target
            if (std::abs(h) > std::abs(dt) || std::abs(step) == std::abs(dt)) dt = h;
        }
        out.push_back({s, y[0], y[1], y[2]});
    }
    return out;
}

}  // namespace kdet
