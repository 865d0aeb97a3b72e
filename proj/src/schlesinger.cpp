#include "kdet/schlesinger.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "kdet/errors.hpp"

namespace kdet {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kMinPoleGap = 1e-9;

Mat2 sigma3() {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

Mat2 comm(const Mat2& x, const Mat2& y) { return x * y - y * x; }

void validate(const ResidueSystem& sys, const char* op) {
    const size_t n = sys.poles.size();
    if (n == 0 || sys.residues.size() != n)
        throw Error(ErrorKind::ConfigError, op, "need one residue per pole");
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(sys.poles[i]) || !sys.residues[i].allFinite())
            throw Error(ErrorKind::DomainError, op, "non-finite pole or residue");
        if (i == 0) continue;
        if (std::abs(sys.poles[i] - sys.poles[i - 1]) < kMinPoleGap)
            throw Error(ErrorKind::PoleCollision, op, "poles closer than 1e-9");
        if (sys.poles[i] < sys.poles[i - 1]) throw Error(ErrorKind::ConfigError, op, "poles must be increasing");
    }
    if (sys.d_matrix && !sys.d_matrix->allFinite()) throw Error(ErrorKind::DomainError, op, "non-finite D");
    for (size_t k = 0; k < sys.moving.size(); ++k) {
        int j = sys.moving[k];
        if (j < 0 || j >= static_cast<int>(n)) throw Error(ErrorKind::ConfigError, op, "moving index out of range");
        for (size_t m = 0; m < k; ++m)
            if (sys.moving[m] == j) throw Error(ErrorKind::ConfigError, op, "repeated moving index");
    }
}

bool is_moving(const ResidueSystem& sys, int j) {
    return std::find(sys.moving.begin(), sys.moving.end(), j) != sys.moving.end();
}

double real_checked(cplx v, double scale, const char* op) {
    if (std::abs(v.imag()) > 1e-8 * std::max(scale, 1.0)) {
        std::ostringstream msg;
        msg << "imaginary part " << v.imag() << " in a real quantity";
        throw Error(ErrorKind::DomainError, op, msg.str());
    }
    return v.real();
}

// Traces, determinants and Σ B_l (without D) that a Schlesinger flow conserves.
struct Conserved {
    std::vector<cplx> trace, det;
    Mat2 sum = Mat2::Zero();
};

Conserved conserved(const ResidueSystem& sys) {
    Conserved c;
    for (const Mat2& b : sys.residues) {
        c.trace.push_back(b.trace());
        c.det.push_back(b.determinant());
        c.sum += b;
    }
    return c;
}

double drift(const Conserved& a, const Conserved& b, bool with_sum, const std::vector<Mat2>& residues) {
    double d = 0.0;
    for (size_t i = 0; i < a.trace.size(); ++i) {
        double scale = std::max(1.0, residues[i].squaredNorm());
        d = std::max(d, std::abs(a.trace[i] - b.trace[i]) / std::sqrt(scale));
        d = std::max(d, std::abs(a.det[i] - b.det[i]) / scale);
    }
    if (with_sum) d = std::max(d, (a.sum - b.sum).norm() / std::max(1.0, a.sum.norm()));
    return d;
}

using State = std::vector<double>;

State pack(const std::vector<Mat2>& residues) {
    State y;
    y.reserve(8 * residues.size());
    for (const Mat2& m : residues)
        for (int k = 0; k < 4; ++k) {
            y.push_back(m(k / 2, k % 2).real());
            y.push_back(m(k / 2, k % 2).imag());
        }
    return y;
}

void unpack(const State& y, std::vector<Mat2>& residues) {
    for (size_t i = 0; i < residues.size(); ++i)
        for (int k = 0; k < 4; ++k) residues[i](k / 2, k % 2) = cplx(y[8 * i + 2 * k], y[8 * i + 2 * k + 1]);
}

}  // namespace

const Mat2& ResidueSystem::at(double pole) const {
    for (size_t i = 0; i < poles.size(); ++i)
        if (poles[i] == pole) return residues.at(i);
    throw Error(ErrorKind::ConfigError, "ResidueSystem", "no pole at " + std::to_string(pole));
}

ResidueSystem one_interval_system(double s, const Mat2& a, const Mat2& b, const Mat2& c) {
    if (!(s > 0.5)) throw Error(ErrorKind::DomainError, "one_interval_system", "need s > 1/2");
    ResidueSystem sys;
    sys.poles = {-0.5, 0.5, s};
    sys.residues = {b, a, c};
    sys.moving = {2};
    validate(sys, "one_interval_system");
    return sys;
}

std::vector<Mat2> schlesinger_rhs(const ResidueSystem& sys, int j) {
    const char* op = "schlesinger_rhs";
    validate(sys, op);
    if (!is_moving(sys, j)) throw Error(ErrorKind::ConfigError, op, "pole is not in the moving set");
    const size_t n = sys.poles.size();
    const Mat2& bj = sys.residues[j];
    std::vector<Mat2> out(n, Mat2::Zero());
    for (size_t l = 0; l < n; ++l) {
        if (static_cast<int>(l) == j) continue;
        Mat2 t = comm(bj, sys.residues[l]) / (sys.poles[j] - sys.poles[l]);
        out[l] = t;
        out[j] -= t;
    }
    if (sys.d_matrix) out[j] -= comm(bj, *sys.d_matrix);
    return out;
}

std::vector<double> omega_eval(const ResidueSystem& sys) {
    const char* op = "omega_eval";
    validate(sys, op);
    std::vector<double> out;
    for (int j : sys.moving) {
        cplx w = 0.0;
        double scale = 0.0;
        const Mat2& bj = sys.residues[j];
        for (size_t l = 0; l < sys.poles.size(); ++l) {
            if (static_cast<int>(l) == j) continue;
            cplx t = (bj * sys.residues[l]).trace() / (sys.poles[j] - sys.poles[l]);
            w += t;
            scale = std::max(scale, std::abs(t));
        }
        if (sys.d_matrix) {
            cplx t = (bj * *sys.d_matrix).trace();
            w += t;
            scale = std::max(scale, std::abs(t));
        }
        out.push_back(real_checked(w, scale, op));
    }
    return out;
}

double sigma_hat(const SigmaSample& x, const HypParams& p) {
    const double sg = p.sigma();
    cplx ta = 0.5 * (p.z() - p.zp()), tb = 0.5 * (p.w() - p.wp());
    cplx d = ta * ta - tb * tb;
    return x.sigma + 0.25 * sg * sg * x.s - 0.5 * real_checked(d, std::abs(d), "sigma_hat");
}

Reconstruction reconstruct_residues(const SigmaSample& x, const HypParams& p, double tol) {
    const char* op = "reconstruct_residues";
    const double sg = p.sigma();
    if (sg == 0.0) throw Error(ErrorKind::DegenerateData, op, "z + z' + w + w' = 0");
    if (!(x.s > 0.5)) throw Error(ErrorKind::DomainError, op, "need s > 1/2");
    const double s = x.s, P = s * s - 0.25;
    const cplx ta2 = 0.25 * (p.z() - p.zp()) * (p.z() - p.zp());
    const cplx tb2 = 0.25 * (p.w() - p.wp()) * (p.w() - p.wp());
    const double h = sigma_hat(x, p);
    const double hp = x.dsigma + 0.25 * sg * sg;
    const double hpp = x.d2sigma;

    const cplx zc = -hp / sg;
    if (std::abs(zc) <= 1e-12 * (1.0 + std::abs(x.dsigma)))
        throw Error(ErrorKind::DegenerateData, op, "sigma' + nu_1^2 vanishes");
    const cplx za = ((s + 0.5) * hp - h - ta2 + tb2 - 0.25 * sg * sg) / sg;
    const cplx xc = 1.0, yc = -zc * zc;
    // y_a − z_c² x_a = T and x_a y_a = C
    const cplx T = h - (s - 0.5) * hp - 2.0 * za * zc;
    const cplx C = ta2 - za * za;
    const cplx zc2 = zc * zc;
    const cplx disc = std::sqrt(T * T + 4.0 * zc2 * C);
    // cancellation-free pair of roots of z_c² x² + T x − C = 0
    const cplx q = -0.5 * (T + (std::real(std::conj(T) * disc) >= 0.0 ? disc : -disc));
    std::array<cplx, 2> roots;
    roots[0] = q / zc2;
    roots[1] = q != 0.0 ? -C / q : roots[0];

    const double target = P * hpp / sg;
    std::array<double, 2> miss;
    for (int k = 0; k < 2; ++k) {
        cplx xa = roots[k], ya = T + zc2 * xa;
        cplx v = xc * ya - xa * yc;
        double scale = std::max({std::abs(target), std::abs(ya), std::abs(zc2 * xa)});
        miss[k] = scale > 0.0 ? std::abs(v - target) / scale : 0.0;
    }
    const int best = miss[0] <= miss[1] ? 0 : 1;
    const bool distinct = std::abs(roots[0] - roots[1]) > 1e-8 * std::max(1.0, std::abs(roots[best]));
    if (miss[best] > tol) {
        std::ostringstream msg;
        msg << "tr(sigma3 [a, c]) misses (s^2-1/4) sigma''/s by " << miss[best];
        throw Error(ErrorKind::DegenerateData, op, msg.str());
    }
    if (distinct && miss[1 - best] <= tol)
        throw Error(ErrorKind::DegenerateData, op, "both branches fit the data");

    const cplx xa = roots[best], ya = T + zc2 * xa;
    Mat2 a, c;
    a << za, xa, ya, -za;
    c << zc, xc, yc, -zc;
    Mat2 b = -0.5 * sg * sigma3() - a - c;
    Reconstruction r;
    r.system = one_interval_system(s, a, b, c);
    r.mismatch = miss[best];
    r.rejected_mismatch = miss[1 - best];
    return r;
}

double InvariantReport::max() const { return std::max({trace, det_a, det_b, det_c, sum_rule}); }

InvariantReport residue_invariants(const ResidueSystem& sys, const HypParams& p) {
    const char* op = "residue_invariants";
    validate(sys, op);
    const cplx ta2 = 0.25 * (p.z() - p.zp()) * (p.z() - p.zp());
    const cplx tb2 = 0.25 * (p.w() - p.wp()) * (p.w() - p.wp());
    InvariantReport r;
    Mat2 sum = Mat2::Zero();
    for (size_t i = 0; i < sys.poles.size(); ++i) {
        const Mat2& m = sys.residues[i];
        r.trace = std::max(r.trace, std::abs(m.trace()));
        sum += m;
        double scale = std::max(1.0, m.squaredNorm());
        if (sys.poles[i] == 0.5) {
            r.det_a = std::abs(m.determinant() + ta2) / std::max(1.0, std::abs(ta2));
        } else if (sys.poles[i] == -0.5) {
            r.det_b = std::abs(m.determinant() + tb2) / std::max(1.0, std::abs(tb2));
        } else {
            r.det_c = std::max(r.det_c, std::abs(m.determinant()) / scale);
        }
    }
    r.sum_rule = (sum + 0.5 * p.sigma() * sigma3()).norm() / std::max(1.0, std::abs(p.sigma()));
    return r;
}

std::vector<ResidueSystem> integrate_flow(const ResidueSystem& sys0, int pole_index, const std::vector<double>& b_out,
                                          const FlowOptions& options) {
    const char* op = "integrate_flow";
    validate(sys0, op);
    if (!is_moving(sys0, pole_index)) throw Error(ErrorKind::ConfigError, op, "pole is not in the moving set");
    if (b_out.empty()) return {};
    const double b0 = sys0.poles[pole_index];
    const double dir = b_out.front() >= b0 ? 1.0 : -1.0;
    double lo = b0, hi = b0;
    for (size_t i = 0; i < b_out.size(); ++i) {
        double prev = i == 0 ? b0 : b_out[i - 1];
        if (dir * (b_out[i] - prev) < 0.0) throw Error(ErrorKind::ConfigError, op, "output points must be monotone");
        lo = std::min(lo, b_out[i]);
        hi = std::max(hi, b_out[i]);
    }
    for (size_t l = 0; l < sys0.poles.size(); ++l) {
        if (static_cast<int>(l) == pole_index) continue;
        if (sys0.poles[l] > lo - kMinPoleGap && sys0.poles[l] < hi + kMinPoleGap)
            throw Error(ErrorKind::PoleCollision, op, "path passes within 1e-9 of another pole");
    }

    const bool with_sum = !sys0.d_matrix.has_value();
    const Conserved c0 = conserved(sys0);
    ResidueSystem work = sys0;
    auto rhs = [&](const State& y, State& dy, double b) {
        unpack(y, work.residues);
        work.poles[pole_index] = b;
        std::vector<Mat2> d = schlesinger_rhs(work, pole_index);
        dy = pack(d);
    };
    auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_fehlberg78<State>());
    State y = pack(sys0.residues);
    double b = b0;
    std::vector<ResidueSystem> out;
    out.reserve(b_out.size());
    for (double target : b_out) {
        if (target != b) {
            double dt = 0.01 * (target - b);
            odeint::integrate_adaptive(stepper, rhs, y, b, target, dt);
            b = target;
        }
        ResidueSystem snap = sys0;
        unpack(y, snap.residues);
        snap.poles[pole_index] = b;
        double d = drift(c0, conserved(snap), with_sum, snap.residues);
        if (!(d <= options.invariant_tol)) {
            std::ostringstream msg;
            msg << "conserved quantities drifted by " << d << " at b = " << b;
            throw Error(ErrorKind::InvariantDrift, op, msg.str());
        }
        out.push_back(std::move(snap));
    }
    return out;
}

}  // namespace kdet
