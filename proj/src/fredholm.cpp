#include "kdet/fredholm.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <map>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "kdet/errors.hpp"
#include "kdet/quadrature.hpp"

namespace kdet {

namespace {

constexpr double kPivotFloor = 1e-14;
constexpr double kOracleTraceLimit = 0.3;

bool same_point(double a, double b) { return std::abs(a - b) <= 1e-15 * (1.0 + std::abs(a)); }

int graded_power(const GridOptions& opt, double x) {
    for (const auto& g : opt.graded)
        if (same_point(g.x, x)) return g.power;
    return 1;
}

// Gauss–Legendre on (0, 1); also returns 1 − t without cancellation.
struct UnitRule {
    std::vector<double> t, one_minus_t, w;
};

UnitRule unit_rule(int n) {
    QuadRule r = gauss_legendre_rule(n);
    UnitRule u;
    for (int i = 0; i < n; ++i) {
        u.t.push_back(0.5 * (1.0 + r.nodes[i]));
        u.one_minus_t.push_back(0.5 * (1.0 - r.nodes[i]));
        u.w.push_back(0.5 * r.weights[i]);
    }
    return u;
}

// Lowers a grading power until the node nearest the endpoint e stays
// distinguishable from e in double precision. Offsets from e = 0 are exact,
// so there only underflow matters.
int resolvable_power(int m, double tmin, double len, double e) {
    const double floor = e == 0.0 ? 1e-250 : 1e-13 * std::max(1.0, std::abs(e));
    while (m > 1 && len * std::pow(tmin, m) < floor) --m;
    return m;
}

void add_finite(Grid& g, double a, double b, int n, int ma, int mb) {
    UnitRule u = unit_rule(n);
    double len = b - a;
    ma = resolvable_power(ma, *std::min_element(u.t.begin(), u.t.end()), len, a);
    mb = resolvable_power(mb, *std::min_element(u.t.begin(), u.t.end()), len, b);
    for (int i = 0; i < n; ++i) {
        double t = u.t[i], s = u.one_minus_t[i];
        double x, dx;
        if (ma == 1 && mb == 1) {
            x = a + len * t;
            dx = len;
        } else if (ma == 1) {
            x = b - len * std::pow(s, mb);
            dx = len * mb * std::pow(s, mb - 1);
        } else if (mb == 1) {
            x = a + len * std::pow(t, ma);
            dx = len * ma * std::pow(t, ma - 1);
        } else {
            double A = std::pow(t, ma), B = std::pow(s, mb);
            double dA = ma * std::pow(t, ma - 1), dB = -mb * std::pow(s, mb - 1);
            double den = A + B;
            // measured from the nearer endpoint to keep relative accuracy there
            x = t < 0.5 ? a + len * A / den : b - len * B / den;
            dx = len * (dA * B - A * dB) / (den * den);
        }
        g.nodes.push_back(x);
        g.weights.push_back(u.w[i] * dx);
    }
}

// (a, +∞) if dir = +1, (−∞, a) if dir = −1.
void add_semi_infinite(Grid& g, double a, int dir, int n, int ma, const GridOptions& opt) {
    UnitRule u = unit_rule(n);
    const double L = opt.map_scale;
    const int p = opt.infinite_power;
    ma = resolvable_power(ma, *std::min_element(u.t.begin(), u.t.end()), L * p, a);
    for (int i = 0; i < n; ++i) {
        // t = τ^ma grades the finite endpoint
        double t = std::pow(u.t[i], ma);
        double dt = ma * std::pow(u.t[i], ma - 1);
        double s = ma == 1 ? u.one_minus_t[i] : 1.0 - t;
        double off = L * (std::pow(s, -p) - 1.0);
        double dx = L * p * std::pow(s, -p - 1) * dt;
        g.nodes.push_back(a + dir * off);
        g.weights.push_back(u.w[i] * dx);
    }
}

void sort_grid(Grid& g) {
    std::vector<size_t> idx(g.nodes.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return g.nodes[i] < g.nodes[j]; });
    Grid out;
    for (size_t i : idx) {
        out.nodes.push_back(g.nodes[i]);
        out.weights.push_back(g.weights[i]);
    }
    g = std::move(out);
}

// Runs body(begin, end) over [0, n) on up to `threads` threads.
void parallel_for(int n, int threads, const std::function<void(int, int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int lo = t * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&, t, lo, hi] {
            try {
                if (lo < hi) body(lo, hi);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double entry(const KernelEvaluator& k, const KernelPoint& p, const KernelPoint& q) {
    if (std::abs(p.x - q.x) <= kNearDiagonal) {
        // average the smooth factor only; ψ can vary fast near a singular point
        if (p.log_psi == -INFINITY || q.log_psi == -INFINITY) return 0.0;
        double half = 0.5 * (p.log_psi + q.log_psi);
        return 0.5 * (k.diag(p) * std::exp(half - p.log_psi) + k.diag(q) * std::exp(half - q.log_psi));
    }
    return k.pair(p, q);
}

Eigen::PartialPivLU<Eigen::MatrixXd> factor(const Eigen::MatrixXd& m, const char* op) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m.rows(), m.cols()) - m;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::MatrixXd& u = lu.matrixLU();
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        if (!(std::abs(u(i, i)) >= kPivotFloor))
            throw Error(ErrorKind::SingularResolvent, op, "I - K is numerically singular");
    return lu;
}

int integer_multiple_power(double e) {
    for (int m = 1; m <= 6; ++m) {
        double v = m * (1.0 + e);
        if (std::abs(v - std::round(v)) < 1e-9) return m;
    }
    return 4;
}

// Adaptive integral of f over J (GSL QAGS / QAGIU / QAGIL / QAGI).
double integrate_union(const std::function<double(double)>& f, const IntervalUnion& J, double epsabs,
                       double epsrel) {
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(500);
    gsl_function g;
    g.function = [](double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); };
    g.params = const_cast<std::function<double(double)>*>(&f);
    double total = 0.0;
    for (int i = 0; i < J.count(); ++i) {
        double a = J.lower(i), b = J.upper(i), r = 0.0, err = 0.0;
        if (std::isinf(a) && std::isinf(b))
            gsl_integration_qagi(&g, epsabs, epsrel, 500, ws, &r, &err);
        else if (std::isinf(b))
            gsl_integration_qagiu(&g, a, epsabs, epsrel, 500, ws, &r, &err);
        else if (std::isinf(a))
            gsl_integration_qagil(&g, b, epsabs, epsrel, 500, ws, &r, &err);
        else
            gsl_integration_qags(&g, a, b, epsabs, epsrel, 500, ws, &r, &err);
        total += r;
    }
    gsl_integration_workspace_free(ws);
    gsl_set_error_handler(old);
    return total;
}

// Non-extrapolating 21-point Gauss–Kronrod on each piece; infinite pieces
// mapped to (0, 1) by x = a ± t/(1−t). Stops quietly at the roundoff limit.
double integrate_smooth(const std::function<double(double)>& f, const IntervalUnion& J, double epsabs) {
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(100);
    struct Piece {
        const std::function<double(double)>* f;
        double a;
        int dir;  // 0 finite, ±1 mapped
    } piece{&f, 0.0, 0};
    gsl_function g;
    g.params = &piece;
    g.function = [](double t, void* p) {
        const Piece& pc = *static_cast<const Piece*>(p);
        if (pc.dir == 0) return (*pc.f)(t);
        double s = 1.0 - t;
        double v = (*pc.f)(pc.a + pc.dir * t / s);
        return v == 0.0 ? 0.0 : v / (s * s);
    };
    double total = 0.0;
    for (int i = 0; i < J.count(); ++i) {
        double a = J.lower(i), b = J.upper(i), r = 0.0, err = 0.0;
        double lo = a, hi = b;
        if (std::isinf(a) && std::isinf(b)) {
            // split at 0
            piece.a = 0.0;
            piece.dir = 1;
            gsl_integration_qag(&g, 0.0, 1.0, epsabs / 2, 0.0, 100, GSL_INTEG_GAUSS21, ws, &r, &err);
            total += r;
            piece.dir = -1;
            lo = 0.0;
            hi = 1.0;
        } else if (std::isinf(b)) {
            piece.a = a;
            piece.dir = 1;
            lo = 0.0;
            hi = 1.0;
        } else if (std::isinf(a)) {
            piece.a = b;
            piece.dir = -1;
            lo = 0.0;
            hi = 1.0;
        } else {
            piece.dir = 0;
        }
        gsl_integration_qag(&g, lo, hi, epsabs, 0.0, 100, GSL_INTEG_GAUSS21, ws, &r, &err);
        total += r;
    }
    gsl_integration_workspace_free(ws);
    gsl_set_error_handler(old);
    return total;
}

}  // namespace

IntervalUnion IntervalUnion::make(std::vector<double> e) {
    const char* op = "IntervalUnion";
    if (e.size() < 2 || e.size() % 2 != 0)
        throw Error(ErrorKind::InvalidUnion, op, "need an even, nonzero number of endpoints");
    for (size_t i = 0; i < e.size(); ++i) {
        if (std::isnan(e[i])) throw Error(ErrorKind::InvalidUnion, op, "NaN endpoint");
        if (e[i] == -INFINITY && i != 0) throw Error(ErrorKind::InvalidUnion, op, "-inf allowed only as the first endpoint");
        if (e[i] == INFINITY && i != e.size() - 1)
            throw Error(ErrorKind::InvalidUnion, op, "+inf allowed only as the last endpoint");
        if (i > 0 && !(e[i] > e[i - 1])) throw Error(ErrorKind::InvalidUnion, op, "endpoints must increase strictly");
    }
    return IntervalUnion(std::move(e));
}

bool IntervalUnion::contains(double x) const {
    for (int i = 0; i < count(); ++i)
        if (x > lower(i) && x < upper(i)) return true;
    return false;
}

IntervalUnion IntervalUnion::with_endpoint(int k, double value) const {
    if (k < 0 || k >= static_cast<int>(endpoints_.size()))
        throw Error(ErrorKind::InvalidUnion, "IntervalUnion", "endpoint index out of range");
    std::vector<double> e = endpoints_;
    e[k] = value;
    return make(std::move(e));
}

void check_union(const KernelSpec& spec, const IntervalUnion& J) {
    auto closure_has = [&](double p) {
        for (double a : J.endpoints())
            if (a == p) return true;
        return J.contains(p);
    };
    if (std::holds_alternative<F21Kernel>(spec)) {
        if (closure_has(0.5) || closure_has(-0.5))
            throw Error(ErrorKind::InvalidUnion, "check_union", "closure of J contains +/-1/2");
    } else if (std::holds_alternative<WhittakerKernel>(spec)) {
        if (closure_has(0.0)) throw Error(ErrorKind::InvalidUnion, "check_union", "closure of J contains 0");
    } else if (std::holds_alternative<ConfluentKernel>(spec)) {
        // |x|^{Re r} is integrable at 0, so 0 may be an endpoint
        if (J.contains(0.0)) throw Error(ErrorKind::InvalidUnion, "check_union", "0 lies inside J");
    } else if (std::holds_alternative<JacobiKernel>(spec)) {
        if (J.endpoints().front() < -0.5 || J.endpoints().back() > 0.5)
            throw Error(ErrorKind::InvalidUnion, "check_union", "J must lie in [-1/2, 1/2]");
    }
}

Grid build_grid(const IntervalUnion& J, const GridOptions& opt) {
    if (!(opt.map_scale > 0.0) || opt.infinite_power < 1)
        throw Error(ErrorKind::DomainError, "build_grid", "invalid infinite map");
    Grid g;
    for (int i = 0; i < J.count(); ++i) {
        double a = J.lower(i), b = J.upper(i);
        bool ia = std::isinf(a), ib = std::isinf(b);
        if (opt.infinite_map == InfiniteMap::Truncation && (ia || ib)) {
            double lo = ia ? -opt.x_max : a, hi = ib ? opt.x_max : b;
            if (!(hi > lo)) throw Error(ErrorKind::InvalidUnion, "build_grid", "truncation radius inside J's finite part");
            add_finite(g, lo, hi, opt.order_infinite, ia ? 1 : graded_power(opt, a), ib ? 1 : graded_power(opt, b));
        } else if (ia && ib) {
            add_semi_infinite(g, 0.0, -1, opt.order_infinite, 1, opt);
            add_semi_infinite(g, 0.0, +1, opt.order_infinite, 1, opt);
        } else if (ib) {
            add_semi_infinite(g, a, +1, opt.order_infinite, graded_power(opt, a), opt);
        } else if (ia) {
            add_semi_infinite(g, b, -1, opt.order_infinite, graded_power(opt, b), opt);
        } else {
            add_finite(g, a, b, opt.order, graded_power(opt, a), graded_power(opt, b));
        }
    }
    sort_grid(g);
    return g;
}

Grid build_grid(const IntervalUnion& J, int order, InfiniteMap map, double x_max) {
    GridOptions opt;
    opt.order = order;
    opt.order_infinite = order;
    opt.infinite_map = map;
    opt.x_max = x_max;
    return build_grid(J, opt);
}

GridOptions default_grid_options(const KernelSpec& spec, const IntervalUnion& J, int order) {
    GridOptions opt;
    opt.order = order;
    opt.order_infinite = 2 * order;
    if (const auto* jk = std::get_if<JacobiKernel>(&spec)) {
        // K(x, x) ~ (1/2 − x)^α near 1/2 and (1/2 + x)^β near −1/2
        if (J.endpoints().back() == 0.5) opt.graded.push_back({0.5, integer_multiple_power(jk->alpha)});
        if (J.endpoints().front() == -0.5) opt.graded.push_back({-0.5, integer_multiple_power(jk->beta)});
    }
    if (const auto* ck = std::get_if<ConfluentKernel>(&spec)) {
        // K(x, x) ~ |x|^{2 Re r} at 0
        const auto& e = J.endpoints();
        if (std::find(e.begin(), e.end(), 0.0) != e.end())
            opt.graded.push_back({0.0, integer_multiple_power(2.0 * ck->r.real())});
    }
    if (const auto* fk = std::get_if<F21Kernel>(&spec)) opt.infinite_power = integer_multiple_power(fk->params.sigma());
    return opt;
}

NystromSystem discretize_grid(const KernelSpec& spec, const Grid& grid, int threads) {
    const int n = static_cast<int>(grid.nodes.size());
    if (grid.weights.size() != grid.nodes.size())
        throw Error(ErrorKind::DomainError, "discretize", "node and weight counts differ");
    NystromSystem sys;
    sys.spec = spec;
    sys.nodes = grid.nodes;
    sys.weights = grid.weights;
    sys.evaluator = std::make_shared<const KernelEvaluator>(spec);
    sys.points.resize(n);
    sys.matrix.resize(n, n);
    const KernelEvaluator& k = *sys.evaluator;
    std::vector<double> sw(n);
    for (int i = 0; i < n; ++i) {
        if (!(grid.weights[i] > 0.0)) throw Error(ErrorKind::DomainError, "discretize", "weights must be positive");
        sw[i] = std::sqrt(grid.weights[i]);
    }
    parallel_for(n, threads, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) sys.points[i] = k.point(grid.nodes[i], true);
    });
    parallel_for(n, threads, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i)
            for (int j = 0; j < n; ++j) {
                double v = i == j ? k.diag(sys.points[i]) : entry(k, sys.points[i], sys.points[j]);
                sys.matrix(i, j) = sw[i] * v * sw[j];
            }
    });
    if (!sys.matrix.allFinite()) throw Error(ErrorKind::DomainError, "discretize", "non-finite matrix entry");
    return sys;
}

NystromSystem discretize(const KernelSpec& spec, const IntervalUnion& J, const GridOptions& options) {
    check_union(spec, J);
    NystromSystem sys = discretize_grid(spec, build_grid(J, options), options.threads);
    if (options.infinite_map == InfiniteMap::Truncation) {
        // ∫_{x_max}^∞ K(x, x) dx for K(x, x) ~ x^{−p}; p = 2 + 𝔰 for F21, p = 2 otherwise
        double p = 2.0;
        if (const auto* fk = std::get_if<F21Kernel>(&spec)) p = 2.0 + fk->params.sigma();
        KernelEvaluator k(spec);
        if (std::isinf(J.endpoints().back()))
            sys.tail_bound += std::abs(k.diag(options.x_max)) * options.x_max / (p - 1.0);
        if (std::isinf(J.endpoints().front()))
            sys.tail_bound += std::abs(k.diag(-options.x_max)) * options.x_max / (p - 1.0);
    }
    return sys;
}

NystromSystem discretize(const KernelSpec& spec, const IntervalUnion& J, int order) {
    return discretize(spec, J, default_grid_options(spec, J, order));
}

Eigen::MatrixXd discretize_l(const HypParams& params, const Grid& grid) {
    const int n = static_cast<int>(grid.nodes.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = std::sqrt(grid.weights[i] * grid.weights[j]) *
                      (i == j ? 0.0 : l_kernel_eval(params, grid.nodes[i], grid.nodes[j]));
    return m;
}

double fredholm_det(const NystromSystem& sys) {
    if (sys.matrix.size() == 0) return 1.0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(sys.matrix.rows(), sys.matrix.cols()) - sys.matrix;
    return a.partialPivLu().determinant();
}

double log_det(const NystromSystem& sys) {
    if (sys.matrix.size() == 0) return 0.0;
    auto lu = factor(sys.matrix, "log_det");
    const Eigen::MatrixXd& u = lu.matrixLU();
    double sum = 0.0;
    double sign = lu.permutationP().determinant();
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        sum += std::log(std::abs(u(i, i)));
        if (u(i, i) < 0) sign = -sign;
    }
    if (sign < 0) throw Error(ErrorKind::DomainError, "log_det", "det(I - K) is negative");
    return sum;
}

Eigen::VectorXd kernel_eigenvalues(const NystromSystem& sys) {
    Eigen::MatrixXd sym = 0.5 * (sys.matrix + sys.matrix.transpose());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues();
}

double resolvent_diag(const NystromSystem& sys, double x) {
    const KernelEvaluator& k = *sys.evaluator;
    KernelPoint px = k.point(x, true);
    const int n = static_cast<int>(sys.nodes.size());
    if (n == 0) return k.diag(px);
    Eigen::VectorXd col(n), row(n);
    for (int j = 0; j < n; ++j) {
        double sw = std::sqrt(sys.weights[j]);
        bool near = std::abs(sys.nodes[j] - x) <= kNearDiagonal;
        col(j) = sw * (near ? k.diag(px) : k.pair(sys.points[j], px));
        row(j) = sw * (near ? k.diag(px) : k.pair(px, sys.points[j]));
    }
    auto lu = factor(sys.matrix, "resolvent_diag");
    Eigen::VectorXd u = lu.solve(col);
    return k.diag(px) + row.dot(u);
}

double fredholm_series_oracle(const KernelSpec& spec, const IntervalUnion& J, int terms) {
    if (terms < 0 || terms > 4) throw Error(ErrorKind::DomainError, "fredholm_series_oracle", "terms must be in 0..4");
    check_union(spec, J);
    KernelEvaluator k(spec);
    double trace = integrate_union([&](double x) { return k.diag(x); }, J, 1e-14, 1e-12);
    if (std::abs(trace) >= kOracleTraceLimit)
        throw Error(ErrorKind::OracleInapplicable, "fredholm_series_oracle",
                    "trace " + std::to_string(trace) + " too large for a 4-term series");
    // Inner levels revisit the same abscissae for every outer node.
    std::map<double, KernelPoint> cache;
    auto point = [&](double x) -> const KernelPoint& {
        auto it = cache.find(x);
        if (it == cache.end()) it = cache.emplace(x, k.point(x, true)).first;
        return it->second;
    };
    double total = 1.0;
    if (terms >= 1) total -= trace;
    double factorial = 1.0;
    for (int m = 2; m <= terms; ++m) {
        factorial *= m;
        // The m-th term enters divided by m!, so its integral needs only
        // absolute accuracy 1e-13·m!; the error of each inner integral is
        // weighted by the outer integrand, bounded by the trace.
        const double target = 1e-13 * factorial;
        std::vector<const KernelPoint*> pts(m);
        std::function<double(int)> level = [&](int l) -> double {
            if (l == m) {
                Eigen::MatrixXd a(m, m);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) a(i, j) = i == j ? k.diag(*pts[i]) : entry(k, *pts[i], *pts[j]);
                return a.determinant();
            }
            double eps = target / std::pow(std::max(std::abs(trace), 1e-3), l);
            return integrate_smooth(
                [&, l](double x) {
                    pts[l] = &point(x);
                    return level(l + 1);
                },
                J, eps);
        };
        double sign = m % 2 == 0 ? 1.0 : -1.0;
        total += sign * level(0) / factorial;
    }
    return total;
}

LogDetDerivatives logdet_derivatives(const KernelSpec& spec, const IntervalUnion& J, int endpoint, int order,
                                     double h, const GridOptions& options) {
    const char* op = "logdet_derivatives";
    if (order != 1 && order != 2) throw Error(ErrorKind::DomainError, op, "order must be 1 or 2");
    if (!(h >= 1e-4 && h <= 1e-2)) throw Error(ErrorKind::DomainError, op, "h must lie in [1e-4, 1e-2]");
    if (endpoint < 0 || endpoint >= static_cast<int>(J.endpoints().size()))
        throw Error(ErrorKind::InvalidUnion, op, "endpoint index out of range");
    const double a = J.endpoints()[endpoint];
    if (std::isinf(a)) throw Error(ErrorKind::InvalidUnion, op, "cannot differentiate in an infinite endpoint");
    const double sign = endpoint % 2 == 0 ? 1.0 : -1.0;
    auto d1_at = [&](double v) {
        IntervalUnion Jv = J.with_endpoint(endpoint, v);
        return sign * resolvent_diag(discretize(spec, Jv, options), v);
    };
    LogDetDerivatives out;
    out.d1 = d1_at(a);
    if (order == 1) return out;
    const double f0 = out.d1;
    const double fp1 = d1_at(a + 0.5 * h), fm1 = d1_at(a - 0.5 * h);
    const double fp2 = d1_at(a + h), fm2 = d1_at(a - h);
    out.d2 = (4.0 * (fp1 - fm1) / h - (fp2 - fm2) / (2.0 * h)) / 3.0;
    out.d3 = (4.0 * (fp1 - 2.0 * f0 + fm1) / (0.25 * h * h) - (fp2 - 2.0 * f0 + fm2) / (h * h)) / 3.0;
    return out;
}

LogDetDerivatives logdet_derivatives(const KernelSpec& spec, double s, int order, double h) {
    IntervalUnion J = IntervalUnion::single(s, INFINITY);
    return logdet_derivatives(spec, J, 0, order, h, default_grid_options(spec, J));
}

}  // namespace kdet
