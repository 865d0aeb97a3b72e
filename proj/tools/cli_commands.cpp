#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

#include "cli.hpp"
#include "kdet/errors.hpp"
#include "kdet/painleve.hpp"
#include "kdet/schlesinger.hpp"

namespace kdet::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_fail(const std::string& op, const std::string& detail) {
    throw Error(ErrorKind::ConfigError, op, detail);
}

using Row = std::vector<double>;

// Rows are computed by a pool of `threads` workers and kept in grid order;
// the first failure by index is rethrown.
std::vector<Row> parallel_rows(size_t n, int threads, const std::function<Row(size_t)>& fn) {
    std::vector<Row> rows(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < n; i = next++) {
            try {
                rows[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    size_t count = std::min<size_t>(std::max(threads, 1), n);
    std::vector<std::thread> pool;
    for (size_t t = 1; t < count; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

// Largest |value| in a column; no summary for an empty table.
void add_max(Table& t, const std::string& name, size_t col) {
    if (t.rows.empty()) return;
    double m = 0.0;
    for (const auto& r : t.rows) m = std::max(m, std::abs(r[col]));
    t.summary.push_back({name, m});
}

void check_unions(const std::string& op, const RunConfig& c) {
    for (double v : c.grid) {
        try {
            check_union(c.kernel, union_at(c, v));
        } catch (const Error& e) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            config_fail(op, std::string("interval at grid value ") + buf + " rejected: " + e.what());
        }
    }
}

LogDetDerivatives derivatives_at(const RunConfig& c, double v) {
    auto J = union_at(c, v);
    return logdet_derivatives(c.kernel, J, c.moving, 2, c.fd_step, grid_options(c, J));
}

const HypParams& f21_params(const RunConfig& c) { return std::get<F21Kernel>(c.kernel).params; }

// Largest change in traces, determinants and Σ B_l relative to `ref`.
double drift(const ResidueSystem& sys, const ResidueSystem& ref) {
    double d = 0.0;
    Mat2 total = Mat2::Zero(), total_ref = Mat2::Zero();
    for (size_t l = 0; l < sys.residues.size(); ++l) {
        d = std::max(d, std::abs(sys.residues[l].trace() - ref.residues[l].trace()));
        d = std::max(d, std::abs(sys.residues[l].determinant() - ref.residues[l].determinant()));
        total += sys.residues[l];
        total_ref += ref.residues[l];
    }
    return std::max(d, (total - total_ref).cwiseAbs().maxCoeff());
}

std::string format_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void validate(const std::string& command, const RunConfig& c) {
    const std::string op = command;
    if (command == "det-curve") {
        check_unions(op, c);
    } else if (command == "sigma-check") {
        bool right = std::holds_alternative<F21Kernel>(c.kernel) || std::holds_alternative<JacobiKernel>(c.kernel) ||
                     std::holds_alternative<WhittakerKernel>(c.kernel);
        bool left = std::holds_alternative<SineKernel>(c.kernel) || std::holds_alternative<ConfluentKernel>(c.kernel);
        if (!right && !left) config_fail(op, "kernel must be f21, whittaker, confluent, sine or jacobi");
        if (right && c.family != Family::RightTail) config_fail(op, "this kernel needs the right_tail family");
        if (left && c.family != Family::LeftInterval) config_fail(op, "this kernel needs the left_interval family");
        check_unions(op, c);
    } else if (command == "airy-crosscheck") {
        if (!std::holds_alternative<AiryKernel>(c.kernel)) config_fail(op, "kernel must be airy");
        if (c.family != Family::RightTail) config_fail(op, "needs the right_tail family");
        for (double s : c.grid)
            if (s < -4.0 || s > 2.0) config_fail(op, "grid must lie within [-4, 2]");
        check_unions(op, c);
    } else if (command == "schlesinger-check") {
        if (!std::holds_alternative<F21Kernel>(c.kernel) || !f21_params(c).strict())
            config_fail(op, "kernel must be f21 with strict parameters");
        if (c.family != Family::RightTail) config_fail(op, "needs the right_tail family");
        if (c.grid.empty()) return;
        double s0 = c.s_start.value_or(c.grid.front());
        if (!c.synthetic_zero_c) {
            try {
                check_union(c.kernel, union_at(c, s0));
            } catch (const Error& e) {
                config_fail(op, std::string("starting interval rejected: ") + e.what());
            }
        }
        // flow targets are pole positions; collisions surface during the flow
    } else if (command == "kernel-eval") {
        return;
    } else {
        config_fail("cli", "unknown command '" + command + "'");
    }
}

Table cmd_det_curve(const RunConfig& c) {
    Table t{"det-curve", {}, {"s", "log_det", "d1", "d2"}, {}, {}};
    t.rows = parallel_rows(c.grid.size(), c.threads, [&](size_t i) -> Row {
        double v = c.grid[i];
        auto J = union_at(c, v);
        double ld = log_det(discretize(c.kernel, J, grid_options(c, J)));
        auto d = derivatives_at(c, v);
        return {v, ld, d.d1, d.d2};
    });
    return t;
}

Table cmd_sigma_check(const RunConfig& c) {
    Table t{"sigma-check",
            {},
            {"s", "sigma", "dsigma", "d2sigma", "residual_raw", "residual_normalized"},
            {},
            {}};
    const auto& k = c.kernel;
    if (std::holds_alternative<F21Kernel>(k) || std::holds_alternative<JacobiKernel>(k))
        t.comments.push_back("sigma = (s^2 - 1/4) d/ds ln det - nu1^2 s + nu3 nu4 / 2; sigma-PVI residual");
    else if (std::holds_alternative<WhittakerKernel>(k))
        t.comments.push_back("sigma = s d/ds ln det on (s, inf); sigma-PV residual");
    else if (std::holds_alternative<SineKernel>(k))
        t.comments.push_back("sigma = t d/dt ln det on (0, t); JMMS residual");
    else
        t.comments.push_back("sigma = t d/dt ln det on (0, t); confluent sigma-PV residual");
    t.rows = parallel_rows(c.grid.size(), c.threads, [&](size_t i) -> Row {
        double s = c.grid[i];
        auto d = derivatives_at(c, s);
        SigmaSample x;
        Residual r;
        if (const auto* f = std::get_if<F21Kernel>(&k)) {
            auto nu = NuQuad::f21(f->params);
            x = pvi_sample(s, d, nu);
            r = sigma_pvi_residual(x, nu);
        } else if (const auto* j = std::get_if<JacobiKernel>(&k)) {
            auto nu = NuQuad::jacobi(j->n, j->alpha, j->beta);
            x = pvi_sample(s, d, nu);
            r = sigma_pvi_residual(x, nu);
        } else if (const auto* w = std::get_if<WhittakerKernel>(&k)) {
            x = pv_sample(s, d);
            r = sigma_pv_residual(x, NuQuad::whittaker(w->z, w->zp));
        } else if (std::holds_alternative<SineKernel>(k)) {
            x = pv_sample(s, d);
            r = sigma_jmms_residual(x);
        } else {
            x = pv_sample(s, d);
            r = sigma_pv_confluent_residual(x, std::get<ConfluentKernel>(k).r);
        }
        return {s, x.sigma, x.dsigma, x.d2sigma, r.raw, r.normalized};
    });
    add_max(t, "max_normalized_residual", 5);
    return t;
}

Table cmd_airy_crosscheck(const RunConfig& c) {
    Table t{"airy-crosscheck",
            {"u follows the u ~ -Ai(s) convention as s -> +inf (Hastings-McLeod, integrated from s = 8)",
             "u_fredholm = -sqrt(-d2) with d2 = d^2/ds^2 ln det(1 - A on (s, inf)); diff = u_pii - u_fredholm"},
            {"s", "u_pii", "u_fredholm", "diff"},
            {},
            {}};
    t.rows = parallel_rows(c.grid.size(), c.threads, [&](size_t i) -> Row {
        double s = c.grid[i];
        double u = integrate_pii_hastings_mcleod(8.0, s, 1).back().u;
        double d2 = derivatives_at(c, s).d2;
        if (!(d2 <= 0.0)) throw Error(ErrorKind::DomainError, "airy-crosscheck", "d2 ln det is positive at s = " + format_g(s));
        double uf = -std::sqrt(-d2);
        return {s, u, uf, u - uf};
    });
    add_max(t, "max_abs_diff", 3);
    return t;
}

Table cmd_schlesinger_check(const RunConfig& c) {
    Table t{"schlesinger-check", {}, {"s", "omega", "d1", "tau_error", "drift", "invariant_error"}, {}, {}};
    t.comments.push_back("omega = sum over poles of tr(C B_l)/(s - b_l); tau_error = |omega/d1 - 1|, d1 = d/ds ln det");
    t.comments.push_back("drift: largest change of tr B_l, det B_l and sum B_l since the start");
    if (c.grid.empty()) return t;
    const double s0 = c.s_start.value_or(c.grid.front());
    const auto& p = f21_params(c);

    ResidueSystem sys0;
    if (c.synthetic_zero_c) {
        t.comments.push_back("synthetic system with C = 0");
        Mat2 a;
        a << 0.1, 0.3, 0.2, -0.1;
        Mat2 s3;
        s3 << 1.0, 0.0, 0.0, -1.0;
        sys0 = one_interval_system(s0, a, -0.5 * p.sigma() * s3 - a, Mat2::Zero());
    } else {
        auto nu = NuQuad::f21(p);
        sys0 = reconstruct_residues(pvi_sample(s0, derivatives_at(c, s0), nu), p).system;
    }

    std::vector<double> below, above;
    for (double s : c.grid) (s < s0 ? below : above).push_back(s);
    std::reverse(below.begin(), below.end());
    std::vector<ResidueSystem> traj(c.grid.size());
    auto place = [&](const std::vector<double>& pts) {
        if (pts.empty()) return;
        auto out = integrate_flow(sys0, 2, pts);
        for (size_t i = 0; i < pts.size(); ++i)
            traj[std::find(c.grid.begin(), c.grid.end(), pts[i]) - c.grid.begin()] = out[i];
    };
    std::vector<double> above_moved;
    for (double s : above)
        if (s != s0) above_moved.push_back(s);
    place(below);
    place(above_moved);
    for (size_t i = 0; i < c.grid.size(); ++i)
        if (c.grid[i] == s0) traj[i] = sys0;

    t.rows = parallel_rows(c.grid.size(), c.threads, [&](size_t i) -> Row {
        double s = c.grid[i];
        double w = omega_eval(traj[i])[0];
        double dr = drift(traj[i], sys0);
        if (c.synthetic_zero_c) return {s, w, kNaN, kNaN, dr, kNaN};
        double d1 = derivatives_at(c, s).d1;
        return {s, w, d1, std::abs(w / d1 - 1.0), dr, residue_invariants(traj[i], p).max()};
    });
    add_max(t, "max_drift", 4);
    if (!c.synthetic_zero_c) {
        add_max(t, "max_tau_error", 3);
        add_max(t, "max_invariant_error", 5);
    }
    return t;
}

Table cmd_kernel_eval(const RunConfig& c) {
    Table t{"kernel-eval", {}, {"x", "y", "K"}, {}, {}};
    t.comments.push_back(std::string("kernel ") + kernel_name(c.kernel));
    KernelEvaluator k(c.kernel);
    std::vector<std::pair<double, double>> pts;
    for (double x : c.grid) {
        if (c.y_grid.empty()) pts.emplace_back(x, x);
        for (double y : c.y_grid) pts.emplace_back(x, y);
    }
    t.rows = parallel_rows(pts.size(), c.threads, [&](size_t i) -> Row {
        auto [x, y] = pts[i];
        return {x, y, x == y ? k.diag(x) : k.eval(x, y)};
    });
    return t;
}

std::string render(const Table& t, Format format) {
    std::string out;
    if (format == Format::Csv) {
        for (const auto& c : t.comments) out += "# " + c + "\n";
        for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
        out += "\n";
        for (const auto& r : t.rows) {
            for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_g(r[i]);
            out += "\n";
        }
        for (const auto& [name, v] : t.summary) out += "# summary: " + name + "=" + format_g(v) + "\n";
        return out;
    }
    // JSON numbers keep 17 digits; non-finite values become null.
    auto num = [](double v) { return std::isfinite(v) ? format_g(v) : std::string("null"); };
    auto str = [](const std::string& s) { return nlohmann::json(s).dump(); };
    out += "{\"command\": " + str(t.command) + ",\n \"comments\": [";
    for (size_t i = 0; i < t.comments.size(); ++i) out += (i ? ", " : "") + str(t.comments[i]);
    out += "],\n \"columns\": [";
    for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? ", " : "") + str(t.columns[i]);
    out += "],\n \"rows\": [";
    for (size_t j = 0; j < t.rows.size(); ++j) {
        out += j ? ",\n  [" : "\n  [";
        for (size_t i = 0; i < t.rows[j].size(); ++i) out += (i ? ", " : "") + num(t.rows[j][i]);
        out += "]";
    }
    out += t.rows.empty() ? "],\n \"summary\": {" : "\n ],\n \"summary\": {";
    for (size_t i = 0; i < t.summary.size(); ++i)
        out += (i ? ", " : "") + str(t.summary[i].first) + ": " + num(t.summary[i].second);
    out += "}}\n";
    return out;
}

}  // namespace kdet::cli
