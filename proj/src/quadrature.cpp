#include "kdet/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <map>
#include <mutex>
#include <string>

#include "kdet/errors.hpp"

namespace kdet {

namespace {

std::mutex g_mutex;
std::map<int, QuadRule> g_legendre;
std::map<int, QuadRule> g_laguerre;

void legendre(int n, long double x, long double& p, long double& dp) {
    long double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
        long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1);
}

QuadRule make_legendre(int n) {
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = 0.0, w = 0.0;
        gsl_integration_glfixed_point(-1.0, 1.0, i, &x, &w, table);
        // GSL's untabulated orders carry ~1e-11 weight errors; polish in long double.
        long double t = x, p = 0, dp = 0;
        for (int it = 0; it < 3; ++it) {
            legendre(n, t, p, dp);
            t -= p / dp;
        }
        legendre(n, t, p, dp);
        rule.nodes[i] = static_cast<double>(t);
        rule.weights[i] = static_cast<double>(2.0L / ((1.0L - t * t) * dp * dp));
    }
    gsl_integration_glfixed_table_free(table);
    return rule;
}

QuadRule make_laguerre(int n) {
    gsl_integration_fixed_workspace* ws =
        gsl_integration_fixed_alloc(gsl_integration_fixed_laguerre, n, 0.0, 1.0, 0.0, 0.0);
    QuadRule rule;
    const double* x = gsl_integration_fixed_nodes(ws);
    const double* w = gsl_integration_fixed_weights(ws);
    rule.nodes.assign(x, x + n);
    rule.weights.assign(w, w + n);
    gsl_integration_fixed_free(ws);
    return rule;
}

}  // namespace

QuadRule gauss_legendre_rule(int n) {
    if (n < 1 || n > 512)
        throw Error(ErrorKind::OrderTooLarge, "gauss_legendre_rule",
                    "order must lie in [1, 512], got " + std::to_string(n));
    std::lock_guard<std::mutex> lock(g_mutex);
    auto it = g_legendre.find(n);
    if (it == g_legendre.end()) it = g_legendre.emplace(n, make_legendre(n)).first;
    return it->second;
}

QuadRule gauss_laguerre_rule(int n) {
    if (n < 1 || n > 128)
        throw Error(ErrorKind::OrderTooLarge, "gauss_laguerre_rule",
                    "order must lie in [1, 128], got " + std::to_string(n));
    std::lock_guard<std::mutex> lock(g_mutex);
    auto it = g_laguerre.find(n);
    if (it == g_laguerre.end()) it = g_laguerre.emplace(n, make_laguerre(n)).first;
    return it->second;
}

}  // namespace kdet
