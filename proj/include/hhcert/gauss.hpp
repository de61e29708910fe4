#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hhcert {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Nodes are the roots of the Legendre polynomial P_n, found by Newton
// iteration from the Chebyshev-like initial guesses; weights from the
// standard 2 / ((1-x^2) P_n'(x)^2) formula.
inline GaussRule make_gauss_rule(int order) {
    if (order < 1) throw std::domain_error("quadrature order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Three-term recurrence for P_n(x) and P_{n-1}(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

}  // namespace detail

/// Cached Gauss-Legendre rule of the given order. Thread-safe.
inline const GaussRule& gauss_rule(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, detail::make_gauss_rule(order)).first;
    return it->second;
}

template <class F>
double gl_panel(F&& f, double a, double b, const GaussRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Integrates f over [a, b] splitting at the given interior breakpoints
/// (values outside (a, b) are ignored; breakpoints must be sorted).
template <class F>
double gl_split(F&& f, double a, double b, const std::vector<double>& breaks, const GaussRule& rule) {
    double lo = a, total = 0.0;
    for (double cut : breaks) {
        if (cut <= lo || cut >= b) continue;
        total += gl_panel(f, lo, cut, rule);
        lo = cut;
    }
    total += gl_panel(f, lo, b, rule);
    return total;
}

}  // namespace hhcert
