#include "outerlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace outerlab {

namespace {

QuadratureRule reference_rule(std::size_t m) {
    QuadratureRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= m; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[m - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[m - 1 - i] = w;
    }
    if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t m, double a, double b) {
    if (m == 0) throw std::invalid_argument("gauss_legendre: m must be positive");
    static std::mutex mutex;
    static std::map<std::size_t, QuadratureRule> cache;
    QuadratureRule base;
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(m);
        if (it == cache.end()) it = cache.emplace(m, reference_rule(m)).first;
        base = it->second;
    }
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < m; ++i) {
        base.nodes[i] = mid + half * base.nodes[i];
        base.weights[i] *= half;
    }
    return base;
}

}  // namespace outerlab
