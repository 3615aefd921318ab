#include "fucik/gauss_legendre.hpp"

#include <cmath>
#include <numbers>

#include "fucik/errors.hpp"

namespace fucik {

GaussRule gauss_legendre_unit(int order) {
    if (order < 1) throw ConfigError("quadrature order must be positive");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1], ascending order.
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

}  // namespace fucik
