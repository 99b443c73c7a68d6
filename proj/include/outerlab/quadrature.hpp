#pragma once

#include <cstddef>
#include <vector>

namespace outerlab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with m nodes on [a, b] (Newton iteration on P_m, cached by m).
QuadratureRule gauss_legendre(std::size_t m, double a = -1.0, double b = 1.0);

}  // namespace outerlab
