#pragma once

#include <vector>

namespace fucik {

/// Gauss–Legendre rule mapped to [0,1]; weights sum to 1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
};

GaussRule gauss_legendre_unit(int order);

}  // namespace fucik
