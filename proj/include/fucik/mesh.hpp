#pragma once

#include <vector>

#include "fucik/config.hpp"

namespace fucik {

/// A P1 element [x0, x1]. dof0/dof1 are degree-of-freedom indices of the end
/// nodes, or -1 for nodes on ∂Ω where every discrete function vanishes.
struct Element {
    double x0 = 0.0;
    double x1 = 0.0;
    int dof0 = -1;
    int dof1 = -1;
    int interval = 0;

    [[nodiscard]] double length() const { return x1 - x0; }
};

/// Uniform mesh of each interval of Ω. Degrees of freedom are the interior
/// nodes, numbered left to right across intervals; basis functions extend by
/// zero outside Ω.
struct Mesh {
    std::vector<Interval> intervals;
    std::vector<Element> elements;
    std::vector<double> dof_x;

    [[nodiscard]] int num_dofs() const { return static_cast<int>(dof_x.size()); }
    [[nodiscard]] int num_elements() const { return static_cast<int>(elements.size()); }
};

Mesh build_mesh(const ProblemConfig& config);

}  // namespace fucik
