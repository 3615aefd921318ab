#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fucik/gauss_legendre.hpp"
#include "fucik/mesh.hpp"

namespace fucik {

/// A quadrature point of a panel pair. `lx`/`ly` are local coordinates in
/// [0,1] of the x- and y-element; the weight already contains the kernel
/// |x-y|^{-(1+alpha)}, the Jacobian and the symmetry factor.
struct PairPoint {
    double lx = 0.0;
    double ly = 0.0;
    double w = 0.0;
};

/// Quadrature for the Gagliardo-type double integral
///
///   ∫∫_{R×R} F(u(x), u(y)) |x-y|^{-(1+alpha)} dx dy,   alpha = s·p,
///
/// for continuous piecewise-linear u vanishing outside Ω and integrands F that
/// are positively p-homogeneous in u(x) - u(y). The integral splits into
///
///  * Ω×Ω: unordered element pairs. Identical panels use the exact formula for
///    |x-y|^{p-1-alpha}; touching panels use a Duffy split at the shared node
///    with the radial variable integrated in closed form; separated panels use
///    a tensor Gauss rule.
///  * Ω×(R∖Ω) and its mirror: F reduces to |u(x)|^p, so all y-quadrature is
///    folded into per-element x-weights. Complement panels cover the gaps and a
///    graded band of width `truncation_radius`; the far field beyond the band
///    is integrated analytically.
///
/// Every weight is positive.
class PairRule {
public:
    PairRule(const Mesh& mesh, double s, double p, int quad_order, double truncation_radius);

    /// Calls `fn(ex, ey, points)` for every unordered Ω×Ω element pair.
    void visit_pairs(const std::function<void(const Element&, const Element&,
                                              std::span<const PairPoint>)>& fn) const;

    /// Local coordinates of the exterior x-points: Gauss nodes, then 0 and 1.
    [[nodiscard]] std::span<const double> exterior_nodes() const { return exterior_nodes_; }
    /// Weights per element, laid out as [element][exterior_nodes().size()].
    [[nodiscard]] std::span<const double> exterior_weights(int element) const {
        const auto n = exterior_nodes_.size();
        return {exterior_weights_.data() + element * n, n};
    }

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double p() const { return p_; }

private:
    void build_exterior(double truncation_radius);

    const Mesh* mesh_;
    double alpha_;
    double p_;
    GaussRule gauss_;
    std::vector<double> exterior_nodes_;
    std::vector<double> exterior_weights_;
};

}  // namespace fucik
