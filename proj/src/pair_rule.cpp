#include "fucik/pair_rule.hpp"

#include <algorithm>
#include <cmath>

#include "fucik/errors.hpp"

namespace fucik {

namespace {

struct Panel {
    double y0;
    double y1;
};

// Panels on [start, start ± extent] with sizes h, h, 2h, 4h, ... measured from
// `start`, so every panel is no larger than its distance to `start`.
void graded_panels(double start, double extent, double h, int direction, std::vector<Panel>& out) {
    double d0 = 0.0;
    double d1 = std::min(h, extent);
    while (d0 < extent) {
        const double a = start + direction * d0;
        const double b = start + direction * d1;
        out.push_back({std::min(a, b), std::max(a, b)});
        d0 = d1;
        d1 = std::min(2.0 * d1, extent);
        if (d1 <= d0) break;
    }
}

}  // namespace

PairRule::PairRule(const Mesh& mesh, double s, double p, int quad_order, double truncation_radius)
    : mesh_(&mesh), alpha_(s * p), p_(p), gauss_(gauss_legendre_unit(quad_order)) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("s out of range (0,1)");
    if (!(p > 1.0)) throw ConfigError("p out of range (1,inf)");
    if (!(truncation_radius > 0.0)) throw ConfigError("truncation_radius must be positive");
    build_exterior(truncation_radius);
}

void PairRule::visit_pairs(const std::function<void(const Element&, const Element&,
                                                    std::span<const PairPoint>)>& fn) const {
    const auto& els = mesh_->elements;
    const int q = gauss_.size();
    const double e1 = 1.0 + alpha_;
    const double radial = 1.0 / (p_ + 1.0 - alpha_);
    std::vector<PairPoint> pts;
    pts.reserve(static_cast<std::size_t>(q * q));

    for (std::size_t i = 0; i < els.size(); ++i) {
        const Element& ex = els[i];
        const double hx = ex.length();

        // Identical panels: u(x) - u(y) = u'(x - y), so the integrand is
        // |u'|^p |x-y|^{p-1-alpha}; one virtual point at (x1, x0) carries it.
        pts.clear();
        pts.push_back({1.0, 0.0,
                       2.0 * std::pow(hx, 1.0 - alpha_) / ((p_ - alpha_) * (p_ + 1.0 - alpha_))});
        fn(ex, ex, pts);

        for (std::size_t j = i + 1; j < els.size(); ++j) {
            const Element& ey = els[j];
            const double hy = ey.length();
            pts.clear();
            if (ex.x1 == ey.x0) {
                // Shared node z: x = z - hx ξ, y = z + hy η; the numerator is
                // ξ^p-homogeneous, the radial integral is 1/(p+1-alpha).
                for (int k = 0; k < q; ++k) {
                    const double t = gauss_.nodes[k];
                    const double g = gauss_.weights[k];
                    pts.push_back({0.0, t, 2.0 * hx * hy * g * radial / std::pow(hx + hy * t, e1)});
                    pts.push_back({1.0 - t, 1.0, 2.0 * hx * hy * g * radial / std::pow(hx * t + hy, e1)});
                }
            } else {
                for (int a = 0; a < q; ++a) {
                    const double x = ex.x0 + hx * gauss_.nodes[a];
                    for (int b = 0; b < q; ++b) {
                        const double y = ey.x0 + hy * gauss_.nodes[b];
                        const double w = 2.0 * hx * hy * gauss_.weights[a] * gauss_.weights[b] *
                                         std::pow(std::abs(x - y), -e1);
                        pts.push_back({gauss_.nodes[a], gauss_.nodes[b], w});
                    }
                }
            }
            fn(ex, ey, pts);
        }
    }
}

void PairRule::build_exterior(double truncation_radius) {
    const auto& els = mesh_->elements;
    const auto& ivs = mesh_->intervals;
    const int q = gauss_.size();
    const double e1 = 1.0 + alpha_;
    const double radial = 1.0 / (p_ + 1.0 - alpha_);

    exterior_nodes_.assign(gauss_.nodes.begin(), gauss_.nodes.end());
    exterior_nodes_.push_back(0.0);
    exterior_nodes_.push_back(1.0);
    const std::size_t stride = exterior_nodes_.size();
    const int node0 = q;
    const int node1 = q + 1;
    exterior_weights_.assign(els.size() * stride, 0.0);

    // First/last element of each interval, for panel sizes next to ∂Ω.
    std::vector<double> h_first(ivs.size(), 0.0), h_last(ivs.size(), 0.0);
    for (const auto& el : els) {
        if (el.x0 == ivs[el.interval].left) h_first[el.interval] = el.length();
        if (el.x1 == ivs[el.interval].right) h_last[el.interval] = el.length();
    }

    const double left = ivs.front().left;
    const double right = ivs.back().right;
    std::vector<Panel> panels;
    graded_panels(left, truncation_radius, h_first.front(), -1, panels);
    graded_panels(right, truncation_radius, h_last.back(), +1, panels);
    for (std::size_t i = 0; i + 1 < ivs.size(); ++i) {
        const double g0 = ivs[i].right;
        const double g1 = ivs[i + 1].left;
        const double half = 0.5 * (g1 - g0);
        graded_panels(g0, half, h_last[i], +1, panels);
        graded_panels(g1, half, h_first[i + 1], -1, panels);
    }

    for (std::size_t e = 0; e < els.size(); ++e) {
        const Element& el = els[e];
        const double h = el.length();
        double* w = exterior_weights_.data() + e * stride;
        for (const Panel& pn : panels) {
            const double hp = pn.y1 - pn.y0;
            if (pn.y1 == el.x0) {
                // Complement panel on the left: x = z + h ξ, y = z - hp η.
                for (int k = 0; k < q; ++k) {
                    const double t = gauss_.nodes[k];
                    const double g = gauss_.weights[k];
                    w[node1] += 2.0 * h * hp * g * radial / std::pow(h + hp * t, e1);
                    w[k] += 2.0 * h * hp * g * radial / std::pow(h * t + hp, e1);
                }
            } else if (pn.y0 == el.x1) {
                // Complement panel on the right: x = z - h ξ, y = z + hp η.
                for (int k = 0; k < q; ++k) {
                    const double t = gauss_.nodes[k];
                    const double g = gauss_.weights[k];
                    w[node0] += 2.0 * h * hp * g * radial / std::pow(h + hp * t, e1);
                    // λx = 1 - t is the mirrored Gauss node q-1-k.
                    w[q - 1 - k] += 2.0 * h * hp * g * radial / std::pow(h * t + hp, e1);
                }
            } else {
                for (int a = 0; a < q; ++a) {
                    const double x = el.x0 + h * gauss_.nodes[a];
                    double acc = 0.0;
                    for (int b = 0; b < q; ++b) {
                        const double y = pn.y0 + hp * gauss_.nodes[b];
                        acc += gauss_.weights[b] * std::pow(std::abs(x - y), -e1);
                    }
                    w[a] += 2.0 * h * hp * gauss_.weights[a] * acc;
                }
            }
        }
        // Far field: y < left - R or y > right + R.
        for (int a = 0; a < q; ++a) {
            const double x = el.x0 + h * gauss_.nodes[a];
            const double tail = (std::pow(x - left + truncation_radius, -alpha_) +
                                 std::pow(right + truncation_radius - x, -alpha_)) /
                                alpha_;
            w[a] += 2.0 * h * gauss_.weights[a] * tail;
        }
    }
}

}  // namespace fucik
