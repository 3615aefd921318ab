#include "fucik/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "fucik/errors.hpp"

namespace fucik {

Mesh build_mesh(const ProblemConfig& config) {
    config.validate();
    Mesh mesh;
    mesh.intervals = config.intervals;
    for (std::size_t iv = 0; iv < config.intervals.size(); ++iv) {
        const auto& interval = config.intervals[iv];
        const int n_el = std::max(1, static_cast<int>(std::lround(config.n_per_unit * interval.length())));
        const double h = interval.length() / n_el;
        int prev_dof = -1;
        for (int e = 0; e < n_el; ++e) {
            Element el;
            el.x0 = interval.left + e * h;
            el.x1 = (e + 1 == n_el) ? interval.right : interval.left + (e + 1) * h;
            el.interval = static_cast<int>(iv);
            el.dof0 = prev_dof;
            if (e + 1 < n_el) {
                el.dof1 = mesh.num_dofs();
                mesh.dof_x.push_back(el.x1);
            }
            prev_dof = el.dof1;
            mesh.elements.push_back(el);
        }
    }
    if (mesh.num_dofs() == 0) throw ConfigError("mesh has no degrees of freedom; increase n_per_unit");
    return mesh;
}

}  // namespace fucik
