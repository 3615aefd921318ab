#pragma once

#include <map>
#include <memory>
#include <random>

#include "fucik/fucik_core.hpp"
#include "fucik/mesh.hpp"

namespace testing_support {

struct Problem {
    fucik::ProblemConfig config;
    fucik::Mesh mesh;
    fucik::GalerkinForms forms;
    fucik::EigenDecomposition decomp;
    std::shared_ptr<const fucik::SpectralData> data;
};

inline Problem make_problem(int n_per_unit, std::vector<fucik::Interval> omega = {{0.0, 1.0}}, double s = 0.5) {
    Problem pr;
    pr.config.n_per_unit = n_per_unit;
    pr.config.intervals = std::move(omega);
    pr.config.s = s;
    pr.mesh = fucik::build_mesh(pr.config);
    pr.forms = fucik::assemble_forms(pr.mesh, pr.config);
    pr.decomp = fucik::solve_eigen(pr.forms.A, pr.forms.lumped_mass_matrix(), pr.config.tolerances.cluster_tol);
    pr.data = fucik::make_spectral_data(pr.forms, pr.decomp);
    return pr;
}

// Cached per resolution so each suite assembles a mesh once.
inline const Problem& unit_interval(int n_per_unit) {
    static std::map<int, std::unique_ptr<Problem>> cache;
    auto& slot = cache[n_per_unit];
    if (!slot) slot = std::make_unique<Problem>(make_problem(n_per_unit));
    return *slot;
}

inline const Problem& two_intervals(int n_per_unit) {
    static std::map<int, std::unique_ptr<Problem>> cache;
    auto& slot = cache[n_per_unit];
    if (!slot) slot = std::make_unique<Problem>(make_problem(n_per_unit, {{0.0, 1.0}, {1.5, 2.2}}));
    return *slot;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

inline double relative(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

}  // namespace testing_support
