#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fucik {

struct Interval {
    double left = 0.0;
    double right = 0.0;

    [[nodiscard]] double length() const { return right - left; }
};

struct Tolerances {
    double solver_tol = 1e-10;
    double cluster_tol = 1e-6;
    double bisect_tol = 1e-8;
};

/// Problem description: the domain Ω as a union of disjoint open intervals,
/// the fractional order s, the exponent p and the discretization knobs.
struct ProblemConfig {
    std::vector<Interval> intervals{{0.0, 1.0}};
    double s = 0.5;
    double p = 2.0;
    int n_per_unit = 128;
    int quad_order = 8;
    double truncation_radius = 1.0;
    Tolerances tolerances{};
    std::uint64_t seed = 42;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    [[nodiscard]] double measure() const;
};

ProblemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ProblemConfig& cfg);
ProblemConfig load_config(const std::string& path);

/// Stable 64-bit hash of everything that affects the assembled forms.
std::uint64_t forms_hash(const ProblemConfig& cfg);

}  // namespace fucik
