#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fucik/fucik_core.hpp"

namespace fucik {

/// Root of n_{k−1}(a,·) or m_k(a,·) in b, or an out-of-square flag.
struct CurveRoot {
    double b = 0.0;
    bool out_of_square = false;
    SaddleValue witness;   ///< saddle value at the returned b
};

struct CurveRow {
    double a = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    bool nu_out = false;
    bool mu_out = false;

    /// "ok", or a '|'-joined list of nu_out_of_square / mu_out_of_square.
    [[nodiscard]] std::string flags() const;
};

struct CurveSample {
    int k = 0;
    std::vector<CurveRow> rows;
};

enum class Region { BelowLower, OnLower, Between, OnUpper, AboveUpper };
std::string to_string(Region r);

struct RegionLabel {
    Region region = Region::Between;
    double n = 0.0;
    double m = 0.0;
    std::vector<double> itilde;   ///< Ĩ on the sampled unit directions
    std::vector<int> signs;       ///< -1, 0, +1 after the dead-band
};

struct GapResult {
    bool nonempty = false;
    double measure = 0.0;        ///< |‖y⁺‖₂ − ‖y⁻‖₂| at the witness, ‖y‖₂ = 1
    double plus_norm = 0.0;
    double minus_norm = 0.0;
    Vector witness;
};

struct WitnessSearch {
    double best_residual = 0.0;
    std::vector<Vector> accepted;
};

struct TracerOptions {
    double bisect_tol = 1e-8;
    double bracket_eps = 1e-3;    ///< bracket inset, relative to λ_{k+1} − λ_{k−1}
    double grid_margin = 0.05;    ///< a-grid inset, relative to the same width
    double dead_band = 1e-8;
    double gap_tol = 1e-6;
    int sphere_samples = 64;
    int threads = 1;
};

/// ‖Au − (b m⊙u⁺ − a m⊙u⁻)‖_{A⁻¹} / ‖u‖_A; throws on u = 0.
double residual_check(const SpectralData& data, const Vector& u, double a, double b);
double residual_check(const GalerkinForms& forms, const Vector& u, double a, double b);

/// Seeded multi-start search for nonzero solutions at (a,b): per sign pattern,
/// inverse iteration on the frozen linear problem. Accepts residual ≤ accept_tol.
WitnessSearch search_witnesses(const SpectralData& data, double a, double b, int starts,
                               std::uint64_t seed, double accept_tol = 1e-6);

/// Unit directions in E_k used for classification (‖y‖_A = 1).
std::vector<Vector> eigenspace_directions(const SpectralData& data, int k, int samples);

GapResult gap_condition(const SpectralData& data, int k, double tol = 1e-6);

class CurveTracer {
public:
    CurveTracer(std::shared_ptr<const SpectralData> data, SolverSettings settings, TracerOptions options);

    [[nodiscard]] FucikContext context(int k, double a, double b) const;
    [[nodiscard]] CurveRoot find_nu(double a, int k) const;
    [[nodiscard]] CurveRoot find_mu(double a, int k) const;
    /// λ_k sits at the centre index; each side is uniform.
    [[nodiscard]] std::vector<double> a_grid(int k, int grid_count) const;
    [[nodiscard]] CurveSample trace_curves(int k, int grid_count) const;
    [[nodiscard]] RegionLabel classify_point(double a, double b, int k) const;
    /// Bisection bracket for b: (λ_{k−1} + ε, λ_{k+1} − ε).
    [[nodiscard]] std::pair<double, double> bracket(int k) const;

    [[nodiscard]] const SpectralData& data() const { return *data_; }
    [[nodiscard]] const TracerOptions& options() const { return options_; }

private:
    CurveRoot find_root(double a, int k, bool lower) const;
    void check_k(int k) const;

    std::shared_ptr<const SpectralData> data_;
    SolverSettings settings_;
    TracerOptions options_;
};

}  // namespace fucik
