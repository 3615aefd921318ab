#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fucik/galerkin.hpp"
#include "fucik/linear_spectrum.hpp"

namespace fucik {

struct FucikPoint {
    double a = 0.0;
    double b = 0.0;
};

/// I(u,a,b) = ½uᵀAu − ½(b Σ m_i (u_i⁺)² + a Σ m_i (u_i⁻)²).
double eval_I(const GalerkinForms& forms, const Vector& u, FucikPoint pt);
/// Au − (b m⊙u⁺ − a m⊙u⁻).
Vector grad_I(const GalerkinForms& forms, const Vector& u, FucikPoint pt);

/// Eigenbasis data shared by every point of a spectrum computation.
/// Coordinates c of u satisfy u = V c with VᵀDV = I and VᵀAV = diag(λ).
struct SpectralData {
    Matrix A;
    Vector mass;
    Matrix V;
    Vector lambda;
    EigenDecomposition decomp;

    [[nodiscard]] int size() const { return static_cast<int>(lambda.size()); }
    [[nodiscard]] Vector coords(const Vector& u) const { return V.transpose() * mass.cwiseProduct(u); }
    [[nodiscard]] double energy_norm(const Vector& u) const { return std::sqrt(u.dot(A * u)); }
};

std::shared_ptr<const SpectralData> make_spectral_data(const GalerkinForms& forms,
                                                       const EigenDecomposition& decomp);

struct SolverSettings {
    int max_iterations = 100;
    int outer_iterations = 200;
    double solver_tol = 1e-10;
    int eigen_starts = 3;
    int random_starts = 8;
    std::uint64_t seed = 42;
};

/// Result of the sphere optimizations behind n_{k−1} and m_k.
struct SaddleValue {
    double value = 0.0;
    Vector direction;   ///< unit-norm argument (w for n, v for m)
    Vector solution;    ///< σ(w) or ζ(v)
    bool converged = false;
    int best_start = -1;
};

/// The square Q_k, a point (a,b) in it, and the reduction maps at that point.
/// All vector arguments and results are nodal dof vectors; inputs are
/// projected onto the subspace the map is defined on.
class FucikContext {
public:
    FucikContext(std::shared_ptr<const SpectralData> data, int k, FucikPoint pt,
                 SolverSettings settings = {});

    [[nodiscard]] int k() const { return k_; }
    [[nodiscard]] FucikPoint point() const { return pt_; }
    [[nodiscard]] const SpectralData& data() const { return *data_; }
    [[nodiscard]] const SolverSettings& settings() const { return settings_; }
    /// Dimensions d_{k−1} and d_k.
    [[nodiscard]] int lower_dim() const { return lo_; }
    [[nodiscard]] int upper_dim() const { return hi_; }

    [[nodiscard]] double eval_I(const Vector& u) const;
    [[nodiscard]] Vector grad_I(const Vector& u) const;

    /// Maximizer over N_{k−1} of I(v + w), w ∈ M_{k−1}.
    [[nodiscard]] Vector theta(const Vector& w) const;
    /// Minimizer over M_k of I(v + w), v ∈ N_k.
    [[nodiscard]] Vector tau(const Vector& v) const;
    [[nodiscard]] Vector sigma(const Vector& w) const;
    [[nodiscard]] Vector zeta(const Vector& v) const;
    /// Maximizer over N_{k−1} of I(ζ(v + y)), y ∈ E_k.
    [[nodiscard]] Vector eta(const Vector& y) const;
    /// Minimizer over M_k of I(σ(y + w)), y ∈ E_k.
    [[nodiscard]] Vector xi(const Vector& y) const;
    [[nodiscard]] Vector phi(const Vector& y) const;
    [[nodiscard]] double reduced_I(const Vector& y) const;

    /// inf over the unit sphere of M_{k−1} of I(σ(w)); `hints` are extra starts.
    [[nodiscard]] SaddleValue compute_n(const std::vector<Vector>& hints = {}) const;
    /// sup over the unit sphere of N_k of I(ζ(v)).
    [[nodiscard]] SaddleValue compute_m(const std::vector<Vector>& hints = {}) const;

    /// Component norms of the gradient outside E_k, in the dual energy norm.
    [[nodiscard]] double off_eigenspace_gradient(const Vector& u) const;
    /// Dual energy norm of the gradient projected onto N_{k−1} or M_k.
    [[nodiscard]] double lower_gradient(const Vector& u) const;
    [[nodiscard]] double upper_gradient(const Vector& u) const;

    // Coordinate-level kernels (c = coordinates in the eigenbasis).
    struct State {
        Vector c;
        Vector u;
        Vector weight;   ///< m_i·(b if u_i ≥ 0 else a)
        double value = 0.0;
        Vector grad;     ///< gradient in coordinates
    };
    [[nodiscard]] State evaluate(const Vector& c) const;
    [[nodiscard]] Matrix hessian_block(const Vector& weight, int r0, int rn, int c0, int cn) const;
    /// Solve the θ problem in place on coordinates [0, lo); throws on failure.
    [[nodiscard]] State solve_lower(Vector c) const;
    /// Solve the τ problem in place on coordinates [hi, n); throws on failure.
    [[nodiscard]] State solve_upper(Vector c) const;

private:
    [[nodiscard]] double dual_norm(const Vector& g, int r0, int rn) const;
    [[nodiscard]] double energy_of(const Vector& c, int r0, int rn) const;
    [[nodiscard]] Vector project(const Vector& u, int r0, int rn) const;
    [[nodiscard]] Vector to_nodal(const Vector& c, int r0, int rn) const;

    std::shared_ptr<const SpectralData> data_;
    int k_;
    FucikPoint pt_;
    SolverSettings settings_;
    int lo_;
    int hi_;
    int n_;
};

}  // namespace fucik
