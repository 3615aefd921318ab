#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fucik/galerkin.hpp"

namespace fucik {

struct Lambda1Result {
    double lambda1 = 0.0;
    Vector u1;            ///< nonnegative, [u1]_{s,p} = 1
    int iterations = 0;
    double residual = 0.0;
};

struct PCurvePoint {
    double t = 0.0;
    double c = 0.0;
    double a = 0.0;       ///< = c
    double b = 0.0;       ///< = c·t
    std::vector<Vector> path;
    std::vector<double> path_values;
    int max_index = 0;
    Vector candidate;     ///< solves the equation at (a,b) up to `residual`
    double residual = 0.0;
    int sweeps = 0;
};

struct MountainPassOptions {
    int path_nodes = 17;
    int max_sweeps = 4000;
    int reparam_every = 10;
    int climb_after = 100;      ///< sweeps of plain string relaxation before climbing
    double tol = 1e-9;          ///< residual target for the climbing node
    std::uint64_t seed = 42;
};

/// Fractional p-Laplacian on the discrete space: Ψ, Ψ_t, λ₁ and the first
/// nontrivial Fučík curve point by a string mountain pass.
class PLapProblem {
public:
    PLapProblem(const Mesh& mesh, const ProblemConfig& config, const GalerkinForms& forms);

    [[nodiscard]] double p() const { return p_; }
    [[nodiscard]] int size() const { return static_cast<int>(mass_.size()); }
    [[nodiscard]] const Vector& mass() const { return mass_; }

    /// [u]_{s,p}^p (uᵀAu for p = 2).
    [[nodiscard]] double energy(const Vector& u) const;
    /// A_p^s(u) as a dual vector.
    [[nodiscard]] Vector operator_Ap(const Vector& u) const;
    double energy_and_operator(const Vector& u, Vector& Ap) const;

    /// [u]^p / Σ m|u|^p.
    [[nodiscard]] double psi(const Vector& u) const;
    /// [u]^p / Σ m((u⁺)^p + t (u⁻)^p).
    [[nodiscard]] double psi_t(const Vector& u, double t) const;
    /// Euclidean gradient of the 0-homogeneous Ψ_t; also returns Ψ_t(u).
    Vector grad_psi_t(const Vector& u, double t, double& value) const;

    /// ‖A_p(u) − (b m(u⁺)^{p−1} − a m(u⁻)^{p−1})‖_{A⁻¹} / ‖A_p(u)‖_{A⁻¹}.
    [[nodiscard]] double residual(const Vector& u, double a, double b) const;
    /// Rescale to [u]_{s,p} = 1.
    [[nodiscard]] Vector normalize(const Vector& u) const;

    /// Minimize Ψ from a seeded random start (L-BFGS in the energy metric).
    [[nodiscard]] Lambda1Result minimize_lambda1(std::uint64_t seed, double tol, int max_iter = 5000) const;

    /// Open interval of admissible t given λ₁ and a surrogate for λ₂.
    static std::pair<double, double> admissible_t(double lambda1, double lambda2);

    /// Mountain pass between u₁ and −u₁ for Ψ_t. When `lambda2` is given, t is
    /// checked against admissible_t(λ₁, λ₂).
    [[nodiscard]] PCurvePoint mountain_pass_c2(double t, const Lambda1Result& first,
                                               std::optional<double> lambda2,
                                               const MountainPassOptions& options) const;

private:
    [[nodiscard]] double dual_norm(const Vector& g) const;
    [[nodiscard]] double denominator(const Vector& u, double t) const;

    double p_;
    GagliardoEnergy energy_;
    Matrix A_;
    Eigen::LLT<Matrix> a_llt_;
    Vector mass_;
    Vector second_mode_;
};

}  // namespace fucik
