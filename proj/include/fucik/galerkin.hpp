#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fucik/config.hpp"
#include "fucik/mesh.hpp"
#include "fucik/pair_rule.hpp"

namespace fucik {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Nodal coefficients of a discrete function, indexed by dof.
using DiscreteFunction = Eigen::VectorXd;

/// Discrete Gagliardo form and L2 structure on the dof space.
///
/// `A` realizes ⟨u,v⟩ = ∫∫ (u(x)-u(y))(v(x)-v(y)) |x-y|^{-1-2s}, `M` is the
/// consistent P1 mass matrix and `m_lumped[i] = ∫ φ_i`.
struct GalerkinForms {
    Matrix A;
    Matrix M;
    Vector m_lumped;

    [[nodiscard]] int size() const { return static_cast<int>(m_lumped.size()); }
    [[nodiscard]] Matrix lumped_mass_matrix() const { return m_lumped.asDiagonal(); }
};

Matrix assemble_stiffness(const Mesh& mesh, double s, int quad_order, double truncation_radius);

struct MassForms {
    Matrix M;
    Vector m_lumped;
};
MassForms assemble_mass(const Mesh& mesh);

GalerkinForms assemble_forms(const Mesh& mesh, const ProblemConfig& config);

/// Evaluator for the p-energy [u]_{s,p}^p and the operator A_p^s on the
/// discrete space, using the same panel-pair quadrature as the stiffness
/// matrix (kernel exponent 1 + s·p). Quadrature points are stored once.
class GagliardoEnergy {
public:
    GagliardoEnergy(const Mesh& mesh, double s, double p, int quad_order, double truncation_radius);

    [[nodiscard]] double p() const { return p_; }
    [[nodiscard]] int size() const { return n_; }

    /// [u]_{s,p}^p.
    [[nodiscard]] double energy(const DiscreteFunction& u) const;
    /// A_p^s(u) as a dual vector: apply(u, v) = gradient(u).dot(v).
    [[nodiscard]] Vector operator_Ap(const DiscreteFunction& u) const;
    /// A_p^s(u) v.
    [[nodiscard]] double apply(const DiscreteFunction& u, const DiscreteFunction& v) const;
    /// Energy and A_p^s(u) in one pass.
    double energy_and_operator(const DiscreteFunction& u, Vector& Ap) const;

private:
    struct Block {
        std::array<int, 4> dofs;
        int begin;
        int end;
    };
    struct ExteriorBlock {
        std::array<int, 2> dofs;
        int begin;
        int end;
    };
    struct ExteriorPoint {
        double lx;
        double w;
    };

    int n_;
    double p_;
    std::vector<Block> blocks_;
    std::vector<PairPoint> points_;
    std::vector<ExteriorBlock> ext_blocks_;
    std::vector<ExteriorPoint> ext_points_;
};

/// |x|^p with fast paths for small integer exponents.
double pow_abs(double x, double p);

double gagliardo_energy_p(const GagliardoEnergy& energy, const DiscreteFunction& u);
double apply_Ap(const GagliardoEnergy& energy, const DiscreteFunction& u, const DiscreteFunction& v);

/// Dense CSV with 17 significant digits.
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace fucik
