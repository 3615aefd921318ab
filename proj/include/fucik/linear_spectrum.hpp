#pragma once

#include <vector>

#include "fucik/galerkin.hpp"

namespace fucik {

/// Distinct discrete eigenvalues of A u = λ M u with their eigenspaces.
///
/// `vectors` holds all eigenvectors, M-orthonormal, sorted by eigenvalue;
/// `values` the individual eigenvalues. Distinct eigenvalue k (1-based) owns
/// columns [d[k-1], d[k]) with d[0] = 0, and `lambdas[k-1]` is the cluster mean.
struct EigenDecomposition {
    Vector values;
    Matrix vectors;
    std::vector<double> lambdas;
    std::vector<int> mults;
    std::vector<int> d;
    std::vector<double> residuals;

    [[nodiscard]] int num_distinct() const { return static_cast<int>(lambdas.size()); }
    [[nodiscard]] int size() const { return static_cast<int>(values.size()); }
    /// λ_k, 1-based.
    [[nodiscard]] double lambda(int k) const { return lambdas.at(k - 1); }
    /// Columns spanning E_k, 1-based.
    [[nodiscard]] Matrix eigenspace(int k) const;
    /// φ₁, normalized to have positive mass-weighted mean.
    [[nodiscard]] Vector phi1() const { return vectors.col(0); }
};

/// Dense generalized eigensolve; eigenvalues within relative distance
/// `cluster_tol` of their predecessor are merged into one λ_k.
EigenDecomposition solve_eigen(const Matrix& A, const Matrix& M, double cluster_tol);

/// Group precomputed eigenpairs (ascending values) as solve_eigen does.
EigenDecomposition cluster_eigenpairs(Vector values, Matrix vectors, const Matrix& A, const Matrix& M,
                                      double cluster_tol);

struct SubspaceBases {
    Matrix lower;      ///< N_{k-1}
    Matrix eigen;      ///< E_k
    Matrix upper;      ///< M_k
};

/// Bases of N_{k-1}, E_k, M_k; requires 2 ≤ k ≤ num_distinct() - 1.
SubspaceBases subspaces(const EigenDecomposition& decomp, int k);

/// min(‖w⁺‖₂, ‖w⁻‖₂) in the lumped L2 norm, for w ⊥ φ₁.
double orthogonality_check(const EigenDecomposition& decomp, const Vector& m_lumped,
                           const Vector& w, double tol = 1e-8);

/// Lumped L2 norms of the nodal positive and negative parts.
struct PartNorms {
    double plus = 0.0;
    double minus = 0.0;
};
PartNorms part_norms(const Vector& m_lumped, const Vector& u);

}  // namespace fucik
