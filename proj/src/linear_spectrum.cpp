#include "fucik/linear_spectrum.hpp"

#include <cmath>
#include <string>

#include "fucik/errors.hpp"

namespace fucik {

Matrix EigenDecomposition::eigenspace(int k) const {
    if (k < 1 || k > num_distinct()) throw ConfigError("eigenvalue index out of range");
    return vectors.middleCols(d[k - 1], d[k] - d[k - 1]);
}

EigenDecomposition solve_eigen(const Matrix& A, const Matrix& M, double cluster_tol) {
    if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows())
        throw ConfigError("A and M must be square and of equal size");
    if (A.rows() == 0) throw ConfigError("empty eigenproblem");
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) throw ConfigError("M is not positive definite");

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(A, M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");
    return cluster_eigenpairs(solver.eigenvalues(), solver.eigenvectors(), A, M, cluster_tol);
}

EigenDecomposition cluster_eigenpairs(Vector values, Matrix vectors, const Matrix& A, const Matrix& M,
                                      double cluster_tol) {
    EigenDecomposition out;
    out.values = std::move(values);
    out.vectors = std::move(vectors);
    const int n = static_cast<int>(out.values.size());
    if (out.vectors.rows() != n || out.vectors.cols() != n || A.rows() != n)
        throw ConfigError("eigenpair dimensions do not match");

    for (int j = 0; j < n; ++j) {
        const double nrm = std::sqrt(out.vectors.col(j).dot(M * out.vectors.col(j)));
        out.vectors.col(j) /= nrm;
    }
    const Vector mass = M * Vector::Ones(n);
    if (out.vectors.col(0).dot(mass) < 0.0) out.vectors.col(0) *= -1.0;
    // Higher modes: largest-magnitude entry positive, for reproducible output.
    for (int j = 1; j < n; ++j) {
        Eigen::Index at = 0;
        out.vectors.col(j).cwiseAbs().maxCoeff(&at);
        if (out.vectors(at, j) < 0.0) out.vectors.col(j) *= -1.0;
    }

    out.d.push_back(0);
    int start = 0;
    for (int j = 1; j <= n; ++j) {
        const bool split = j == n || std::abs(out.values[j] - out.values[j - 1]) >
                                         cluster_tol * std::abs(out.values[j - 1]);
        if (!split) continue;
        double sum = 0.0;
        for (int i = start; i < j; ++i) sum += out.values[i];
        out.lambdas.push_back(sum / (j - start));
        out.mults.push_back(j - start);
        out.d.push_back(j);
        start = j;
    }

    const Matrix AV = A * out.vectors;
    const Matrix MV = M * out.vectors;
    out.residuals.resize(n);
    for (int j = 0; j < n; ++j)
        out.residuals[j] = (AV.col(j) - out.values[j] * MV.col(j)).norm() / out.vectors.col(j).norm();
    return out;
}

SubspaceBases subspaces(const EigenDecomposition& decomp, int k) {
    if (k < 2 || k > decomp.num_distinct() - 1)
        throw ConfigError("k must satisfy 2 <= k <= " + std::to_string(decomp.num_distinct() - 1));
    const int lo = decomp.d[k - 1];
    const int hi = decomp.d[k];
    return {decomp.vectors.leftCols(lo), decomp.vectors.middleCols(lo, hi - lo),
            decomp.vectors.rightCols(decomp.size() - hi)};
}

PartNorms part_norms(const Vector& m_lumped, const Vector& u) {
    const Vector plus = u.cwiseMax(0.0);
    const Vector minus = (-u).cwiseMax(0.0);
    return {std::sqrt(plus.cwiseAbs2().dot(m_lumped)), std::sqrt(minus.cwiseAbs2().dot(m_lumped))};
}

double orthogonality_check(const EigenDecomposition& decomp, const Vector& m_lumped,
                           const Vector& w, double tol) {
    const Vector phi = decomp.phi1();
    const double wn = std::sqrt(w.cwiseAbs2().dot(m_lumped));
    if (wn == 0.0) throw ConfigError("w must be nonzero");
    const double overlap = std::abs(phi.dot(m_lumped.cwiseProduct(w))) / wn;
    if (overlap > tol) throw ConfigError("w is not orthogonal to phi_1");
    const PartNorms pn = part_norms(m_lumped, w);
    return std::min(pn.plus, pn.minus);
}

}  // namespace fucik
