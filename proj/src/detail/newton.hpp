#pragma once

#include <cmath>
#include <functional>

#include "fucik/galerkin.hpp"

namespace fucik::detail {

/// Value, gradient and (generalized) Hessian of a piecewise-quadratic model.
struct LocalModel {
    double value = 0.0;
    Vector grad;
    std::function<Matrix()> hess;   ///< evaluated only for accepted iterates
};

using ModelFn = std::function<LocalModel(const Vector&)>;

struct NewtonResult {
    Vector x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Damped semismooth Newton for a convex piecewise-quadratic function.
/// `precond` scales gradient-fallback steps and the convergence norm
/// (norm = sqrt(Σ precond_i g_i²)).
NewtonResult newton_minimize(Vector x, const ModelFn& model, const Vector& precond, double tol,
                             int max_iter);

/// Riemannian Newton for a 2-homogeneous function on the unit sphere.
/// The model gradient and Hessian are Euclidean; x must be a unit vector.
NewtonResult sphere_minimize(Vector x, const ModelFn& model, double tol, int max_iter);

}  // namespace fucik::detail
