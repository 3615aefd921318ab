#include "fucik/plap_spectrum.hpp"

#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "fucik/errors.hpp"

namespace fucik {

PLapProblem::PLapProblem(const Mesh& mesh, const ProblemConfig& config, const GalerkinForms& forms)
    : p_(config.p),
      energy_(mesh, config.s, config.p, config.quad_order, config.truncation_radius),
      A_(forms.A),
      a_llt_(forms.A),
      mass_(forms.m_lumped) {
    if (a_llt_.info() != Eigen::Success) throw SolverError("stiffness matrix is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A_, Matrix(mass_.asDiagonal()));
    second_mode_ = es.eigenvectors().cols() > 1 ? Vector(es.eigenvectors().col(1)) : Vector::Zero(size());
}

double PLapProblem::energy(const Vector& u) const {
    if (p_ == 2.0) return u.dot(A_ * u);
    return energy_.energy(u);
}

Vector PLapProblem::operator_Ap(const Vector& u) const {
    if (p_ == 2.0) return A_ * u;
    return energy_.operator_Ap(u);
}

double PLapProblem::energy_and_operator(const Vector& u, Vector& Ap) const {
    if (p_ == 2.0) {
        Ap = A_ * u;
        return u.dot(Ap);
    }
    return energy_.energy_and_operator(u, Ap);
}

double PLapProblem::denominator(const Vector& u, double t) const {
    double den = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double x = u[i];
        den += mass_[i] * (x >= 0.0 ? pow_abs(x, p_) : t * pow_abs(x, p_));
    }
    return den;
}

double PLapProblem::psi(const Vector& u) const { return psi_t(u, 1.0); }

double PLapProblem::psi_t(const Vector& u, double t) const {
    const double den = denominator(u, t);
    if (!(den > 0.0)) throw ConfigError("psi is undefined for a function with zero denominator");
    return energy(u) / den;
}

Vector PLapProblem::grad_psi_t(const Vector& u, double t, double& value) const {
    Vector ap;
    const double e = energy_and_operator(u, ap);
    const double den = denominator(u, t);
    if (!(den > 0.0)) throw ConfigError("psi is undefined for a function with zero denominator");
    value = e / den;
    Vector g(size());
    for (int i = 0; i < size(); ++i) {
        const double x = u[i];
        const double f = x >= 0.0 ? pow_abs(x, p_ - 1.0) : -t * pow_abs(x, p_ - 1.0);
        g[i] = ap[i] - value * mass_[i] * f;
    }
    return (p_ / den) * g;
}

double PLapProblem::dual_norm(const Vector& g) const { return std::sqrt(g.dot(a_llt_.solve(g))); }

double PLapProblem::residual(const Vector& u, double a, double b) const {
    const Vector ap = operator_Ap(u);
    Vector r = ap;
    for (int i = 0; i < size(); ++i) {
        const double x = u[i];
        const double f = x >= 0.0 ? b * pow_abs(x, p_ - 1.0) : -a * pow_abs(x, p_ - 1.0);
        r[i] -= mass_[i] * f;
    }
    const double scale = dual_norm(ap);
    if (!(scale > 0.0)) throw ConfigError("residual requires a nonzero function");
    return dual_norm(r) / scale;
}

Vector PLapProblem::normalize(const Vector& u) const {
    const double e = energy(u);
    if (!(e > 0.0)) throw ConfigError("cannot normalize the zero function");
    return u / std::pow(e, 1.0 / p_);
}

Lambda1Result PLapProblem::minimize_lambda1(std::uint64_t seed, double tol, int max_iter) const {
    const int n = size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    u = normalize(u);

    // Relative residual of the eigen equation: ∇Ψ = p r / den, r = A_p(u) − Ψ m|u|^{p−2}u.
    auto rel_residual = [&](const Vector& x, const Vector& g) {
        return dual_norm(g) * denominator(x, 1.0) / (p_ * dual_norm(operator_Ap(x)));
    };

    double value = 0.0;
    Vector g = grad_psi_t(u, 1.0, value);
    double res = rel_residual(u, g);
    std::deque<std::pair<Vector, Vector>> memory;
    const std::size_t depth = 10;
    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        // Two-loop recursion with the energy-metric initial Hessian.
        Vector q = g;
        std::vector<double> alpha(memory.size());
        for (std::size_t j = memory.size(); j-- > 0;) {
            const auto& [s, y] = memory[j];
            alpha[j] = s.dot(q) / y.dot(s);
            q -= alpha[j] * y;
        }
        Vector r = a_llt_.solve(q);
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            r *= s.dot(y) / y.dot(a_llt_.solve(y));
        } else {
            r /= std::max(value, 1e-300);
        }
        for (std::size_t j = 0; j < memory.size(); ++j) {
            const auto& [s, y] = memory[j];
            const double beta = y.dot(r) / y.dot(s);
            r += s * (alpha[j] - beta);
        }
        Vector dir = -r;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            memory.clear();
            dir = -a_llt_.solve(g) / std::max(value, 1e-300);
            slope = g.dot(dir);
        }

        double step = 1.0;
        bool accepted = false;
        Vector u_new;
        Vector g_new;
        double v_new = 0.0;
        for (int ls = 0; ls < 50; ++ls) {
            u_new = u + step * dir;
            g_new = grad_psi_t(u_new, 1.0, v_new);
            const bool armijo = v_new <= value + 1e-4 * step * slope;
            // Near the minimum the value change drops below roundoff; accept
            // steps that keep the value and shrink the gradient.
            const bool flat = std::abs(v_new - value) <= 1e-13 * value && dual_norm(g_new) < dual_norm(g);
            if (armijo || flat) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        Vector s = u_new - u;
        Vector y = g_new - g;
        if (s.dot(y) > 1e-16 * s.norm() * y.norm()) {
            memory.emplace_back(std::move(s), std::move(y));
            if (memory.size() > depth) memory.pop_front();
        }
        u = u_new;
        g = g_new;
        value = v_new;
        // Ψ is 0-homogeneous; rescale when the iterate drifts in size.
        const double e = energy(u);
        if (e < 0.25 || e > 4.0) {
            const double f = std::pow(e, -1.0 / p_);
            u *= f;
            g /= f;
            memory.clear();
        }
        res = rel_residual(u, g);
    }
    if (res > tol) {
        std::ostringstream msg;
        msg << "lambda_1 minimization did not converge (residual " << std::scientific << std::setprecision(3) << res
            << ", tolerance " << tol << ")";
        throw SolverError(msg.str());
    }

    if (u.dot(mass_) < 0.0) u = -u;
    u = normalize(u);
    const double neg = (-u).cwiseMax(0.0).maxCoeff();
    if (neg > 1e-8 * u.cwiseAbs().maxCoeff())
        throw SolverError("lambda_1 minimizer changes sign; discretization or solver failure");
    Lambda1Result out;
    out.lambda1 = psi(u);
    out.u1 = u.cwiseMax(0.0);
    out.iterations = it;
    out.residual = res;
    return out;
}

std::pair<double, double> PLapProblem::admissible_t(double lambda1, double lambda2) {
    if (!(lambda2 > lambda1 && lambda1 > 0.0)) throw ConfigError("need 0 < lambda_1 < lambda_2");
    return {lambda1 / lambda2, lambda2 / lambda1};
}

PCurvePoint PLapProblem::mountain_pass_c2(double t, const Lambda1Result& first, std::optional<double> lambda2,
                                          const MountainPassOptions& options) const {
    if (!(t > 0.0)) throw ConfigError("t must be positive");
    if (options.path_nodes < 9) throw ConfigError("path_nodes must be at least 9");
    if (lambda2) {
        const auto [lo, hi] = admissible_t(first.lambda1, *lambda2);
        if (!(t > lo && t < hi)) throw ConfigError("t outside the admissible range for the first nontrivial curve");
    }
    const int n = size();
    const int nodes = options.path_nodes;
    const Vector u1 = normalize(first.u1);

    // Initial path u₁ → −u₁ through a perturbed second linear mode.
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector r = second_mode_;
    const double rn = std::sqrt(r.dot(A_ * r));
    r /= rn;
    for (int i = 0; i < n; ++i) r[i] += 1e-2 * normal(rng) * r.cwiseAbs().maxCoeff();
    r -= (r.dot(mass_.cwiseProduct(u1)) / u1.dot(mass_.cwiseProduct(u1))) * u1;
    r *= std::sqrt(u1.dot(A_ * u1) / r.dot(A_ * r));
    std::vector<Vector> path(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double th = std::numbers::pi * i / (nodes - 1);
        path[i] = normalize(std::cos(th) * u1 + std::sin(th) * r);
    }
    path.front() = u1;
    path.back() = normalize(-u1);

    auto a_norm = [&](const Vector& v) { return std::sqrt(v.dot(A_ * v)); };
    // Equal arc length on [first, last], endpoints kept.
    auto reparametrize = [&](int first, int last) {
        if (last - first < 2) return;
        std::vector<double> arc(last - first + 1, 0.0);
        for (int i = first + 1; i <= last; ++i) arc[i - first] = arc[i - first - 1] + a_norm(path[i] - path[i - 1]);
        std::vector<Vector> fresh(path.begin() + first, path.begin() + last + 1);
        int seg = 0;
        const int count = last - first;
        for (int i = 1; i < count; ++i) {
            const double target = arc.back() * i / count;
            while (seg < count - 1 && arc[seg + 1] < target) ++seg;
            const double len = arc[seg + 1] - arc[seg];
            const double w = len > 0.0 ? (target - arc[seg]) / len : 0.0;
            fresh[i] = normalize((1.0 - w) * path[first + seg] + w * path[first + seg + 1]);
        }
        std::copy(fresh.begin(), fresh.end(), path.begin() + first);
    };

    std::vector<double> values(nodes);
    std::vector<Vector> grads(nodes);
    std::vector<double> steps(nodes, 0.0);
    int climb = -1;
    double climb_res = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < options.max_sweeps; ++sweep) {
        for (int i = 0; i < nodes; ++i) grads[i] = grad_psi_t(path[i], t, values[i]);
        int argmax = 0;
        for (int i = 1; i < nodes; ++i)
            if (values[i] > values[argmax]) argmax = i;
        if (argmax == 0 || argmax == nodes - 1)
            throw SolverError("mountain pass path collapsed onto an endpoint; t may be outside the valid range");
        const bool climbing = sweep >= options.climb_after;
        if (climbing) {
            climb = argmax;
            const Vector& u = path[climb];
            climb_res = residual(u, t * values[climb], values[climb]);
            if (climb_res <= options.tol) break;
        }

        std::vector<Vector> next(path);
        for (int i = 1; i < nodes - 1; ++i) {
            const Vector& u = path[i];
            const Vector& g = grads[i];
            // Bisector of the unit chords: unbiased under uneven node spacing.
            const Vector fwd = path[i + 1] - u;
            const Vector back = u - path[i - 1];
            Vector tangent = fwd / a_norm(fwd) + back / a_norm(back);
            tangent /= a_norm(tangent);
            const Vector delta = a_llt_.solve(g);
            const double along = g.dot(tangent);
            if (steps[i] == 0.0) steps[i] = 1.0 / values[i];
            if (i == climb) {
                const Vector dir = -delta + 2.0 * along * tangent;
                next[i] = normalize(u + 0.5 / values[i] * dir);
                continue;
            }
            const Vector dir = -(delta - along * tangent);
            const double slope = g.dot(dir);
            if (!(slope < 0.0)) continue;
            double step = std::min(2.0 * steps[i], 1.0 / values[i]);
            for (int ls = 0; ls < 40; ++ls) {
                const Vector trial = normalize(u + step * dir);
                if (psi_t(trial, t) <= values[i] + 1e-4 * step * slope) {
                    next[i] = trial;
                    break;
                }
                step *= 0.5;
            }
            steps[i] = step;
        }
        path.swap(next);
        if ((sweep + 1) % options.reparam_every == 0) {
            if (climb > 0) {
                reparametrize(0, climb);
                reparametrize(climb, nodes - 1);
            } else {
                reparametrize(0, nodes - 1);
            }
        }
    }
    for (int i = 0; i < nodes; ++i) values[i] = psi_t(path[i], t);
    int argmax = 0;
    for (int i = 1; i < nodes; ++i)
        if (values[i] > values[argmax]) argmax = i;

    PCurvePoint out;
    out.t = t;
    out.c = values[argmax];
    out.a = out.c;
    out.b = out.c * t;
    out.path = path;
    out.path_values = values;
    out.max_index = argmax;
    // A critical point u of Ψ_t solves the equation at (ct, c); −u solves it at (c, ct).
    out.candidate = -path[argmax];
    out.residual = residual(out.candidate, out.a, out.b);
    out.sweeps = sweep;
    return out;
}

}  // namespace fucik
