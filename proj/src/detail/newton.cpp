#include "detail/newton.hpp"

namespace fucik::detail {

namespace {

double weighted_norm(const Vector& g, const Vector& w) {
    return std::sqrt(g.cwiseAbs2().dot(w));
}

}  // namespace

NewtonResult newton_minimize(Vector x, const ModelFn& model, const Vector& precond, double tol,
                             int max_iter) {
    NewtonResult out;
    LocalModel cur = model(x);
    double gnorm = weighted_norm(cur.grad, precond);
    int it = 0;
    for (; it < max_iter && gnorm > tol; ++it) {
        Vector dir;
        Eigen::LLT<Matrix> llt(cur.hess());
        if (llt.info() == Eigen::Success) dir = llt.solve(-cur.grad);
        double slope = dir.size() ? cur.grad.dot(dir) : 0.0;
        bool newton = dir.size() && std::isfinite(slope) && slope < 0.0;
        if (!newton) {
            dir = -precond.cwiseProduct(cur.grad);
            slope = cur.grad.dot(dir);
        }

        double step = 1.0;
        bool accepted = false;
        LocalModel trial;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector xt = x + step * dir;
            trial = model(xt);
            const double tn = weighted_norm(trial.grad, precond);
            // A full Newton step that reduces the gradient is accepted even when
            // the value decrease is below roundoff.
            if (trial.value <= cur.value + 1e-4 * step * slope || (newton && step == 1.0 && tn < gnorm &&
                 trial.value <= cur.value + 1e-12 * (1.0 + std::abs(cur.value)))) {
                x = xt;
                accepted = true;
                gnorm = tn;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        cur = std::move(trial);
    }
    out.x = std::move(x);
    out.value = cur.value;
    out.grad_norm = gnorm;
    out.iterations = it;
    out.converged = gnorm <= tol;
    return out;
}

NewtonResult sphere_minimize(Vector x, const ModelFn& model, double tol, int max_iter) {
    const auto dim = x.size();
    NewtonResult out;
    x.normalize();
    LocalModel cur = model(x);
    auto riemannian = [&](const LocalModel& m, const Vector& at) {
        return Vector(m.grad - m.grad.dot(at) * at);
    };
    Vector gr = riemannian(cur, x);
    double gnorm = gr.norm();
    int it = 0;
    for (; it < max_iter && gnorm > tol; ++it) {
        const double mu = cur.grad.dot(x);
        Vector dir;
        if (dim > 1) {
            Matrix bordered(dim + 1, dim + 1);
            bordered.topLeftCorner(dim, dim) = cur.hess();
            bordered.topLeftCorner(dim, dim).diagonal().array() -= mu;
            bordered.topRightCorner(dim, 1) = x;
            bordered.bottomLeftCorner(1, dim) = x.transpose();
            bordered(dim, dim) = 0.0;
            Vector rhs = Vector::Zero(dim + 1);
            rhs.head(dim) = -gr;
            Eigen::PartialPivLU<Matrix> lu(bordered);
            dir = lu.solve(rhs).head(dim);
        }
        double slope = dir.size() ? gr.dot(dir) : 0.0;
        bool newton = dir.size() && dir.allFinite() && slope < 0.0;
        if (!newton) {
            dir = -gr;
            slope = -gnorm * gnorm;
        }

        double step = 1.0;
        bool accepted = false;
        LocalModel trial;
        Vector trial_gr;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector xt = (x + step * dir).normalized();
            trial = model(xt);
            trial_gr = riemannian(trial, xt);
            const double tn = trial_gr.norm();
            if (trial.value <= cur.value + 1e-4 * step * slope || (newton && step == 1.0 && tn < gnorm &&
                 trial.value <= cur.value + 1e-12 * (1.0 + std::abs(cur.value)))) {
                x = xt;
                accepted = true;
                gnorm = tn;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        cur = std::move(trial);
        gr = std::move(trial_gr);
    }
    out.x = std::move(x);
    out.value = cur.value;
    out.grad_norm = gnorm;
    out.iterations = it;
    out.converged = gnorm <= tol;
    return out;
}

}  // namespace fucik::detail
