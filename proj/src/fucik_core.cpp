#include "fucik/fucik_core.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "detail/newton.hpp"
#include "fucik/errors.hpp"

namespace fucik {

using detail::LocalModel;

double eval_I(const GalerkinForms& forms, const Vector& u, FucikPoint pt) {
    const Vector plus = u.cwiseMax(0.0);
    const Vector minus = (-u).cwiseMax(0.0);
    const double quad = u.dot(forms.A * u);
    const double pot = pt.b * plus.cwiseAbs2().dot(forms.m_lumped) +
                       pt.a * minus.cwiseAbs2().dot(forms.m_lumped);
    return 0.5 * (quad - pot);
}

Vector grad_I(const GalerkinForms& forms, const Vector& u, FucikPoint pt) {
    const Vector plus = u.cwiseMax(0.0);
    const Vector minus = (-u).cwiseMax(0.0);
    return forms.A * u - forms.m_lumped.cwiseProduct(pt.b * plus - pt.a * minus);
}

std::shared_ptr<const SpectralData> make_spectral_data(const GalerkinForms& forms,
                                                       const EigenDecomposition& decomp) {
    if (decomp.size() != forms.size()) throw ConfigError("eigendecomposition does not match the forms");
    auto data = std::make_shared<SpectralData>();
    data->A = forms.A;
    data->mass = forms.m_lumped;
    data->V = decomp.vectors;
    data->lambda = decomp.values;
    data->decomp = decomp;
    return data;
}

FucikContext::FucikContext(std::shared_ptr<const SpectralData> data, int k, FucikPoint pt,
                           SolverSettings settings)
    : data_(std::move(data)), k_(k), pt_(pt), settings_(settings) {
    const auto& dec = data_->decomp;
    if (k < 2) throw ConfigError("k must be ≥ 2");
    if (k > dec.num_distinct() - 1)
        throw ConfigError("k must be <= " + std::to_string(dec.num_distinct() - 1));
    const double lower = dec.lambda(k - 1);
    const double upper = dec.lambda(k + 1);
    if (!(pt.a > lower && pt.a < upper && pt.b > lower && pt.b < upper))
        throw ConfigError("point (a,b) is outside the square Q_k");
    lo_ = dec.d[k - 1];
    hi_ = dec.d[k];
    n_ = data_->size();
}

double FucikContext::eval_I(const Vector& u) const {
    const Vector plus = u.cwiseMax(0.0);
    const Vector minus = (-u).cwiseMax(0.0);
    const double pot = pt_.b * plus.cwiseAbs2().dot(data_->mass) +
                       pt_.a * minus.cwiseAbs2().dot(data_->mass);
    return 0.5 * (u.dot(data_->A * u) - pot);
}

Vector FucikContext::grad_I(const Vector& u) const {
    const Vector plus = u.cwiseMax(0.0);
    const Vector minus = (-u).cwiseMax(0.0);
    return data_->A * u - data_->mass.cwiseProduct(pt_.b * plus - pt_.a * minus);
}

FucikContext::State FucikContext::evaluate(const Vector& c) const {
    State st;
    st.c = c;
    st.u = data_->V * c;
    st.weight.resize(n_);
    for (int i = 0; i < n_; ++i) st.weight[i] = data_->mass[i] * (st.u[i] >= 0.0 ? pt_.b : pt_.a);
    const Vector wu = st.weight.cwiseProduct(st.u);
    st.value = 0.5 * (c.cwiseAbs2().dot(data_->lambda) - wu.dot(st.u));
    st.grad = data_->lambda.cwiseProduct(c) - data_->V.transpose() * wu;
    return st;
}

Matrix FucikContext::hessian_block(const Vector& weight, int r0, int rn, int c0, int cn) const {
    Matrix h;
    if (r0 == c0 && rn == cn) {
        const Matrix scaled = weight.cwiseSqrt().asDiagonal() * data_->V.middleCols(r0, rn);
        h = Matrix::Zero(rn, rn);
        h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), -1.0);
        h = h.selfadjointView<Eigen::Lower>();
    } else {
        h = -(data_->V.middleCols(r0, rn).transpose() * weight.asDiagonal() * data_->V.middleCols(c0, cn));
    }
    const int from = std::max(r0, c0);
    const int to = std::min(r0 + rn, c0 + cn);
    for (int j = from; j < to; ++j) h(j - r0, j - c0) += data_->lambda[j];
    return h;
}

double FucikContext::dual_norm(const Vector& g, int r0, int rn) const {
    return std::sqrt(g.segment(r0, rn).cwiseAbs2().dot(data_->lambda.segment(r0, rn).cwiseInverse()));
}

double FucikContext::energy_of(const Vector& c, int r0, int rn) const {
    return std::sqrt(c.segment(r0, rn).cwiseAbs2().dot(data_->lambda.segment(r0, rn)));
}

Vector FucikContext::project(const Vector& u, int r0, int rn) const {
    if (u.size() != n_) throw ConfigError("vector length does not match the number of dofs");
    Vector c = Vector::Zero(n_);
    c.segment(r0, rn) = data_->coords(u).segment(r0, rn);
    return c;
}

Vector FucikContext::to_nodal(const Vector& c, int r0, int rn) const {
    return data_->V.middleCols(r0, rn) * c.segment(r0, rn);
}

FucikContext::State FucikContext::solve_lower(Vector c) const {
    const double scale = energy_of(c, 0, n_);
    if (scale == 0.0) return evaluate(c);
    const Vector base = c;
    auto model = [&](const Vector& x) {
        Vector cc = base;
        cc.head(lo_) = x;
        auto st = std::make_shared<State>(evaluate(cc));
        LocalModel m;
        m.value = -st->value;
        m.grad = -st->grad.head(lo_);
        m.hess = [this, st] { return Matrix(-hessian_block(st->weight, 0, lo_, 0, lo_)); };
        return m;
    };
    const Vector precond = data_->lambda.head(lo_).cwiseInverse();
    const auto res = detail::newton_minimize(c.head(lo_), model, precond,
                                             0.01 * settings_.solver_tol * scale, settings_.max_iterations);
    if (!res.converged)
        throw SolverError("theta solver did not converge; (a,b) may be too close to the boundary of Q_k");
    c.head(lo_) = res.x;
    return evaluate(c);
}

FucikContext::State FucikContext::solve_upper(Vector c) const {
    const double scale = energy_of(c, 0, n_);
    if (scale == 0.0) return evaluate(c);
    const int len = n_ - hi_;
    const Vector base = c;
    auto model = [&](const Vector& x) {
        Vector cc = base;
        cc.tail(len) = x;
        auto st = std::make_shared<State>(evaluate(cc));
        LocalModel m;
        m.value = st->value;
        m.grad = st->grad.tail(len);
        m.hess = [this, st, len] { return hessian_block(st->weight, hi_, len, hi_, len); };
        return m;
    };
    const Vector precond = data_->lambda.tail(len).cwiseInverse();
    const auto res = detail::newton_minimize(c.tail(len), model, precond,
                                             0.01 * settings_.solver_tol * scale, settings_.max_iterations);
    if (!res.converged)
        throw SolverError("tau solver did not converge; (a,b) may be too close to the boundary of Q_k");
    c.tail(len) = res.x;
    return evaluate(c);
}

Vector FucikContext::theta(const Vector& w) const {
    const State st = solve_lower(project(w, lo_, n_ - lo_));
    return to_nodal(st.c, 0, lo_);
}

Vector FucikContext::tau(const Vector& v) const {
    const State st = solve_upper(project(v, 0, hi_));
    return to_nodal(st.c, hi_, n_ - hi_);
}

Vector FucikContext::sigma(const Vector& w) const {
    return solve_lower(project(w, lo_, n_ - lo_)).u;
}

Vector FucikContext::zeta(const Vector& v) const {
    return solve_upper(project(v, 0, hi_)).u;
}

namespace {

// S = H_rr − H_rs H_ss⁻¹ H_sr for the reduction over the s-block.
Matrix schur(const Matrix& h_rr, const Matrix& h_rs, const Matrix& h_ss) {
    Eigen::LLT<Matrix> llt(h_ss);
    if (llt.info() == Eigen::Success) return h_rr - h_rs * llt.solve(h_rs.transpose());
    llt.compute(-h_ss);
    if (llt.info() != Eigen::Success) throw SolverError("reduced Hessian block is indefinite");
    return h_rr + h_rs * llt.solve(h_rs.transpose());
}

}  // namespace

Vector FucikContext::eta(const Vector& y) const {
    const Vector cy = project(y, lo_, hi_ - lo_);
    const double scale = energy_of(cy, 0, n_);
    if (scale == 0.0 || lo_ == 0) return Vector::Zero(n_);
    const int len = n_ - hi_;
    Vector warm = Vector::Zero(len);
    auto model = [&](const Vector& x) {
        Vector cc = cy;
        cc.head(lo_) = x;
        cc.tail(len) = warm;
        auto st = std::make_shared<State>(solve_upper(cc));
        warm = st->c.tail(len);
        LocalModel m;
        m.value = -st->value;
        m.grad = -st->grad.head(lo_);
        m.hess = [this, st, len] {
            const Matrix s = schur(hessian_block(st->weight, 0, lo_, 0, lo_),
                                   hessian_block(st->weight, 0, lo_, hi_, len),
                                   hessian_block(st->weight, hi_, len, hi_, len));
            return Matrix(-s);
        };
        return m;
    };
    const auto res = detail::newton_minimize(Vector::Zero(lo_), model, data_->lambda.head(lo_).cwiseInverse(),
                                             settings_.solver_tol * scale, settings_.max_iterations);
    if (!res.converged) throw SolverError("eta solver did not converge");
    Vector c = Vector::Zero(n_);
    c.head(lo_) = res.x;
    return to_nodal(c, 0, lo_);
}

Vector FucikContext::xi(const Vector& y) const {
    const Vector cy = project(y, lo_, hi_ - lo_);
    const double scale = energy_of(cy, 0, n_);
    if (scale == 0.0) return Vector::Zero(n_);
    const int len = n_ - hi_;
    Vector warm = Vector::Zero(lo_);
    auto model = [&](const Vector& x) {
        Vector cc = cy;
        cc.tail(len) = x;
        cc.head(lo_) = warm;
        auto st = std::make_shared<State>(solve_lower(cc));
        warm = st->c.head(lo_);
        LocalModel m;
        m.value = st->value;
        m.grad = st->grad.tail(len);
        m.hess = [this, st, len] {
            return schur(hessian_block(st->weight, hi_, len, hi_, len),
                         hessian_block(st->weight, hi_, len, 0, lo_),
                         hessian_block(st->weight, 0, lo_, 0, lo_));
        };
        return m;
    };
    const auto res = detail::newton_minimize(Vector::Zero(len), model, data_->lambda.tail(len).cwiseInverse(),
                                             settings_.solver_tol * scale, settings_.max_iterations);
    if (!res.converged) throw SolverError("xi solver did not converge");
    Vector c = Vector::Zero(n_);
    c.tail(len) = res.x;
    return to_nodal(c, hi_, len);
}

Vector FucikContext::phi(const Vector& y) const {
    const Vector v = eta(y);
    return zeta(v + to_nodal(project(y, lo_, hi_ - lo_), lo_, hi_ - lo_));
}

double FucikContext::reduced_I(const Vector& y) const { return eval_I(phi(y)); }

double FucikContext::off_eigenspace_gradient(const Vector& u) const {
    const Vector g = data_->V.transpose() * grad_I(u);
    const double lower = dual_norm(g, 0, lo_);
    const double upper = dual_norm(g, hi_, n_ - hi_);
    return std::sqrt(lower * lower + upper * upper);
}

double FucikContext::lower_gradient(const Vector& u) const {
    return dual_norm(data_->V.transpose() * grad_I(u), 0, lo_);
}

double FucikContext::upper_gradient(const Vector& u) const {
    return dual_norm(data_->V.transpose() * grad_I(u), hi_, n_ - hi_);
}

namespace {

// Start directions in sphere coordinates z (z_j = √λ_j c_j over the block).
std::vector<Vector> sphere_starts(const std::vector<Vector>& hint_coords, int block_len,
                                  const std::vector<int>& signed_axes, const std::vector<int>& axes,
                                  int random_starts, std::uint64_t seed, const Vector& lam) {
    std::vector<Vector> starts;
    for (const auto& h : hint_coords)
        if (h.norm() > 0.0) starts.push_back(h.normalized());
    for (int j : signed_axes) {
        Vector z = Vector::Zero(block_len);
        z[j] = 1.0;
        starts.push_back(z);
        starts.push_back(-z);
    }
    for (int j : axes) {
        if (j < 0 || j >= block_len) continue;
        Vector z = Vector::Zero(block_len);
        z[j] = 1.0;
        starts.push_back(z);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double lam0 = lam.minCoeff();
    for (int r = 0; r < random_starts; ++r) {
        Vector z(block_len);
        // Damp high modes so random starts stay near the low end of the spectrum.
        for (int j = 0; j < block_len; ++j) z[j] = normal(rng) * lam0 / lam[j];
        starts.push_back(z.normalized());
    }
    return starts;
}

}  // namespace

SaddleValue FucikContext::compute_n(const std::vector<Vector>& hints) const {
    const int len = n_ - lo_;
    const Vector sqrt_lam = data_->lambda.tail(len).cwiseSqrt();
    std::vector<Vector> hint_z;
    for (const auto& h : hints) hint_z.push_back(data_->coords(h).tail(len).cwiseProduct(sqrt_lam));
    std::vector<int> signed_axes;
    for (int j = 0; j < hi_ - lo_; ++j) signed_axes.push_back(j);
    std::vector<int> axes;
    for (int j = 0; j < settings_.eigen_starts; ++j) axes.push_back(hi_ - lo_ + j);
    const auto starts = sphere_starts(hint_z, len, signed_axes, axes, settings_.random_starts,
                                      settings_.seed ^ 0x6e6e6eULL, data_->lambda.tail(len));

    SaddleValue best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < starts.size(); ++s) {
        Vector warm = Vector::Zero(lo_);
        auto model = [&](const Vector& z) {
            Vector cc(n_);
            cc.head(lo_) = warm;
            cc.tail(len) = z.cwiseQuotient(sqrt_lam);
            auto st = std::make_shared<State>(solve_lower(cc));
            warm = st->c.head(lo_);
            LocalModel m;
            m.value = st->value;
            m.grad = st->grad.tail(len).cwiseQuotient(sqrt_lam);
            m.hess = [this, st, len, &sqrt_lam] {
                const Matrix s = schur(hessian_block(st->weight, lo_, len, lo_, len),
                                       hessian_block(st->weight, lo_, len, 0, lo_),
                                       hessian_block(st->weight, 0, lo_, 0, lo_));
                const Vector inv = sqrt_lam.cwiseInverse();
                return Matrix(inv.asDiagonal() * s * inv.asDiagonal());
            };
            return m;
        };
        const auto res = detail::sphere_minimize(starts[s], model, settings_.solver_tol,
                                                 settings_.outer_iterations);
        if (res.value < best.value) {
            Vector c = Vector::Zero(n_);
            c.tail(len) = res.x.cwiseQuotient(sqrt_lam);
            best.value = res.value;
            best.direction = to_nodal(c, lo_, len);
            best.solution = solve_lower(c).u;
            best.converged = res.converged;
            best.best_start = static_cast<int>(s);
        }
    }
    return best;
}

SaddleValue FucikContext::compute_m(const std::vector<Vector>& hints) const {
    const int len = hi_;
    const int tail = n_ - hi_;
    const Vector sqrt_lam = data_->lambda.head(len).cwiseSqrt();
    std::vector<Vector> hint_z;
    for (const auto& h : hints) hint_z.push_back(data_->coords(h).head(len).cwiseProduct(sqrt_lam));
    std::vector<int> signed_axes;
    for (int j = lo_; j < hi_; ++j) signed_axes.push_back(j);
    std::vector<int> axes;
    for (int j = 0; j < settings_.eigen_starts; ++j) axes.push_back(lo_ - 1 - j);
    const auto starts = sphere_starts(hint_z, len, signed_axes, axes, settings_.random_starts,
                                      settings_.seed ^ 0x6d6d6dULL, data_->lambda.head(len));

    SaddleValue best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < starts.size(); ++s) {
        Vector warm = Vector::Zero(tail);
        auto model = [&](const Vector& z) {
            Vector cc(n_);
            cc.head(len) = z.cwiseQuotient(sqrt_lam);
            cc.tail(tail) = warm;
            auto st = std::make_shared<State>(solve_upper(cc));
            warm = st->c.tail(tail);
            LocalModel m;
            m.value = -st->value;
            m.grad = -st->grad.head(len).cwiseQuotient(sqrt_lam);
            m.hess = [this, st, len, tail, &sqrt_lam] {
                const Matrix s = schur(hessian_block(st->weight, 0, len, 0, len),
                                       hessian_block(st->weight, 0, len, hi_, tail),
                                       hessian_block(st->weight, hi_, tail, hi_, tail));
                const Vector inv = sqrt_lam.cwiseInverse();
                return Matrix(-(inv.asDiagonal() * s * inv.asDiagonal()));
            };
            return m;
        };
        const auto res = detail::sphere_minimize(starts[s], model, settings_.solver_tol,
                                                 settings_.outer_iterations);
        if (-res.value > best.value) {
            Vector c = Vector::Zero(n_);
            c.head(len) = res.x.cwiseQuotient(sqrt_lam);
            best.value = -res.value;
            best.direction = to_nodal(c, 0, len);
            best.solution = solve_upper(c).u;
            best.converged = res.converged;
            best.best_start = static_cast<int>(s);
        }
    }
    return best;
}

}  // namespace fucik
