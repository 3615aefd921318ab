#include "fucik/curve_tracer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <mutex>
#include <thread>

#include "fucik/errors.hpp"

namespace fucik {

std::string CurveRow::flags() const {
    if (!nu_out && !mu_out) return "ok";
    if (nu_out && mu_out) return "nu_out_of_square|mu_out_of_square";
    return nu_out ? "nu_out_of_square" : "mu_out_of_square";
}

std::string to_string(Region r) {
    switch (r) {
        case Region::BelowLower: return "BelowLower";
        case Region::OnLower: return "OnLower";
        case Region::Between: return "Between";
        case Region::OnUpper: return "OnUpper";
        case Region::AboveUpper: return "AboveUpper";
    }
    return "Unknown";
}

namespace {

Vector equation_residual(const Matrix& A, const Vector& mass, const Vector& u, double a, double b) {
    const Vector plus = u.cwiseMax(0.0);
    const Vector minus = (-u).cwiseMax(0.0);
    return A * u - mass.cwiseProduct(b * plus - a * minus);
}

Vector pattern_weights(const Vector& mass, const Vector& u, double a, double b) {
    Vector w(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) w[i] = mass[i] * (u[i] >= 0.0 ? b : a);
    return w;
}

double radical_inverse(int index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * (index % base);
        index /= base;
        f /= base;
    }
    return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Low-discrepancy points on the unit sphere of R^dim (Halton + Box–Muller).
std::vector<Vector> sphere_points(int dim, int count) {
    std::vector<Vector> pts;
    if (dim == 1) {
        pts.push_back(Vector::Ones(1));
        pts.push_back(-Vector::Ones(1));
        return pts;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double t = 2.0 * std::numbers::pi * (i + 0.5) / count;
            Vector z(2);
            z << std::cos(t), std::sin(t);
            pts.push_back(z);
        }
        return pts;
    }
    const int pairs = (dim + 1) / 2;
    if (2 * pairs > static_cast<int>(std::size(kPrimes)))
        throw ConfigError("eigenspace dimension too large for sphere sampling");
    for (int i = 1; i <= count; ++i) {
        Vector z(dim);
        for (int p = 0; p < pairs; ++p) {
            const double u1 = std::max(radical_inverse(i, kPrimes[2 * p]), 1e-12);
            const double u2 = radical_inverse(i, kPrimes[2 * p + 1]);
            const double r = std::sqrt(-2.0 * std::log(u1));
            z[2 * p] = r * std::cos(2.0 * std::numbers::pi * u2);
            if (2 * p + 1 < dim) z[2 * p + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
        }
        pts.push_back(z.normalized());
    }
    return pts;
}

}  // namespace

double residual_check(const SpectralData& data, const Vector& u, double a, double b) {
    if (u.size() != data.size()) throw ConfigError("vector length does not match the number of dofs");
    const double unorm = data.energy_norm(u);
    if (!(unorm > 0.0)) throw ConfigError("residual_check requires a nonzero function");
    const Vector g = data.V.transpose() * equation_residual(data.A, data.mass, u, a, b);
    return std::sqrt(g.cwiseAbs2().dot(data.lambda.cwiseInverse())) / unorm;
}

double residual_check(const GalerkinForms& forms, const Vector& u, double a, double b) {
    if (u.size() != forms.size()) throw ConfigError("vector length does not match the number of dofs");
    const double unorm = std::sqrt(u.dot(forms.A * u));
    if (!(unorm > 0.0)) throw ConfigError("residual_check requires a nonzero function");
    const Vector r = equation_residual(forms.A, forms.m_lumped, u, a, b);
    Eigen::LLT<Matrix> llt(forms.A);
    return std::sqrt(r.dot(llt.solve(r))) / unorm;
}

WitnessSearch search_witnesses(const SpectralData& data, double a, double b, int starts,
                               std::uint64_t seed, double accept_tol) {
    const int n = data.size();
    WitnessSearch out;
    out.best_residual = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double lam0 = data.lambda[0];
    for (int s = 0; s < starts; ++s) {
        Vector c(n);
        for (int j = 0; j < n; ++j) c[j] = normal(rng) * lam0 / data.lambda[j];
        Vector u = data.V * c;
        u /= data.energy_norm(u);
        Eigen::PartialPivLU<Matrix> lu;
        std::vector<bool> pattern;
        double best = std::numeric_limits<double>::infinity();
        Vector best_u = u;
        for (int it = 0; it < 60; ++it) {
            std::vector<bool> next(n);
            for (int i = 0; i < n; ++i) next[i] = u[i] >= 0.0;
            if (next != pattern) {
                pattern = std::move(next);
                lu.compute(data.A - Matrix(pattern_weights(data.mass, u, a, b).asDiagonal()));
            }
            Vector x = lu.solve(data.A * u);
            if (!x.allFinite()) break;
            const double xn = data.energy_norm(x);
            if (!(xn > 0.0)) break;
            x /= xn;
            if (x.dot(data.A * u) < 0.0) x = -x;
            u = x;
            const double r = residual_check(data, u, a, b);
            if (r < best) {
                best = r;
                best_u = u;
            }
            if (r <= 1e-3 * accept_tol) break;
        }
        out.best_residual = std::min(out.best_residual, best);
        if (best <= accept_tol) out.accepted.push_back(best_u);
    }
    return out;
}

std::vector<Vector> eigenspace_directions(const SpectralData& data, int k, int samples) {
    const Matrix basis = data.decomp.eigenspace(k);
    std::vector<Vector> dirs;
    for (const auto& z : sphere_points(static_cast<int>(basis.cols()), samples)) {
        Vector y = basis * z;
        dirs.push_back(y / data.energy_norm(y));
    }
    return dirs;
}

GapResult gap_condition(const SpectralData& data, int k, double tol) {
    const Matrix basis = data.decomp.eigenspace(k);
    const auto dim = basis.cols();
    auto parts = [&](const Vector& c) {
        const Vector u = basis * c;
        return part_norms(data.mass, u);
    };
    auto measure = [&](const Vector& c) {
        const PartNorms pn = parts(c);
        return std::abs(pn.plus - pn.minus);
    };

    std::vector<Vector> candidates = sphere_points(static_cast<int>(dim), 256);
    std::vector<std::pair<double, int>> ranked;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) ranked.emplace_back(-measure(candidates[i]), i);
    std::sort(ranked.begin(), ranked.end());

    Vector best = candidates[ranked.front().second];
    double best_val = -ranked.front().first;
    if (dim > 1) {
        // Projected gradient ascent from the best samples.
        const int polish = std::min<int>(8, static_cast<int>(ranked.size()));
        for (int r = 0; r < polish; ++r) {
            Vector c = candidates[ranked[r].second];
            double val = measure(c);
            double step = 0.1;
            for (int it = 0; it < 200 && step > 1e-14; ++it) {
                const Vector u = basis * c;
                const PartNorms pn = part_norms(data.mass, u);
                if (pn.plus == 0.0 || pn.minus == 0.0) break;
                const double sgn = pn.plus >= pn.minus ? 1.0 : -1.0;
                const Vector gp = basis.transpose() * data.mass.cwiseProduct(u.cwiseMax(0.0)) / pn.plus;
                const Vector gm = basis.transpose() * data.mass.cwiseProduct((-u).cwiseMax(0.0)) / pn.minus;
                Vector g = sgn * (gp + gm);
                g -= g.dot(c) * c;
                if (g.norm() < 1e-14) break;
                const Vector trial = (c + step * g).normalized();
                const double tv = measure(trial);
                if (tv > val) {
                    c = trial;
                    val = tv;
                    step *= 1.5;
                } else {
                    step *= 0.5;
                }
            }
            if (val > best_val) {
                best_val = val;
                best = c;
            }
        }
    }
    GapResult out;
    const Vector y = basis * best;
    const PartNorms pn = part_norms(data.mass, y);
    out.measure = best_val;
    out.plus_norm = pn.plus;
    out.minus_norm = pn.minus;
    out.witness = y;
    out.nonempty = best_val > tol;
    return out;
}

CurveTracer::CurveTracer(std::shared_ptr<const SpectralData> data, SolverSettings settings,
                         TracerOptions options)
    : data_(std::move(data)), settings_(settings), options_(options) {}

void CurveTracer::check_k(int k) const {
    const int top = data_->decomp.num_distinct() - 1;
    if (k < 2) throw ConfigError("k must be ≥ 2");
    if (k > top) throw ConfigError("k must be <= " + std::to_string(top));
}

FucikContext CurveTracer::context(int k, double a, double b) const {
    return FucikContext(data_, k, {a, b}, settings_);
}

std::pair<double, double> CurveTracer::bracket(int k) const {
    check_k(k);
    const double lower = data_->decomp.lambda(k - 1);
    const double upper = data_->decomp.lambda(k + 1);
    const double eps = options_.bracket_eps * (upper - lower);
    return {lower + eps, upper - eps};
}

CurveRoot CurveTracer::find_root(double a, int k, bool lower) const {
    const auto [b_lo, b_hi] = bracket(k);
    const double a_lo = data_->decomp.lambda(k - 1);
    const double a_hi = data_->decomp.lambda(k + 1);
    if (!(a > a_lo && a < a_hi)) throw ConfigError("a must lie in (lambda_{k-1}, lambda_{k+1})");

    std::vector<Vector> hints;
    auto value = [&](double b) {
        const FucikContext ctx = context(k, a, b);
        SaddleValue sv = lower ? ctx.compute_n(hints) : ctx.compute_m(hints);
        hints.assign(1, sv.direction);
        return sv;
    };
    // Both n and m are nonincreasing in b: positive below the curve.
    CurveRoot out;
    SaddleValue at_lo = value(b_lo);
    if (at_lo.value <= 0.0) {
        out.b = b_lo;
        out.out_of_square = true;
        out.witness = std::move(at_lo);
        return out;
    }
    SaddleValue at_hi = value(b_hi);
    if (at_hi.value > 0.0) {
        out.b = b_hi;
        out.out_of_square = true;
        out.witness = std::move(at_hi);
        return out;
    }
    double lo = b_lo;
    double hi = b_hi;
    while (hi - lo > options_.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        SaddleValue sv = value(mid);
        if (sv.value > 0.0) {
            lo = mid;
        } else {
            hi = mid;
            at_hi = std::move(sv);
        }
    }
    out.b = 0.5 * (lo + hi);
    out.witness = value(out.b);
    return out;
}

CurveRoot CurveTracer::find_nu(double a, int k) const { return find_root(a, k, true); }
CurveRoot CurveTracer::find_mu(double a, int k) const { return find_root(a, k, false); }

std::vector<double> CurveTracer::a_grid(int k, int grid_count) const {
    check_k(k);
    if (grid_count < 3) throw ConfigError("grid must have at least 3 points");
    const double lower = data_->decomp.lambda(k - 1);
    const double upper = data_->decomp.lambda(k + 1);
    const double centre = data_->decomp.lambda(k);
    const double inset = options_.grid_margin * (upper - lower);
    const double a_min = lower + inset;
    const double a_max = upper - inset;
    const int mid = grid_count / 2;
    std::vector<double> grid(grid_count);
    for (int i = 0; i < mid; ++i) grid[i] = a_min + (centre - a_min) * i / mid;
    grid[mid] = centre;
    const int right = grid_count - 1 - mid;
    for (int i = 1; i <= right; ++i) grid[mid + i] = centre + (a_max - centre) * i / right;
    return grid;
}

CurveSample CurveTracer::trace_curves(int k, int grid_count) const {
    const auto grid = a_grid(k, grid_count);
    CurveSample out;
    out.k = k;
    out.rows.resize(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                CurveRow row;
                row.a = grid[i];
                const CurveRoot nu = find_nu(row.a, k);
                const CurveRoot mu = find_mu(row.a, k);
                row.nu = nu.b;
                row.nu_out = nu.out_of_square;
                row.mu = mu.b;
                row.mu_out = mu.out_of_square;
                out.rows[i] = row;
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(options_.threads, static_cast<int>(grid.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

RegionLabel CurveTracer::classify_point(double a, double b, int k) const {
    const FucikContext ctx = context(k, a, b);
    RegionLabel out;
    bool pos = false;
    bool neg = false;
    bool zero = false;
    for (const Vector& y : eigenspace_directions(*data_, k, options_.sphere_samples)) {
        const double v = ctx.reduced_I(y);
        const int sgn = v > options_.dead_band ? 1 : (v < -options_.dead_band ? -1 : 0);
        out.itilde.push_back(v);
        out.signs.push_back(sgn);
        pos |= sgn > 0;
        neg |= sgn < 0;
        zero |= sgn == 0;
    }
    out.n = ctx.compute_n().value;
    out.m = ctx.compute_m().value;
    if (pos && neg) {
        out.region = Region::Between;
    } else if (zero) {
        out.region = std::abs(out.n) <= std::abs(out.m) ? Region::OnLower : Region::OnUpper;
    } else {
        out.region = pos ? Region::BelowLower : Region::AboveUpper;
    }
    return out;
}

}  // namespace fucik
