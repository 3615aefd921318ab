#include <doctest.h>

#include <boost/math/tools/roots.hpp>

#include "fucik/curve_tracer.hpp"
#include "fucik/errors.hpp"
#include "support.hpp"

using namespace fucik;
using testing_support::random_vector;
using testing_support::two_intervals;
using testing_support::unit_interval;

namespace {

CurveTracer tracer_for(const testing_support::Problem& pr, int threads = 1) {
    TracerOptions opt;
    opt.threads = threads;
    return CurveTracer(pr.data, SolverSettings{}, opt);
}

double width(const EigenDecomposition& d, int k) { return d.lambda(k + 1) - d.lambda(k - 1); }

double angle(const Vector& u, const Vector& v) {
    return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
}

}  // namespace

TEST_SUITE("residual check") {
    TEST_CASE("first eigenvector solves the problem on both lines") {
        const auto& pr = unit_interval(32);
        const Vector phi = pr.decomp.phi1();
        const double l1 = pr.decomp.lambda(1);
        for (double a : {0.5 * l1, l1, 10.0 * l1}) {
            CHECK(residual_check(*pr.data, phi, a, l1) <= 1e-10);
            CHECK(residual_check(*pr.data, -phi, l1, a) <= 1e-10);
        }
        CHECK(residual_check(*pr.data, phi, 5.0 * l1, 2.0 * l1) > 0.1);
    }

    TEST_CASE("higher eigenvectors solve on the diagonal") {
        const auto& pr = two_intervals(16);
        for (int k = 2; k <= 6; ++k) {
            const double l = pr.decomp.lambda(k);
            CHECK(residual_check(*pr.data, pr.decomp.eigenspace(k).col(0), l, l) <= 1e-10);
        }
    }

    TEST_CASE("scale invariant, matches the direct form, rejects zero") {
        const auto& pr = unit_interval(16);
        std::mt19937_64 rng(81);
        const Vector u = random_vector(rng, pr.forms.size());
        const double r = residual_check(*pr.data, u, 20.0, 30.0);
        CHECK(r > 1e-3);
        CHECK(residual_check(*pr.data, 7.5 * u, 20.0, 30.0) == doctest::Approx(r).epsilon(1e-12));
        CHECK(residual_check(pr.forms, u, 20.0, 30.0) == doctest::Approx(r).epsilon(1e-10));
        CHECK_THROWS_AS(residual_check(*pr.data, Vector::Zero(pr.forms.size()), 1.0, 1.0), ConfigError);
        CHECK_THROWS_AS(residual_check(*pr.data, Vector::Ones(3), 1.0, 1.0), ConfigError);
    }
}

TEST_SUITE("curves") {
    TEST_CASE("both curves pass through the diagonal point") {
        for (const auto* pr : {&unit_interval(32), &two_intervals(16)}) {
            const CurveTracer tr = tracer_for(*pr);
            for (int k : {2, 3}) {
                const double l = pr->decomp.lambda(k);
                const CurveRoot nu = tr.find_nu(l, k);
                const CurveRoot mu = tr.find_mu(l, k);
                CHECK_FALSE(nu.out_of_square);
                CHECK_FALSE(mu.out_of_square);
                CHECK(std::abs(nu.b - l) <= 1e-3 * l);
                CHECK(std::abs(mu.b - l) <= 1e-3 * l);
            }
        }
    }

    TEST_CASE("roots agree with a dense scan of the saddle values") {
        const auto& pr = unit_interval(8);
        const CurveTracer tr = tracer_for(pr);
        const int k = 2;
        const auto [b_lo, b_hi] = tr.bracket(k);
        for (double fa : {0.4, 0.5, 0.65}) {
            const double a = pr.decomp.lambda(1) + fa * width(pr.decomp, k);
            for (bool lower : {true, false}) {
                auto f = [&](double b) {
                    const FucikContext ctx = tr.context(k, a, b);
                    return lower ? ctx.compute_n().value : ctx.compute_m().value;
                };
                const int steps = 200;
                double prev_b = b_lo;
                double prev_f = f(b_lo);
                double cell_lo = 0.0;
                double cell_hi = 0.0;
                for (int i = 1; i <= steps; ++i) {
                    const double b = b_lo + (b_hi - b_lo) * i / steps;
                    const double fb = f(b);
                    if (prev_f > 0.0 && fb <= 0.0) {
                        cell_lo = prev_b;
                        cell_hi = b;
                        break;
                    }
                    prev_b = b;
                    prev_f = fb;
                }
                REQUIRE(cell_hi > cell_lo);
                std::uintmax_t iters = 100;
                const auto root = boost::math::tools::toms748_solve(
                    f, cell_lo, cell_hi, boost::math::tools::eps_tolerance<double>(45), iters);
                const double reference = 0.5 * (root.first + root.second);
                const CurveRoot found = lower ? tr.find_nu(a, k) : tr.find_mu(a, k);
                CHECK_FALSE(found.out_of_square);
                CHECK(std::abs(found.b - reference) <= 2.0 * tr.options().bisect_tol);
            }
        }
    }

    TEST_CASE("traced curves decrease and stay ordered") {
        const auto& pr = two_intervals(16);
        const CurveTracer tr = tracer_for(pr);
        for (int k : {2, 3}) {
            const CurveSample cs = tr.trace_curves(k, 9);
            REQUIRE(cs.rows.size() == 9);
            CHECK(cs.rows[4].a == pr.decomp.lambda(k));
            const double tol = tr.options().bisect_tol;
            for (std::size_t i = 0; i < cs.rows.size(); ++i) {
                const auto& r = cs.rows[i];
                CHECK(r.nu <= r.mu + tol);
                if (i == 0) continue;
                const auto& p = cs.rows[i - 1];
                CHECK(r.a > p.a);
                if (!r.nu_out && !p.nu_out) CHECK(r.nu - p.nu < tol);
                if (!r.mu_out && !p.mu_out) CHECK(r.mu - p.mu < tol);
            }
        }
    }

    TEST_CASE("rows outside the square are flagged") {
        const auto& pr = unit_interval(32);
        const CurveTracer tr = tracer_for(pr);
        const double a = pr.decomp.lambda(1) + 0.01 * width(pr.decomp, 2);
        const CurveRoot nu = tr.find_nu(a, 2);
        CHECK(nu.out_of_square);
        CHECK(nu.b == tr.bracket(2).second);
        CurveRow row{a, nu.b, nu.b, true, false};
        CHECK(row.flags() == "nu_out_of_square");
        row.mu_out = true;
        CHECK(row.flags() == "nu_out_of_square|mu_out_of_square");
        CHECK(CurveRow{}.flags() == "ok");
    }

    TEST_CASE("grid layout and argument checks") {
        const auto& pr = unit_interval(16);
        const CurveTracer tr = tracer_for(pr);
        const auto grid = tr.a_grid(2, 9);
        const double margin = 0.05 * width(pr.decomp, 2);
        CHECK(grid.front() == doctest::Approx(pr.decomp.lambda(1) + margin));
        CHECK(grid.back() == doctest::Approx(pr.decomp.lambda(3) - margin));
        CHECK(grid[4] == pr.decomp.lambda(2));
        CHECK(std::is_sorted(grid.begin(), grid.end()));
        CHECK_THROWS_AS((void)tr.a_grid(2, 2), ConfigError);
        CHECK_THROWS_AS((void)tr.trace_curves(1, 9), ConfigError);
        CHECK_THROWS_AS((void)tr.find_nu(pr.decomp.lambda(3) + 1.0, 2), ConfigError);
    }

    TEST_CASE("output does not depend on the worker count") {
        const auto& pr = unit_interval(16);
        const CurveSample one = tracer_for(pr, 1).trace_curves(2, 7);
        const CurveSample many = tracer_for(pr, 4).trace_curves(2, 7);
        REQUIRE(one.rows.size() == many.rows.size());
        for (std::size_t i = 0; i < one.rows.size(); ++i) {
            CHECK(one.rows[i].nu == many.rows[i].nu);
            CHECK(one.rows[i].mu == many.rows[i].mu);
        }
    }

    TEST_CASE("on-curve minimizer solves the equation") {
        const auto& pr = unit_interval(32);
        const CurveTracer tr = tracer_for(pr);
        const double a = pr.decomp.lambda(2) + 0.1 * width(pr.decomp, 2);
        const CurveRoot nu = tr.find_nu(a, 2);
        REQUIRE_FALSE(nu.out_of_square);
        const Vector u = nu.witness.solution;
        CHECK(residual_check(*pr.data, u, a, nu.b) <= 1e-5);
        CHECK(std::abs(eval_I(pr.forms, u, {a, nu.b})) <= 1e-8 * u.dot(pr.forms.A * u));
    }
}

TEST_SUITE("classification") {
    TEST_CASE("offsets below and above the curves") {
        const auto& pr = unit_interval(32);
        const CurveTracer tr = tracer_for(pr);
        const int k = 2;
        const double w = width(pr.decomp, k);
        for (double fa : {0.45, 0.5, 0.6}) {
            const double a = pr.decomp.lambda(1) + fa * w;
            const double nu = tr.find_nu(a, k).b;
            const double mu = tr.find_mu(a, k).b;
            const RegionLabel below = tr.classify_point(a, nu - 0.05 * w, k);
            const RegionLabel above = tr.classify_point(a, mu + 0.05 * w, k);
            CHECK(below.region == Region::BelowLower);
            CHECK(above.region == Region::AboveUpper);
            CHECK(below.n > 0.0);
            CHECK(above.m < 0.0);
            CHECK(below.signs.size() == 2);
            CHECK(search_witnesses(*pr.data, a, nu - 0.05 * w, 50, 5).accepted.empty());
            CHECK(search_witnesses(*pr.data, a, mu + 0.05 * w, 50, 6).accepted.empty());
        }
    }

    TEST_CASE("on the lower curve of an asymmetric domain the solutions form one ray") {
        const auto& pr = two_intervals(24);
        const CurveTracer tr = tracer_for(pr);
        const int k = 2;
        const double a = pr.decomp.lambda(k) + 0.15 * width(pr.decomp, k);
        const double nu = tr.find_nu(a, k).b;
        const double mu = tr.find_mu(a, k).b;
        REQUIRE(mu - nu > 1e-3);
        CHECK(tr.classify_point(a, nu, k).region == Region::OnLower);
        CHECK(tr.classify_point(a, mu, k).region == Region::OnUpper);
        const WitnessSearch ws = search_witnesses(*pr.data, a, nu, 50, 7);
        REQUIRE(ws.accepted.size() >= 2);
        for (const Vector& u : ws.accepted) {
            CHECK(angle(u, ws.accepted.front()) <= 1e-4);
            CHECK(std::abs(eval_I(pr.forms, u, {a, nu})) <= 1e-8 * u.dot(pr.forms.A * u));
        }
    }

    TEST_CASE("on the symmetric interval the solutions are a mirror pair of rays") {
        const auto& pr = unit_interval(32);
        const CurveTracer tr = tracer_for(pr);
        const double a = pr.decomp.lambda(2) + 0.15 * width(pr.decomp, 2);
        const double nu = tr.find_nu(a, 2).b;
        const RegionLabel on = tr.classify_point(a, nu, 2);
        CHECK((on.region == Region::OnLower || on.region == Region::OnUpper));
        const WitnessSearch ws = search_witnesses(*pr.data, a, nu, 50, 7);
        REQUIRE(ws.accepted.size() >= 2);
        const Vector first = ws.accepted.front();
        const Vector mirror = first.reverse();
        for (const Vector& u : ws.accepted) {
            CHECK(std::min(angle(u, first), angle(u, mirror)) <= 1e-4);
            CHECK(std::abs(eval_I(pr.forms, u, {a, nu})) <= 1e-8 * u.dot(pr.forms.A * u));
        }
    }

    TEST_CASE("points outside the square are rejected") {
        const auto& pr = unit_interval(16);
        const CurveTracer tr = tracer_for(pr);
        CHECK_THROWS_AS((void)tr.classify_point(pr.decomp.lambda(1), pr.decomp.lambda(2), 2), ConfigError);
    }

    TEST_CASE("sample directions have unit energy and lie in the eigenspace") {
        const auto& pr = two_intervals(16);
        const auto dirs = eigenspace_directions(*pr.data, 3, 64);
        CHECK(dirs.size() == 2);
        for (const auto& y : dirs) CHECK(pr.data->energy_norm(y) == doctest::Approx(1.0));
    }
}

TEST_SUITE("gap condition") {
    TEST_CASE("antisymmetric mode of the symmetric interval") {
        const auto& pr = unit_interval(32);
        const GapResult g = gap_condition(*pr.data, 2);
        CHECK_FALSE(g.nonempty);
        CHECK(g.measure < 1e-4);
        CHECK(g.plus_norm == doctest::Approx(g.minus_norm).epsilon(1e-4));
    }

    TEST_CASE("asymmetric domain has a gap and a Between region") {
        const auto& pr = two_intervals(24);
        const CurveTracer tr = tracer_for(pr);
        int found = 0;
        for (int k = 2; k <= 4; ++k) {
            const GapResult g = gap_condition(*pr.data, k);
            CHECK(g.plus_norm * g.plus_norm + g.minus_norm * g.minus_norm == doctest::Approx(1.0));
            if (!g.nonempty) continue;
            ++found;
            if (g.measure <= 1e-3) continue;
            const double l = pr.decomp.lambda(k);
            const double off = 0.01 * width(pr.decomp, k);
            CHECK(tr.classify_point(l + off, l - off, k).region == Region::Between);
            CHECK(tr.classify_point(l - off, l + off, k).region == Region::Between);
        }
        CHECK(found > 0);
    }
}
