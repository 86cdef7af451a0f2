#include "helpers.hpp"

#include "iamcf/errors.hpp"
#include "iamcf/flow.hpp"
#include "iamcf/solver.hpp"

#include <doctest.h>

#include <numbers>

using namespace iamcf;
using testing::v2;

namespace {

GridDomain wulff_domain(const MinkowskiNorm& F, int cells, double r = 1.0)
{
    return GridDomain(Lattice::square(cells, -8, 8), Obstacle::wulff(WulffShape(F, Vec::Zero(2), r)));
}

SolverConfig config(double p)
{
    SolverConfig c;
    c.p = p;
    return c;
}

/// max |v - v_exact| / v_exact over free nodes, v_exact = (r / F°)^alpha.
double relative_error(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& v, double p, double r = 1.0)
{
    const double a = barrier_exponent(2, p);
    double e = 0.0;
    for (int k : d.free_nodes()) {
        const double ex = std::pow(r / F.polar(d.lattice().position(k)), a);
        e = std::max(e, std::abs(v[k] - ex) / ex);
    }
    return e;
}

} // namespace

TEST_CASE("barrier exponent")
{
    CHECK(barrier_exponent(2, 1.5) == doctest::Approx(1.0));
    CHECK(barrier_exponent(2, 1.2) == doctest::Approx(4.0));
    CHECK(barrier_exponent(3, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("admissible p range")
{
    CHECK_THROWS_AS(validate(config(2.0), 2), ConfigError);
    CHECK_THROWS_AS(validate(config(2.5), 2), ConfigError);
    CHECK_THROWS_AS(validate(config(1.0), 2), ConfigError);
    CHECK_THROWS_AS(validate(config(1.005), 2), ConfigError);
    CHECK_THROWS_AS(validate(config(1.95), 2), ConfigError);
    SolverConfig relaxed = config(1.005);
    relaxed.allow_small_p = true;
    CHECK_NOTHROW(validate(relaxed, 2));
    SolverConfig sched = config(1.5);
    sched.schedule = {1.5, 1.5};
    CHECK_THROWS_AS(validate(sched, 2), ConfigError);
    try {
        validate(config(2.0), 2);
    } catch (const ConfigError& e) {
        CHECK(e.where() == "/solver/p");
    }
}

TEST_CASE("exact solution on a Euclidean disk")
{
    const auto E = MinkowskiNorm::euclidean(2);
    double previous = 0.0;
    for (int cells : {64, 128}) {
        const GridDomain d = wulff_domain(E, cells);
        const SolveReport rep = solve_vp(E, d, config(1.5));
        REQUIRE(rep.converged);
        CHECK(rep.energy_monotone);
        CHECK(rep.max_principle_ok);
        CHECK(rep.barrier.pass);
        const double err = relative_error(E, d, rep.field, 1.5);
        MESSAGE("cells=" << cells << " relative error " << err);
        if (previous > 0.0) CHECK(err <= 0.6 * previous);
        previous = err;
    }
}

TEST_CASE("anisotropic exact solution")
{
    const auto F = MinkowskiNorm::ellipsoidal(testing::tilted());
    const GridDomain d = wulff_domain(F, 96, 0.8);
    const SolveReport rep = solve_vp(F, d, config(1.5));
    REQUIRE(rep.converged);
    CHECK(rep.barrier.pass);
    CHECK(relative_error(F, d, rep.field, 1.5, 0.8) <= 0.02);
}

TEST_CASE("warm and cold starts agree")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = wulff_domain(E, 64);
    const SolveReport warm_src = solve_vp(E, d, config(1.5));
    const SolveReport cold = solve_vp(E, d, config(1.3));
    const SolveReport warm = solve_vp(E, d, config(1.3), &warm_src.field);
    REQUIRE(cold.converged);
    REQUIRE(warm.converged);
    double diff = 0.0;
    for (std::size_t k = 0; k < d.node_count(); ++k) diff = std::max(diff, std::abs(cold.field[k] - warm.field[k]));
    CHECK(diff <= 1e-6);
}

TEST_CASE("comparison principle between outer boundary values")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = wulff_domain(E, 48);
    for (double p : {1.3, 1.6}) {
        SolverConfig lo = config(p), hi = config(p);
        lo.outer_bc = OuterBC::zero;
        hi.outer_bc = OuterBC::barrier_value;
        const SolveReport a = solve_vp(E, d, lo), b = solve_vp(E, d, hi);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        double worst = -1.0;
        for (std::size_t k = 0; k < d.node_count(); ++k) worst = std::max(worst, a.field[k] - b.field[k]);
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("log and exp transforms")
{
    const Lattice L = Lattice::square(8, -1, 1);
    ScalarField v(L, FieldMeaning::v_p, 1.0);
    const ScalarField u0 = log_transform(v, 1.4);
    for (double x : u0.values) CHECK(x == 0.0);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(1e-6, 1.0);
    for (double& x : v.values) x = U(rng);
    const ScalarField back = exp_transform(log_transform(v, 1.4), 1.4);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(back[k] - v[k]) <= 1e-12 * v[k] + 1e-300);
    v[L.index(3, 5)] = 0.0;
    CHECK_THROWS_WITH_AS(log_transform(v, 1.4), doctest::Contains("(i=3, j=5)"), SolverError);
}

TEST_CASE("Q_p residual")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = wulff_domain(E, 64);
    const double c = 0.7;
    const ScalarField affine =
        sample(d.lattice(), FieldMeaning::u_p, [&](const Vec& x) { return c * (0.6 * x[0] + 0.8 * x[1]); });
    const MaskedField q = residual_Qp(E, d, affine, 1.3);
    std::size_t valid = 0;
    for (std::size_t k = 0; k < q.values.size(); ++k)
        if (q.valid[k]) {
            ++valid;
            CHECK(q.values[k] == doctest::Approx(-std::pow(c, 1.3)).epsilon(1e-9));
        }
    CHECK(valid > 0);

    // Exact u_p: the annulus residual falls as the grid is refined.
    const double p = 1.3;
    double prev = 0.0;
    for (int cells : {64, 128}) {
        const GridDomain g = wulff_domain(E, cells);
        const ScalarField u = sample(g.lattice(), FieldMeaning::u_p,
                                     [&](const Vec& x) { return (2 - p) * std::log(std::max(x.norm(), 1e-12)); });
        const MaskedField r = residual_Qp(E, g, u, p);
        const auto ann = annulus_mask(E, g);
        double worst = 0.0;
        for (std::size_t k = 0; k < r.values.size(); ++k)
            if (ann[k] && r.valid[k]) worst = std::max(worst, std::abs(r.values[k]));
        if (prev > 0.0) CHECK(worst <= 0.6 * prev);
        prev = worst;
    }
}

TEST_CASE("gradient bounds on the exact solution")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = wulff_domain(E, 128);
    const double p = 1.1;
    const ScalarField u = sample(d.lattice(), FieldMeaning::u_p,
                                 [&](const Vec& x) { return (2 - p) * std::log(std::max(x.norm(), 1e-12)); });
    const GradientBoundReport g = check_gradient_bounds(E, d, u, p, 1.0);
    CHECK(g.estapp_bound == doctest::Approx(0.9));
    CHECK(g.hf_plus == doctest::Approx(1.0));
    CHECK(g.sup_all == doctest::Approx(0.9).epsilon(0.05));
    CHECK(g.sup_boundary <= 1.0);
    CHECK(g.curvature_excess == 0.0);
}

TEST_CASE("Wulff inradius")
{
    const auto E = MinkowskiNorm::euclidean(2);
    CHECK(wulff_inradius(E, wulff_domain(E, 64, 1.25)) == doctest::Approx(1.25).epsilon(1e-6));
    const auto F = MinkowskiNorm::ellipsoidal(testing::tilted());
    CHECK(wulff_inradius(F, wulff_domain(F, 64, 0.9)) == doctest::Approx(0.9).epsilon(1e-6));

    // Square of side 2 against a brute-force rolling-ball search.
    const GridDomain sq(Lattice::square(64, -8, 8), Obstacle::polygon({P2(-1, -1), P2(1, -1), P2(1, 1), P2(-1, 1)}));
    const double spacing = 0.5 * sq.h();
    std::vector<P2> pts, nrm;
    sq.obstacle().boundary_samples(spacing, pts, nrm);
    double oracle = 1e300;
    for (std::size_t s = 0; s < pts.size(); ++s) {
        double best = 0.0;
        for (double rho = 1e-4; rho <= 1.2; rho += 1e-4) {
            const P2 c = pts[s] - rho * nrm[s];
            bool inside = true;
            for (int a = 0; a < 720 && inside; ++a) {
                const double th = a * std::numbers::pi / 360;
                const P2 q = c + rho * P2(std::cos(th), std::sin(th));
                inside = std::abs(q.x()) <= 1 + 1e-12 && std::abs(q.y()) <= 1 + 1e-12;
            }
            if (!inside) break;
            best = rho;
        }
        oracle = std::min(oracle, best);
    }
    CHECK(wulff_inradius(E, sq, spacing) == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("continuation towards p = 1")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = wulff_domain(E, 64);
    SolverConfig c = config(1.5);
    c.schedule = {1.5, 1.3, 1.2, 1.1};
    const ContinuationResult res = continuation_solve(E, d, c);
    REQUIRE(res.complete);
    REQUIRE(res.u_fields.size() == 4);
    const auto ann = annulus_mask(E, d);
    double prev = 1e300;
    for (const ScalarField& u : res.u_fields) {
        double err = 0.0;
        for (std::size_t k = 0; k < ann.size(); ++k)
            if (ann[k]) err = std::max(err, std::abs(u[k] - std::log(d.lattice().position(k).norm())));
        CHECK(err < prev);
        prev = err;
    }
    for (double x : res.cauchy) CHECK(std::isfinite(x));

    // A single-entry schedule is the plain solve.
    SolverConfig one = config(1.4);
    one.schedule = {1.4};
    const ContinuationResult single = continuation_solve(E, d, one);
    const SolveReport direct = solve_vp(E, d, config(1.4));
    REQUIRE(single.complete);
    CHECK(single.reports[0].field.values == direct.field.values);
}

TEST_CASE("far-field decay proxy")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = wulff_domain(E, 64);
    const SolveReport rep = solve_vp(E, d, config(1.5));
    CHECK(decay_proxy(E, d, rep.field).pass);
}
