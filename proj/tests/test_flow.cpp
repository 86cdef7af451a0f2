#include "helpers.hpp"

#include "iamcf/errors.hpp"
#include "iamcf/flow.hpp"

#include <doctest.h>

#include <numbers>

using namespace iamcf;

namespace {

GridDomain disk_domain(const MinkowskiNorm& F, int cells)
{
    return GridDomain(Lattice::square(cells, -8, 8), Obstacle::wulff(WulffShape(F, Vec::Zero(2), 1.0)));
}

/// (n - 1) log(F° / r) with r = 1, the p -> 1 limit for a Wulff obstacle.
ScalarField limit_field(const MinkowskiNorm& F, const Lattice& L)
{
    return sample(L, FieldMeaning::u_limit, [&](const Vec& x) { return std::log(std::max(F.polar(x), 1e-12)); });
}

} // namespace

TEST_CASE("sublevel sets of the exact limit")
{
    for (const auto& F : testing::builtin_norms()) {
        CAPTURE(F.describe());
        const GridDomain d = disk_domain(F, 128);
        const ScalarField u = limit_field(F, d.lattice());
        for (double t : {0.0, 0.5, 1.0}) {
            const FlowSnapshot s = extract_sublevel(F, u, t);
            REQUIRE(s.closed);
            for (const P2& x : s.contour.vertices) CHECK(std::abs(F.polar(Vec(x)) - std::exp(t)) <= d.h());
        }
        CHECK(extract_sublevel(F, u, -50.0).contour.empty());
        CHECK(extract_sublevel(F, u, 50.0).contour.empty());
    }
}

TEST_CASE("nesting")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = disk_domain(E, 96);
    const ScalarField u = limit_field(E, d.lattice());
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> U(0.0, 1.5);
    for (int k = 0; k < 20; ++k) {
        double a = U(rng), b = U(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 0.05) continue;
        const NestingReport r = nesting_check(u, a, b);
        CHECK(r.pass);
        CHECK(r.max_value < b);
    }
}

TEST_CASE("exponential area growth on the exact limit")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = disk_domain(E, 256);
    const ScalarField u = limit_field(E, d.lattice());
    const GrowthSeries g = area_growth_series(E, d, u, {0.0, 0.5, 1.0, 1.5});
    CHECK(g.hypothesis_verified);
    CHECK(g.sigma0 == doctest::Approx(2 * std::numbers::pi).epsilon(1e-4));
    for (const GrowthRow& r : g.rows) {
        CAPTURE(r.t);
        CHECK(r.closed);
        CHECK(r.predicted == doctest::Approx(2 * std::numbers::pi * std::exp(r.t)).epsilon(1e-4));
        CHECK(std::abs(r.ratio_contour - 1.0) <= 0.01);
        if (r.t > 0.0) CHECK(std::abs(r.ratio_coarea - 1.0) <= 0.05);
    }
}

TEST_CASE("weak curvature residual")
{
    for (const auto& F : testing::builtin_norms()) {
        CAPTURE(F.describe());
        const GridDomain d = disk_domain(F, 256);
        const ScalarField u = limit_field(F, d.lattice());
        const CurvatureResidual c = weak_curvature_residual(F, u, 1.0, &d);
        CHECK(c.vertices > 0);
        CHECK(c.masked == 0);
        CHECK(c.mean_rel <= 0.02);
    }
    const Lattice L = Lattice::square(32, -2, 2);
    const auto E = MinkowskiNorm::euclidean(2);
    const ScalarField affine = sample(L, FieldMeaning::generic, [](const Vec& x) { return x[0]; });
    CHECK_THROWS_AS(weak_curvature_residual(E, affine, 0.3), Error); // open contour
    CHECK_THROWS_AS(weak_curvature_residual(E, limit_field(E, L), 9.0), Error); // empty contour
}

TEST_CASE("J functional")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const Lattice L = Lattice::square(512, -4, 4);
    const ScalarField u = limit_field(E, L);
    std::vector<std::uint8_t> K(L.size(), 0);
    for (std::size_t k = 0; k < L.size(); ++k) {
        const double r = L.position(k).norm();
        K[k] = r >= 1.5 && r <= 3.0;
    }
    // integral over the annulus of |grad u| (1 + u) = 2 pi [rho log rho] from 1.5 to 3
    const double oracle = 2 * std::numbers::pi * (3 * std::log(3.0) - 1.5 * std::log(1.5));
    CHECK(J_functional(E, u, u, K) == doctest::Approx(oracle).epsilon(0.005));

    const ScalarField zero(L, FieldMeaning::generic, 0.0);
    CHECK(J_functional(E, zero, zero, K) == 0.0);

    ScalarField bad = u;
    bad[L.index(10, 10)] += 1.0; // outside K
    CHECK_THROWS_AS(J_functional(E, u, bad, K), Error);
    ScalarField inside = u;
    inside[L.index(256 + 128, 256)] += 0.1; // radius 2
    CHECK_NOTHROW(J_functional(E, u, inside, K));
}

TEST_CASE("minimality spot check")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = disk_domain(E, 128);
    const ScalarField u = limit_field(E, d.lattice());

    MinimalityConfig zero;
    zero.trials = 10;
    zero.amplitude = 0.0;
    const MinimalityReport z = minimality_spot_check(E, d, u, zero);
    CHECK(z.pass);
    CHECK(std::abs(z.worst_margin) <= 1e-12);

    const MinimalityConfig cfg;
    const MinimalityReport a = minimality_spot_check(E, d, u, cfg);
    const MinimalityReport b = minimality_spot_check(E, d, u, cfg);
    CHECK(a.pass);
    CHECK(a.failures == 0);
    CHECK(a.trials.size() == 200);
    for (std::size_t k = 0; k < a.trials.size(); ++k) {
        CHECK(a.trials[k].seed == cfg.seed + k);
        CHECK(a.trials[k].J_phi == b.trials[k].J_phi);
    }

    // A bump on a level set that is far from minimising must be caught.
    const P2 xc(2.0, 0.0);
    const ScalarField broken = sample(d.lattice(), FieldMeaning::generic, [&](const Vec& x) {
        return u.interpolate(x) + 2.0 * std::exp(-(P2(x[0], x[1]) - xc).squaredNorm() / 0.3);
    });
    CHECK(minimality_spot_check(E, d, broken, cfg).failures > 0);
}

TEST_CASE("properness proxy")
{
    const auto E = MinkowskiNorm::euclidean(2);
    const GridDomain d = disk_domain(E, 64);
    CHECK(properness_proxy(E, d, limit_field(E, d.lattice())).pass);
    const ScalarField flat(d.lattice(), FieldMeaning::generic, 0.0);
    CHECK_FALSE(properness_proxy(E, d, flat).pass);
}
