#include "helpers.hpp"

#include "iamcf/errors.hpp"
#include "iamcf/norm.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace iamcf;
using testing::v2;

TEST_CASE("euclidean evaluation, gradient and Hessian")
{
    const auto F = MinkowskiNorm::euclidean(2);
    CHECK(F.eval(v2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(F.eval(v2(0, 0)) == 0.0);
    const Vec g = F.grad(v2(3, 4));
    CHECK(g[0] == doctest::Approx(0.6));
    CHECK(g[1] == doctest::Approx(0.8));
    const Mat H = F.hess(v2(1, 0));
    CHECK(std::abs(H(0, 0)) < 1e-15);
    CHECK(std::abs(H(0, 1)) < 1e-15);
    CHECK(H(1, 1) == doctest::Approx(1.0));
    CHECK(F.polar(v2(3, 4)) == doctest::Approx(5.0));
    const Vec pg = F.polar_grad(v2(0, 2));
    CHECK(std::abs(pg[0]) < 1e-15);
    CHECK(pg[1] == doctest::Approx(1.0));
}

TEST_CASE("ellipsoidal norm against direct quadratic-form oracles")
{
    const Mat A = testing::diag2(4, 1);
    const auto F = MinkowskiNorm::ellipsoidal(A);
    CHECK(F.eval(v2(1, 0)) == doctest::Approx(2.0));
    CHECK(F.polar(v2(1, 0)) == doctest::Approx(0.5));

    std::mt19937_64 rng(11);
    const auto G = MinkowskiNorm::ellipsoidal(testing::tilted());
    const Mat T = testing::tilted();
    const Mat Tinv = T.inverse();
    for (int k = 0; k < 200; ++k) {
        const Vec x = testing::random_vec(rng, 2);
        CHECK(G.eval(x) == doctest::Approx(std::sqrt(x.dot(T * x))).epsilon(1e-13));
        CHECK(G.polar(x) == doctest::Approx(std::sqrt(x.dot(Tinv * x))).epsilon(1e-13));
        const Vec g = G.grad(x);
        const Vec expect = T * x / std::sqrt(x.dot(T * x));
        CHECK((g - expect).norm() < 1e-12);
    }
}

TEST_CASE("gradients match central differences of eval")
{
    std::mt19937_64 rng(12);
    for (const auto& F : testing::builtin_norms()) {
        for (int k = 0; k < 100; ++k) {
            const Vec x = testing::random_vec(rng, 2);
            const Vec g = F.grad(x);
            for (int i = 0; i < 2; ++i) {
                const double e = 1e-6 * x.norm();
                Vec xp = x, xm = x;
                xp[i] += e;
                xm[i] -= e;
                const double fd = (F.eval(xp) - F.eval(xm)) / (2 * e);
                CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
            }
        }
    }
}

TEST_CASE("Hessians match central differences of grad")
{
    std::mt19937_64 rng(13);
    for (const auto& F : testing::builtin_norms()) {
        for (int k = 0; k < 100; ++k) {
            const Vec x = testing::random_vec(rng, 2);
            const Mat H = F.hess(x);
            CHECK(std::abs(H(0, 1) - H(1, 0)) < 1e-12 * (1.0 + H.norm()));
            const double e = 1e-6 * x.norm();
            for (int j = 0; j < 2; ++j) {
                Vec xp = x, xm = x;
                xp[j] += e;
                xm[j] -= e;
                const Vec col = (F.grad(xp) - F.grad(xm)) / (2 * e);
                for (int i = 0; i < 2; ++i)
                    CHECK(std::abs(col[i] - H(i, j)) <= 1e-6 * std::max(1.0, H.norm()));
            }
        }
    }
}

TEST_CASE("identity suite over 1000 random inputs per norm")
{
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> T(1e-3, 10.0);
    for (const auto& F : testing::builtin_norms()) {
        CAPTURE(F.describe());
        double euler = 0, polar1 = 0, polar2 = 0, homog = 0, hxi = 0, sym = 0;
        for (int k = 0; k < 1000; ++k) {
            const Vec x = testing::random_vec(rng, 2);
            const double t = T(rng);
            const double f = F.eval(x);
            euler = std::max(euler, std::abs(F.grad(x).dot(x) - f) / f);
            homog = std::max(homog, std::abs(F.eval(t * x) - t * f) / (t * f));
            sym = std::max(sym, std::abs(F.eval(-x) - f) / f);
            hxi = std::max(hxi, (F.hess(x) * x).norm());
            const Vec pg = F.polar_grad(x);
            polar1 = std::max(polar1, std::abs(F.eval(pg) - 1.0));
            polar2 = std::max(polar2, (F.polar(x) * F.grad(pg) - x).norm() / x.norm());
        }
        CHECK(euler <= 1e-8);
        CHECK(homog <= 1e-12);
        CHECK(sym <= 1e-14);
        CHECK(hxi <= 1e-8);
        CHECK(polar1 <= 1e-8);
        CHECK(polar2 <= 1e-8);
    }
}

TEST_CASE("numeric polar agrees with the closed form")
{
    const auto exact = MinkowskiNorm::ellipsoidal(testing::tilted());
    const auto numeric = exact.with_polar_mode(PolarMode::numeric_sup);
    std::mt19937_64 rng(15);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Vec x = testing::random_vec(rng, 2);
        worst = std::max(worst, std::abs(numeric.polar(x) - exact.polar(x)) / exact.polar(x));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("convexity and ellipticity")
{
    std::mt19937_64 rng(16);
    for (const auto& F : testing::builtin_norms()) {
        for (int k = 0; k < 500; ++k) {
            const Vec a = testing::random_vec(rng, 2), b = testing::random_vec(rng, 2);
            CHECK(F.eval(0.5 * (a + b)) <= 0.5 * (F.eval(a) + F.eval(b)) + 1e-12);
        }
        CHECK(F.ellipticity_constant() > 0.0);
    }
    // Without smoothing the l4 norm degenerates on the axes.
    const auto raw = MinkowskiNorm::lq(2, 4.0, 0.0);
    CHECK(raw.ellipticity_constant() < 1e-3);
}

TEST_CASE("three-dimensional norms")
{
    std::mt19937_64 rng(17);
    Mat A(3, 3);
    A << 2, 0.3, 0, 0.3, 1, 0.2, 0, 0.2, 1.5;
    for (const auto& F : {MinkowskiNorm::euclidean(3), MinkowskiNorm::ellipsoidal(A), MinkowskiNorm::lq(3, 3.0)}) {
        for (int k = 0; k < 50; ++k) {
            const Vec x = testing::random_vec(rng, 3);
            CHECK(std::abs(F.grad(x).dot(x) - F.eval(x)) <= 1e-10 * F.eval(x));
            const Vec pg = F.polar_grad(x);
            CHECK(std::abs(F.eval(pg) - 1.0) <= 1e-6);
        }
    }
}

TEST_CASE("custom norms fall back to differenced Hessians")
{
    CustomNormFunctions fns;
    const Mat A = testing::tilted();
    fns.eval = [A](const Vec& x) { return std::sqrt(x.dot(A * x)); };
    fns.grad = [A](const Vec& x) -> Vec { return A * x / std::sqrt(x.dot(A * x)); };
    const auto C = MinkowskiNorm::custom(2, fns, "tilted");
    const auto E = MinkowskiNorm::ellipsoidal(A);
    std::mt19937_64 rng(18);
    for (int k = 0; k < 20; ++k) {
        const Vec x = testing::random_vec(rng, 2);
        CHECK((C.hess(x) - E.hess(x)).norm() <= 1e-5 * E.hess(x).norm());
        CHECK(C.polar(x) == doctest::Approx(E.polar(x)).epsilon(1e-4));
    }
}

TEST_CASE("errors")
{
    const auto F = MinkowskiNorm::euclidean(2);
    CHECK_THROWS_AS(F.grad(v2(0, 0)), DegenerateGradient);
    CHECK_THROWS_AS(F.hess(v2(1e-15, 0)), DegenerateGradient);
    Vec three(3);
    three << 1, 2, 3;
    CHECK_THROWS_AS(F.eval(three), DimensionMismatch);
    CHECK_THROWS_AS(MinkowskiNorm::ellipsoidal(testing::diag2(1, -1)), Error);
    CHECK_THROWS_AS(MinkowskiNorm::lq(2, 4.0).with_polar_mode(PolarMode::closed_form), Error);
    CHECK_THROWS_AS(MinkowskiNorm::lq(2, 1.0), Error);
}
