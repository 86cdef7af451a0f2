// Acceptance harness. Prints one line per criterion:
//   criterion=<k> name=<name> status=PASS|FAIL value=<v> tol=<t>
// followed by indented info lines. Exits nonzero when any criterion fails.

#include "iamcf/contour.hpp"
#include "iamcf/domain.hpp"
#include "iamcf/flow.hpp"
#include "iamcf/kernels.hpp"
#include "iamcf/norm.hpp"
#include "iamcf/run.hpp"
#include "iamcf/solver.hpp"
#include "iamcf/wulff.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace iamcf;

namespace {

constexpr int kRes = 256;
constexpr double kLo = -8.0, kHi = 8.0;

int failures = 0;

void report(int k, const std::string& name, bool pass, double value, double tol)
{
    std::printf("criterion=%d name=%s status=%s value=%.6g tol=%.6g\n", k, name.c_str(), pass ? "PASS" : "FAIL",
                value, tol);
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class... A>
void info(const char* fmt, A... args)
{
    std::printf("    ");
    if constexpr (sizeof...(A) == 0)
        std::fputs(fmt, stdout);
    else
        std::printf(fmt, args...);
    std::printf("\n");
}

Vec v2(double x, double y)
{
    Vec v(2);
    v << x, y;
    return v;
}

Vec as_vec(const P2& p)
{
    return v2(p.x(), p.y());
}

Mat tilted()
{
    Mat A(2, 2);
    A << 3.0, 0.8, 0.8, 1.5;
    return A;
}

std::vector<std::pair<std::string, MinkowskiNorm>> builtin_norms()
{
    return {{"euclidean", MinkowskiNorm::euclidean(2)},
            {"ellipsoidal", MinkowskiNorm::ellipsoidal(tilted())},
            {"smoothed_l4", MinkowskiNorm::lq(2, 4.0, 0.05)}};
}

Obstacle square_obstacle()
{
    return Obstacle::polygon({P2(-1, -1), P2(1, -1), P2(1, 1), P2(-1, 1)});
}

SolverConfig schedule(std::vector<double> ps)
{
    SolverConfig c;
    c.p = ps.front();
    c.schedule = std::move(ps);
    c.outer_bc = OuterBC::barrier_value;
    return c;
}

double max_over(const std::vector<std::uint8_t>& mask, const std::function<double(std::size_t)>& f)
{
    double m = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) m = std::max(m, f(k));
    return m;
}

std::size_t index_of(const std::vector<double>& ps, double p)
{
    for (std::size_t k = 0; k < ps.size(); ++k)
        if (std::abs(ps[k] - p) < 1e-12) return k;
    throw std::logic_error("p not in schedule");
}

// ---------------------------------------------------------------------------

void norm_identities()
{
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> U(-3.0, 3.0), T(1e-3, 10.0);
    double worst = 0.0;
    for (const auto& [name, F] : builtin_norms()) {
        double euler = 0, p1 = 0, p2 = 0, homog = 0, hxi = 0;
        for (int k = 0; k < 1000; ++k) {
            Vec x = v2(U(rng), U(rng));
            if (x.norm() < 1e-3) x = v2(1.0, 0.5);
            const double t = T(rng);
            const double f = F.eval(x);
            euler = std::max(euler, std::abs(F.grad(x).dot(x) - f) / f);
            homog = std::max(homog, std::abs(F.eval(t * x) - t * f) / (t * f));
            hxi = std::max(hxi, (F.hess(x) * x).norm() / x.norm());
            const Vec pg = F.polar_grad(x);
            p1 = std::max(p1, std::abs(F.eval(pg) - 1.0));
            p2 = std::max(p2, (F.polar(x) * F.grad(pg) - x).norm() / x.norm());
        }
        info("%s: euler %.2e polar_unit %.2e polar_inverse %.2e homogeneity %.2e hess_xi %.2e", name.c_str(), euler,
             p1, p2, homog, hxi);
        worst = std::max({worst, euler, p1, p2, homog, hxi});
    }
    report(1, "norm_identities", worst <= 1e-8, worst, 1e-8);
}

void wulff_curvature_oracle()
{
    const Lattice L = Lattice::square(kRes, kLo, kHi);
    double worst = 0.0;
    for (const auto& [name, F] : builtin_norms()) {
        const ScalarField u = sample(L, FieldMeaning::generic, [&](const Vec& x) { return F.polar(x); });
        const MaskedField hf = level_set_HF_field(F, u);
        double e = 0.0, at = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < L.size(); ++k) {
            if (u[k] < 4 * L.h || !hf.valid[k]) continue;
            ++n;
            const double r = std::abs(hf.values[k] * u[k] - 1.0);
            if (r > e) {
                e = r;
                at = u[k];
            }
        }
        info("%s: max relative error %.4g (at F° = %.3f) over %zu nodes", name.c_str(), e, at, n);
        worst = std::max(worst, e);
    }
    report(2, "wulff_curvature_oracle", worst <= 0.02, worst, 0.02);
}

double relative_linf(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& v, double p, double r)
{
    const double a = barrier_exponent(2, p);
    double e = 0.0;
    for (int k : d.free_nodes()) {
        const double ex = std::pow(r / F.polar(as_vec(d.lattice_position(k))), a);
        e = std::max(e, std::abs(v[k] - ex) / ex);
    }
    return e;
}

struct WulffRun {
    MinkowskiNorm F = MinkowskiNorm::euclidean(2);
    GridDomain d;
    std::vector<double> ps{1.5, 1.3, 1.2, 1.1, 1.05};
    ContinuationResult cont;
    double R = 1.0;

    WulffRun()
        : d(Lattice::square(kRes, kLo, kHi), Obstacle::wulff(WulffShape(F, Vec::Zero(2), 1.0)))
    {
        cont = continuation_solve(F, d, schedule(ps));
        R = wulff_inradius(F, d);
    }
    const ScalarField& u(double p) const { return cont.u_fields.at(index_of(ps, p)); }
    const SolveReport& rep(double p) const { return cont.reports.at(index_of(ps, p)); }
};

void exact_solution(const WulffRun& w)
{
    const GridDomain coarse(Lattice::square(kRes / 2, kLo, kHi),
                            Obstacle::wulff(WulffShape(w.F, Vec::Zero(2), 1.0)));
    const ContinuationResult c = continuation_solve(w.F, coarse, schedule({1.5, 1.3, 1.2}));
    const double e_coarse = relative_linf(w.F, coarse, c.reports.back().field, 1.2, 1.0);
    const double e_fine = relative_linf(w.F, w.d, w.rep(1.2).field, 1.2, 1.0);
    const double ratio = e_coarse / e_fine;
    info("p = 1.2: relative Linf error %.4g at %d cells, %.4g at %d cells (ratio %.3f, need >= 2)", e_fine, kRes,
         e_coarse, kRes / 2, ratio);
    info("converged: %s / %s", w.rep(1.2).converged ? "yes" : "no", c.reports.back().converged ? "yes" : "no");
    report(3, "exact_capacitary_solution", c.complete && w.cont.complete && e_fine <= 0.01 && ratio >= 2.0, e_fine,
           0.01);
}

struct SquareRun {
    std::string name;
    MinkowskiNorm F;
    GridDomain d;
    ContinuationResult cont;
};

std::vector<SquareRun> square_runs()
{
    std::vector<SquareRun> out;
    for (const auto& [name, F] : builtin_norms()) {
        if (name == "smoothed_l4") continue;
        GridDomain d(Lattice::square(kRes, kLo, kHi), square_obstacle());
        ContinuationResult c = continuation_solve(F, d, schedule({1.5, 1.3, 1.2}));
        out.push_back({name, F, std::move(d), std::move(c)});
    }
    return out;
}

void barrier_sandwich(const std::vector<SquareRun>& runs)
{
    bool pass = true;
    double worst = 0.0;
    for (const SquareRun& s : runs) {
        const SolveReport& r = s.cont.reports.back();
        const BarrierReport& b = r.barrier;
        const double v = std::max(b.lower_violation, b.upper_violation) / b.slack;
        info("%s square, p = 1.2: lower violation %.3g, upper violation %.3g, slack 3h Lip = %.3g, converged %s",
             s.name.c_str(), b.lower_violation, b.upper_violation, b.slack, r.converged ? "yes" : "no");
        pass = pass && b.pass && r.converged;
        worst = std::max(worst, v);
    }
    report(4, "barrier_sandwich_square", pass && worst <= 1.0, worst, 1.0);
}

void interior_max_principle(const WulffRun& w)
{
    double worst = 0.0;
    for (double p : {1.3, 1.1, 1.05}) {
        const GradientBoundReport g = check_gradient_bounds(w.F, w.d, w.u(p), p, w.R);
        const double excess = (g.sup_all - g.sup_boundary) / g.sup_boundary;
        info("p = %.2f: sup over the closure %.5f, sup on the boundary layer %.5f, excess %.3g", p, g.sup_all,
             g.sup_boundary, excess);
        worst = std::max(worst, excess);
    }
    report(5, "interior_max_principle", worst <= 0.02, worst, 0.02);
}

void inradius_bound(const WulffRun& w, const std::vector<SquareRun>& squares)
{
    double worst = 0.0;
    for (double p : {1.3, 1.1, 1.05}) {
        const GradientBoundReport g = check_gradient_bounds(w.F, w.d, w.u(p), p, w.R);
        info("Wulff, p = %.2f: max F(grad u) %.5f, (n-p)/R %.5f with R = %.5f", p, g.sup_all, g.estapp_bound, w.R);
        worst = std::max(worst, g.sup_all / g.estapp_bound);
    }
    for (const SquareRun& s : squares) {
        const double R = wulff_inradius(s.F, s.d);
        const GradientBoundReport g = check_gradient_bounds(s.F, s.d, s.cont.u_fields.back(), 1.2, R);
        info("%s square, p = 1.2: max F(grad u) %.5f, (n-p)/R %.5g with sampled R = %.4g", s.name.c_str(),
             g.sup_all, g.estapp_bound, R);
        worst = std::max(worst, g.sup_all / g.estapp_bound);
    }
    report(6, "inradius_bound", worst <= 1.10, worst, 1.10);
}

void boundary_curvature(const WulffRun& w)
{
    const double hf = 1.0; // (n - 1) / r
    std::vector<double> eps;
    for (double p : {1.3, 1.1, 1.05}) {
        const GradientBoundReport g = check_gradient_bounds(w.F, w.d, w.u(p), p, w.R);
        eps.push_back(std::max(0.0, g.sup_boundary - hf));
        info("p = %.2f: boundary sup F(grad u) %.5f, H_F+ %.3f, eps_p %.4g", p, g.sup_boundary, hf, eps.back());
    }
    bool nonincreasing = true;
    for (std::size_t k = 1; k < eps.size(); ++k) nonincreasing = nonincreasing && eps[k] <= eps[k - 1];
    report(7, "boundary_curvature_bound", nonincreasing && eps.back() <= 0.1 * hf, eps.back(), 0.1 * hf);
}

void area_growth(const WulffRun& w, const ScalarField& limit)
{
    const std::vector<double> times{0.25, 0.5, 1.0, 1.5};
    const GrowthSeries g = area_growth_series(w.F, w.d, w.u(1.05), times);
    double contour = 0.0, coarea = 0.0;
    bool closed = true;
    for (const GrowthRow& r : g.rows) {
        contour = std::max(contour, std::abs(r.ratio_contour - 1.0));
        coarea = std::max(coarea, std::abs(r.ratio_coarea - 1.0));
        closed = closed && r.closed;
        info("u_1.05, t = %.2f: contour ratio %.5f, co-area ratio %.5f", r.t, r.ratio_contour, r.ratio_coarea);
    }
    const GrowthSeries gl = area_growth_series(w.F, w.d, limit, times);
    for (const GrowthRow& r : gl.rows)
        info("extrapolated p -> 1 limit, t = %.2f: contour ratio %.5f, co-area ratio %.5f", r.t, r.ratio_contour,
             r.ratio_coarea);
    info("co-area deviation %.4g against 2 x tol = %.2f", coarea, 0.10);
    report(8, "exponential_area_growth", closed && contour <= 0.05 && coarea <= 0.10, contour, 0.05);
}

void weak_curvature(const WulffRun& w, const ScalarField& limit)
{
    double mean = 0.0, masked = 0.0;
    for (double t : {0.25, 0.5, 1.0, 1.5}) {
        const CurvatureResidual c = weak_curvature_residual(w.F, limit, t, &w.d);
        info("t = %.2f: mean relative %.4g, max relative %.4g, masked %zu of %zu", t, c.mean_rel, c.max_rel,
             c.masked, c.vertices);
        mean = std::max(mean, c.mean_rel);
        masked = std::max(masked, c.masked_fraction);
    }
    info("worst masked fraction %.4g against 0.01", masked);
    report(9, "weak_curvature_identity", mean <= 0.05 && masked <= 0.01, mean, 0.05);
}

void minimality(const WulffRun& w)
{
    const ScalarField u = sample(w.d.lattice(), FieldMeaning::u_limit,
                                 [&](const Vec& x) { return std::log(std::max(w.F.polar(x), 1e-300)); });
    const MinimalityConfig cfg; // 200 trials, seed 20240611, C = 2
    const MinimalityReport rep = minimality_spot_check(w.F, w.d, u, cfg);
    ScalarField broken = u;
    const P2 xc(2.0, 0.0);
    for (int k : w.d.free_nodes())
        broken[k] += 2.0 * std::exp(-(w.d.lattice_position(k) - xc).squaredNorm() / 0.3);
    const MinimalityReport neg = minimality_spot_check(w.F, w.d, broken, cfg);
    info("exact u: %zu trials, seed %llu, C = %.1f, failures %d, worst margin %.4g, worst margin / (h|K|) %.4g",
         rep.trials.size(), static_cast<unsigned long long>(cfg.seed), cfg.C, rep.failures, rep.worst_margin,
         rep.worst_scaled_margin);
    info("negative control: failures %d, worst margin / (h|K|) %.4g", neg.failures, neg.worst_scaled_margin);
    report(10, "J_minimality", rep.failures == 0 && rep.trials.size() == 200 && neg.failures > 0,
           rep.worst_scaled_margin, -cfg.C);
}

void first_variation()
{
    double dil = 0.0, bump = 0.0;
    std::mt19937_64 rng(1011);
    const Lattice L = Lattice::square(512, -3.0, 3.0);
    for (const auto& [name, F] : builtin_norms()) {
        Contour c = sample_wulff_boundary(WulffShape(F, Vec::Zero(2), 1.0), 1024);
        const double sigma = sigma_F(F, c);
        const FirstVariation d = first_variation_check(F, c, [](const P2& x) { return x; }, 1e-3);
        const double e = std::abs(d.lhs - sigma) / sigma;
        dil = std::max(dil, e);

        const ScalarField u = sample(L, FieldMeaning::generic, [&](const Vec& x) { return F.polar(x); });
        attach_HF(c, level_set_HF_field(F, u), L);
        std::uniform_int_distribution<std::size_t> pick(0, c.vertices.size() - 1);
        std::uniform_real_distribution<double> width(0.2, 0.6), ang(0.0, 2 * std::numbers::pi);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const P2 centre = c.vertices[pick(rng)];
            const double w = width(rng), a = ang(rng);
            const P2 dir(std::cos(a), std::sin(a));
            const auto V = [&](const P2& x) {
                const double s = (x - centre).norm() / w;
                if (s >= 1.0) return P2(0.0, 0.0);
                const double b = std::cos(0.5 * std::numbers::pi * s);
                return P2(b * b * dir);
            };
            const FirstVariation r = first_variation_check(F, c, V, 1e-3);
            worst = std::max(worst, std::abs(r.lhs - r.rhs) / std::max(std::abs(r.lhs), std::abs(r.rhs)));
        }
        info("%s: dilation lhs %.6f vs sigma_F %.6f (rel %.3g); bump fields worst rel %.3g", name.c_str(), d.lhs,
             sigma, e, worst);
        bump = std::max(bump, worst);
    }
    info("worst bump disagreement %.4g against 0.02", bump);
    report(11, "first_variation", dil <= 0.01 && bump <= 0.02, dil, 0.01);
}

void p_convergence(const WulffRun& w, const ScalarField& limit)
{
    const std::vector<std::uint8_t> ann = annulus_mask(w.F, w.d);
    const auto ref = [&](std::size_t k) { return std::log(w.F.polar(as_vec(w.d.lattice_position(k)))); };
    const double scale = max_over(ann, [&](std::size_t k) { return std::abs(ref(k)); });
    std::vector<double> err;
    for (std::size_t s = 0; s < w.ps.size(); ++s) {
        const ScalarField& u = w.cont.u_fields[s];
        err.push_back(max_over(ann, [&](std::size_t k) { return std::abs(u[k] - ref(k)); }) / scale);
        info("p = %.2f: relative annulus error %.5f", w.ps[s], err.back());
    }
    const double lim = max_over(ann, [&](std::size_t k) { return std::abs(limit[k] - ref(k)); }) / scale;
    info("extrapolated p -> 1 limit: relative annulus error %.5f", lim);
    bool monotone = true;
    for (std::size_t k = 1; k < err.size(); ++k) monotone = monotone && err[k] < err[k - 1];
    info("monotone decreasing: %s", monotone ? "yes" : "no");
    report(12, "p_to_1_convergence", monotone && err.back() <= 0.05, err.back(), 0.05);
}

/// E(a) - E(b) accumulated triangle by triangle.
double energy_difference(const MinkowskiNorm& F, const Mesh& M, const std::vector<double>& a,
                         const std::vector<double>& b, const EnergyParams& prm)
{
    Mesh one;
    one.tri.resize(1);
    one.B.resize(1);
    one.area.resize(1);
    double s = 0.0;
    for (std::size_t e = 0; e < M.size(); ++e) {
        one.tri[0] = M.tri[e];
        one.B[0] = M.B[e];
        one.area[0] = M.area[e];
        s += serial::energy(F, one, a, prm) - serial::energy(F, one, b, prm);
    }
    return s;
}

void gradient_vs_fd()
{
    const auto F0 = MinkowskiNorm::euclidean(2);
    const GridDomain d(Lattice::square(64, kLo, kHi), Obstacle::wulff(WulffShape(F0, Vec::Zero(2), 1.0)));
    const auto norms = builtin_norms();
    const double ps[] = {1.05, 1.2, 1.5, 3.0};
    std::mt19937_64 rng(1013);
    std::uniform_real_distribution<double> U(0.05, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const MinkowskiNorm& F = norms[trial % 3].second;
        const EnergyParams prm{ps[trial % 4], 0.0};
        std::vector<double> v(d.node_count(), 1.0), w(d.node_count(), 0.0), g;
        for (int k : d.free_nodes()) {
            v[k] = U(rng);
            w[k] = N(rng);
        }
        omp::energy_gradient(F, d.mesh(), v, prm, g);
        double dir = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) dir += g[k] * w[k];
        const double eps = 1e-7;
        std::vector<double> vp = v, vm = v;
        for (std::size_t k = 0; k < v.size(); ++k) {
            vp[k] += eps * w[k];
            vm[k] -= eps * w[k];
        }
        const double fd = energy_difference(F, d.mesh(), vp, vm, prm) / (2 * eps);
        worst = std::max(worst, std::abs(fd - dir) / std::abs(dir));
    }
    info("100 random fields on a %d-cell Wulff domain, norms and p in {1.05, 1.2, 1.5, 3} cycled", 64);
    info("central differences with step 1e-7, summed triangle by triangle");
    report(13, "gradient_vs_finite_difference", worst <= 1e-6, worst, 1e-6);
}

} // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    try {
        norm_identities();
        wulff_curvature_oracle();

        const WulffRun w;
        info("Wulff continuation at %d cells: complete %s, sampled inradius %.6f", kRes,
             w.cont.complete ? "yes" : "no", w.R);
        const ScalarField limit = extrapolate_limit(w.cont, w.ps);
        exact_solution(w);
        const std::vector<SquareRun> squares = square_runs();
        barrier_sandwich(squares);
        interior_max_principle(w);
        inradius_bound(w, squares);
        boundary_curvature(w);
        area_growth(w, limit);
        weak_curvature(w, limit);
        minimality(w);
        first_variation();
        p_convergence(w, limit);
        gradient_vs_fd();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("summary: %d of 13 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
