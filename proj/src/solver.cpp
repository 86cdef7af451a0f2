#include "iamcf/solver.hpp"

#include "iamcf/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace iamcf {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kRoundoffBand = 1e-13;
constexpr double kMinStep = 1e-12;
constexpr double kStallMerit = 1e-6;

Vec vec2(const P2& p)
{
    Vec v(2);
    v << p.x(), p.y();
    return v;
}

using SpMat = Eigen::SparseMatrix<double>;

SolveReport solve_impl(const MinkowskiNorm& F, const GridDomain& d, const SolverConfig& cfg,
                       const ScalarField* warm, bool allow_resolve);

} // namespace

std::string to_string(OuterBC b)
{
    return b == OuterBC::barrier_value ? "barrier_value" : "zero";
}

void validate(const SolverConfig& cfg, int n)
{
    auto check_p = [&](double p, const std::string& where) {
        if (!(p > 1.0)) throw ConfigError(where, "p must exceed 1");
        if (p >= n) {
            std::ostringstream os;
            os << "p = " << p << " is not below the dimension n = " << n;
            throw ConfigError(where, os.str());
        }
        if (!cfg.allow_small_p && (p <= cfg.p_min || p >= n - cfg.p_margin)) {
            std::ostringstream os;
            os << "p = " << p << " outside the guarded range (" << cfg.p_min << ", " << n - cfg.p_margin
               << "); set allow_small_p to override";
            throw ConfigError(where, os.str());
        }
    };
    check_p(cfg.p, "/solver/p");
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
        check_p(cfg.schedule[k], "/solver/schedule/" + std::to_string(k));
        if (k > 0 && !(cfg.schedule[k] < cfg.schedule[k - 1]))
            throw ConfigError("/solver/schedule/" + std::to_string(k), "schedule must be strictly decreasing");
    }
    if (!(cfg.tol_grad > 0.0)) throw ConfigError("/solver/tol_grad", "tolerance must be positive");
    if (!(cfg.tol_energy > 0.0)) throw ConfigError("/solver/tol_energy", "tolerance must be positive");
    if (!(cfg.tol_step > 0.0)) throw ConfigError("/solver/tol_step", "tolerance must be positive");
    if (!(cfg.delta_reg >= 0.0)) throw ConfigError("/solver/delta_reg", "regularisation must be >= 0");
    if (cfg.max_iter < 1) throw ConfigError("/solver/max_iter", "max_iter must be positive");
}

double barrier_exponent(int n, double p)
{
    return (n - p) / (p - 1.0);
}

void barrier_fields(const MinkowskiNorm& F, const GridDomain& d, double p, std::vector<double>& lower,
                    std::vector<double>& upper)
{
    const WulffBall in = d.obstacle().inner_wulff(F);
    const WulffBall out = d.obstacle().outer_wulff(F);
    const double alpha = barrier_exponent(2, p);
    const std::size_t N = d.node_count();
    lower.assign(N, 1.0);
    upper.assign(N, 1.0);
    const bool same = in.center == out.center && in.radius == out.radius;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(N); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const P2 x = d.lattice_position(i);
        const double gi = F.polar(vec2(x - in.center));
        const double go = same ? gi : F.polar(vec2(x - out.center));
        lower[i] = gi > in.radius ? std::pow(in.radius / gi, alpha) : 1.0;
        upper[i] = go > out.radius ? std::pow(out.radius / go, alpha) : 1.0;
    }
}

BarrierReport check_barriers(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& v, double p)
{
    BarrierReport r;
    r.inner = d.obstacle().inner_wulff(F);
    r.outer = d.obstacle().outer_wulff(F);
    std::vector<double> lo, up;
    barrier_fields(F, d, p, lo, up);
    const Mesh& M = d.mesh();
    for (std::size_t e = 0; e < M.size(); ++e) {
        const auto& t = M.tri[e];
        const auto& B = M.B[e];
        const double gx = B[0] * v[t[0]] + B[1] * v[t[1]] + B[2] * v[t[2]];
        const double gy = B[3] * v[t[0]] + B[4] * v[t[1]] + B[5] * v[t[2]];
        r.lipschitz = std::max(r.lipschitz, std::hypot(gx, gy));
    }
    r.slack = 3.0 * d.h() * r.lipschitz;
    for (int k : d.free_nodes()) {
        r.lower_violation = std::max(r.lower_violation, lo[k] - v[k]);
        r.upper_violation = std::max(r.upper_violation, v[k] - up[k]);
    }
    r.pass = r.lower_violation <= r.slack && r.upper_violation <= r.slack;
    return r;
}

SolveReport solve_vp(const MinkowskiNorm& F, const GridDomain& d, const SolverConfig& cfg,
                     const ScalarField* warm_start)
{
    return solve_impl(F, d, cfg, warm_start, true);
}

namespace {

SolveReport solve_impl(const MinkowskiNorm& F, const GridDomain& d, const SolverConfig& cfg,
                       const ScalarField* warm, bool allow_resolve)
{
    if (F.dim() != 2) throw DimensionMismatch("solver is planar");
    validate(cfg, 2);
    const double p = cfg.p;
    const double c = p - 1.0;
    const std::size_t N = d.node_count();
    const std::vector<int>& fi = d.free_nodes();
    const int nf = static_cast<int>(fi.size());
    if (warm && warm->size() != N) throw DimensionMismatch("warm start has the wrong size");

    std::vector<double> lower, upper;
    barrier_fields(F, d, p, lower, upper);

    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) {
        switch (d.type(i)) {
        case NodeType::obstacle: v[i] = 1.0; break;
        case NodeType::outer: v[i] = cfg.outer_bc == OuterBC::barrier_value ? upper[i] : 0.0; break;
        case NodeType::interior: {
            const double cold = std::min(1.0, std::pow(lower[i] * upper[i], 0.5 * cfg.cold_start_exponent));
            const double w = warm ? (*warm)[i] : cold;
            v[i] = (w > 0.0 && std::isfinite(w)) ? std::min(w, 1.0) : cold;
            break;
        }
        }
    }

    Eigen::VectorXd u(nf);
    for (int k = 0; k < nf; ++k) u[k] = -c * std::log(v[fi[k]]);
    auto set_v = [&](const Eigen::VectorXd& uu, std::vector<double>& vv) {
        for (int k = 0; k < nf; ++k) vv[fi[k]] = std::exp(-uu[k] / c);
    };
    const EnergyParams prm{p, cfg.delta_reg};
    auto energy_grad = [&](const std::vector<double>& vv, std::vector<double>& g) {
        return cfg.parallel ? omp::energy_gradient(F, d.mesh(), vv, prm, g)
                            : serial::energy_gradient(F, d.mesh(), vv, prm, g);
    };
    auto u_gradient = [&](const std::vector<double>& vv, const std::vector<double>& gv, Eigen::VectorXd& gu) {
        gu.resize(nf);
        for (int k = 0; k < nf; ++k) gu[k] = -vv[fi[k]] / c * gv[fi[k]];
    };

    SolveReport rep;
    rep.p = p;
    std::vector<double> gv;
    double E = energy_grad(v, gv);
    Eigen::VectorXd gu;
    u_gradient(v, gv, gu);
    rep.grad_norm_initial = gu.norm();
    rep.energy_history.push_back(E);
    rep.grad_history.push_back(rep.grad_norm_initial);

    HessianAssembler HA(d);
    SpMat Hu = HA.matrix();
    std::vector<double> gn_values;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool analyzed = false;
    const auto& diag = HA.diagonal_slots();

    std::vector<double> vt(v), gvt;
    Eigen::VectorXd ut, gut, dir, Dgn(nf);
    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
        HA.assemble(F, v, prm, cfg.parallel);
        const SpMat& Hv = HA.matrix();
        const double* hv = Hv.valuePtr();
        double* hu = Hu.valuePtr();
        for (int j = 0; j < nf; ++j) {
            const double sj = -v[fi[j]] / c;
            for (int k = Hv.outerIndexPtr()[j]; k < Hv.outerIndexPtr()[j + 1]; ++k) {
                const int r = Hv.innerIndexPtr()[k];
                hu[k] = hv[k] * (-v[fi[r]] / c) * sj;
            }
        }
        gn_values.assign(hu, hu + Hu.nonZeros());
        for (int k = 0; k < nf; ++k) {
            Dgn[k] = std::max(hu[diag[k]], std::numeric_limits<double>::min());
            hu[diag[k]] += gv[fi[k]] * v[fi[k]] / (c * c);
        }
        if (!analyzed) {
            ldlt.analyzePattern(Hu);
            analyzed = true;
        }
        ldlt.factorize(Hu);
        bool ok = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
        if (ok) {
            dir = ldlt.solve(-gu);
            ok = dir.allFinite() && gu.dot(dir) < 0.0;
        }
        if (!ok) {
            // Gauss-Newton matrix S Hv S, shifted if it is numerically singular.
            std::copy(gn_values.begin(), gn_values.end(), hu);
            ldlt.factorize(Hu);
            if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
                const double shift = 1e-12 * Dgn.maxCoeff();
                for (int k = 0; k < nf; ++k) hu[diag[k]] += shift;
                ldlt.factorize(Hu);
            }
            if (ldlt.info() != Eigen::Success) {
                rep.message = "Hessian factorisation failed";
                break;
            }
            dir = ldlt.solve(-gu);
            ++rep.gauss_newton_steps;
            if (!dir.allFinite() || !(gu.dot(dir) < 0.0)) {
                rep.message = "no descent direction";
                break;
            }
        }
        const double slope = gu.dot(dir);
        double merit0 = 0.0;
        for (int k = 0; k < nf; ++k) merit0 = std::max(merit0, std::abs(gu[k]) / Dgn[k]);

        double t = 1.0, Et = E;
        bool accepted = false;
        while (t >= kMinStep) {
            ut = u + t * dir;
            set_v(ut, vt);
            Et = energy_grad(vt, gvt);
            if (!std::isfinite(Et)) {
                t *= 0.5;
                continue;
            }
            const bool in_band = std::abs(Et - E) <= kRoundoffBand * std::abs(E);
            if (!in_band && Et <= E + kArmijo * t * slope) {
                accepted = true;
                break;
            }
            if (in_band) {
                // Energy change is below rounding: fall back to the Jacobi-scaled residual.
                u_gradient(vt, gvt, gut);
                double merit = 0.0;
                for (int k = 0; k < nf; ++k) merit = std::max(merit, std::abs(gut[k]) / Dgn[k]);
                if (merit < merit0) {
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No representable decrease left: accept when the gradient test already holds.
            if (gu.norm() <= cfg.tol_grad * rep.grad_norm_initial) {
                converged = true;
                break;
            }
            rep.message = "line search failed";
            break;
        }
        if (Et > E + kRoundoffBand * std::abs(E)) rep.energy_monotone = false;
        u = ut;
        std::swap(v, vt);
        std::swap(gv, gvt);
        E = Et;
        u_gradient(v, gv, gu);
        const double gnorm = gu.norm();
        rep.last_step = t * dir.cwiseAbs().maxCoeff();
        rep.energy_history.push_back(E);
        rep.grad_history.push_back(gnorm);
        if (cfg.verbosity > 1)
            std::cerr << "  p=" << p << " it=" << it << " t=" << t << " E=" << E << " |g|=" << gnorm
                      << " step=" << rep.last_step << '\n';
        if (cfg.verbosity > 2) {
            int km;
            dir.cwiseAbs().maxCoeff(&km);
            const P2 x = d.lattice_position(fi[km]);
            std::cerr << "    argmax node (" << x.x() << "," << x.y() << ") v=" << v[fi[km]] << " d=" << dir[km]
                      << " gu=" << gu[km] << " Dgn=" << Dgn[km] << '\n';
        }

        double merit = 0.0;
        for (int k = 0; k < nf; ++k) merit = std::max(merit, std::abs(gu[k]) / Dgn[k]);
        const bool grad_ok = gnorm <= cfg.tol_grad * rep.grad_norm_initial || -slope <= 1e-26 * std::abs(E);
        const bool step_ok = rep.last_step <= cfg.tol_step;
        const std::size_t nh = rep.energy_history.size();
        const bool stall_ok = nh > 5 && rep.energy_history[nh - 6] - E <= cfg.tol_energy * std::abs(E)
                              && merit <= kStallMerit;
        if (grad_ok && (step_ok || stall_ok)) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged && rep.message.empty()) {
        std::ostringstream os;
        os << "not converged after " << cfg.max_iter << " iterations";
        rep.message = os.str();
    }
    rep.iterations = it;
    rep.converged = converged;
    rep.energy = E;
    rep.grad_norm = gu.norm();
    rep.field = ScalarField(d.lattice(), FieldMeaning::v_p);
    rep.field.values = v;

    rep.min_interior = std::numeric_limits<double>::infinity();
    rep.max_interior = -std::numeric_limits<double>::infinity();
    for (int k : fi) {
        rep.min_interior = std::min(rep.min_interior, v[k]);
        rep.max_interior = std::max(rep.max_interior, v[k]);
    }
    rep.max_principle_ok = rep.min_interior > 0.0 && rep.max_interior <= 1.0 + 1e-12;
    rep.barrier = check_barriers(F, d, rep.field, p);
    if (converged && rep.message.empty()) rep.message = "converged";
    if (cfg.verbosity > 0)
        std::cerr << "solve p=" << p << ": " << rep.message << " in " << rep.iterations << " iterations ("
                  << rep.gauss_newton_steps << " Gauss-Newton), |g|/|g0|="
                  << rep.grad_norm / std::max(rep.grad_norm_initial, 1e-300) << '\n';

    if (allow_resolve && converged && cfg.delta_reg > 0.0) {
        SolverConfig fine = cfg;
        fine.delta_reg = cfg.delta_reg / 10.0;
        SolveReport again = solve_impl(F, d, fine, &rep.field, false);
        double diff = 0.0;
        for (int k : fi) diff = std::max(diff, c * std::abs(std::log(again.field[k]) - std::log(v[k])));
        rep.delta_sensitivity = diff;
    }
    return rep;
}

} // namespace

ScalarField log_transform(const ScalarField& v, double p)
{
    if (!(p > 1.0)) throw Error("log_transform needs p > 1");
    ScalarField u(v.lattice, FieldMeaning::u_p);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) {
            auto c = v.lattice.coords(i);
            std::ostringstream os;
            os << "v_p = " << v[i] << " is not positive at node " << i << " (i=" << c[0] << ", j=" << c[1] << ")";
            throw SolverError(os.str());
        }
        u[i] = v[i] == 1.0 ? 0.0 : (1.0 - p) * std::log(v[i]);
    }
    return u;
}

ScalarField exp_transform(const ScalarField& u, double p)
{
    if (!(p > 1.0)) throw Error("exp_transform needs p > 1");
    ScalarField v(u.lattice, FieldMeaning::v_p);
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = std::exp(-u[i] / (p - 1.0));
    return v;
}

MaskedField residual_Qp(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u, double p,
                        double floor)
{
    const Lattice& L = u.lattice;
    const std::size_t N = u.size();
    MaskedField out;
    out.values.assign(N, 0.0);
    out.valid.assign(N, 0);
    auto flux = [&](std::size_t i, Vec& q, double& f) {
        Vec g = gradient_at(u, i);
        f = F.eval(g);
        if (f < floor || g.norm() < kGradFloor) return false;
        q = std::pow(f, p - 1.0) * F.grad(g);
        return true;
    };
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(N); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        if (!d.is_free(i)) continue;
        auto c = L.coords(i);
        bool ok = true;
        for (int a = 0; a < 2 && ok; ++a) {
            if (c[a] < 2 || c[a] > L.dims[a] - 3) {
                ok = false;
                break;
            }
            for (int sgn : {-2, -1, 1, 2}) {
                const std::size_t j = i + sgn * static_cast<std::ptrdiff_t>(L.stride(a));
                if (!d.is_free(j)) ok = false;
            }
        }
        if (!ok) continue;
        Vec q0;
        double f0;
        if (!flux(i, q0, f0)) continue;
        double div = 0.0;
        for (int a = 0; a < 2 && ok; ++a) {
            const std::size_t s = L.stride(a);
            Vec qp, qm;
            double fp, fm;
            if (!flux(i + s, qp, fp) || !flux(i - s, qm, fm)) {
                ok = false;
                break;
            }
            div += (qp[a] - qm[a]) / (2.0 * L.h);
        }
        if (!ok) continue;
        out.values[i] = div - std::pow(f0, p);
        out.valid[i] = 1;
    }
    return out;
}

std::vector<double> triangle_gradient_norms(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u)
{
    const Mesh& M = d.mesh();
    std::vector<double> out(M.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(M.size()); ++e) {
        const auto& t = M.tri[e];
        const auto& B = M.B[e];
        const double gx = B[0] * u[t[0]] + B[1] * u[t[1]] + B[2] * u[t[2]];
        const double gy = B[3] * u[t[0]] + B[4] * u[t[1]] + B[5] * u[t[2]];
        out[e] = F.eval2(gx, gy);
    }
    return out;
}

std::vector<double> node_gradient_norms(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u)
{
    const Lattice& L = d.lattice();
    const double h = L.h;
    std::vector<double> out(d.node_count(), std::numeric_limits<double>::quiet_NaN());
    auto usable = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= L.dims[0] || j >= L.dims[1]) return false;
        return d.type(L.index(i, j)) != NodeType::obstacle;
    };
    for (int k : d.free_nodes()) {
        const auto c = L.coords(k);
        double g[2];
        for (int a = 0; a < 2; ++a) {
            const int di = a == 0 ? 1 : 0, dj = a == 0 ? 0 : 1;
            const int i = c[0], j = c[1];
            auto at = [&](int s) { return u[L.index(i + s * di, j + s * dj)]; };
            const bool plus = usable(i + di, j + dj), minus = usable(i - di, j - dj);
            if (plus && minus) {
                g[a] = (at(1) - at(-1)) / (2.0 * h);
            } else if (plus) {
                g[a] = usable(i + 2 * di, j + 2 * dj) ? (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
                                                      : (at(1) - at(0)) / h;
            } else if (minus) {
                g[a] = usable(i - 2 * di, j - 2 * dj) ? (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h)
                                                      : (at(0) - at(-1)) / h;
            } else {
                g[a] = 0.0;
            }
        }
        out[k] = F.eval2(g[0], g[1]);
    }
    return out;
}

GradientBoundReport check_gradient_bounds(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u,
                                          double p, double R_wulff)
{
    GradientBoundReport r;
    r.p = p;
    const std::vector<double> g = node_gradient_norms(F, d, u);
    std::vector<std::uint8_t> layer(d.node_count(), 0);
    for (int k : d.boundary_layer()) layer[k] = 1;
    for (int k : d.free_nodes()) {
        r.sup_all = std::max(r.sup_all, g[k]);
        if (layer[k])
            r.sup_boundary = std::max(r.sup_boundary, g[k]);
        else
            r.sup_interior = std::max(r.sup_interior, g[k]);
    }
    r.maxgrad_excess = r.sup_boundary > 0.0 ? (r.sup_all - r.sup_boundary) / r.sup_boundary : 0.0;
    r.inradius = R_wulff;
    const int n = d.lattice().n;
    r.estapp_bound = R_wulff > 0.0 ? (n - p) / R_wulff : std::numeric_limits<double>::infinity();
    if (d.obstacle().is_wulff_of(F)) {
        r.hf_plus = (n - 1) / d.obstacle().as_wulff().r;
        r.curvature_excess = std::max(0.0, r.sup_boundary - r.hf_plus);
    } else {
        r.hf_plus = std::numeric_limits<double>::quiet_NaN();
        r.curvature_excess = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

double wulff_inradius(const MinkowskiNorm& F, const GridDomain& d, double spacing)
{
    const Obstacle& obs = d.obstacle();
    if (!obs.convex()) throw DomainError("Wulff inradius is only supported for convex obstacles");
    if (obs.is_wulff_of(F)) return obs.as_wulff().r;
    if (spacing <= 0.0) spacing = 0.5 * d.h();
    std::vector<P2> pts, nrm;
    obs.boundary_samples(spacing, pts, nrm);

    // Contour of a candidate W_rho, reused for containment tests of Wulff obstacles.
    const Contour unit = sample_wulff_boundary(WulffShape(F, Vec::Zero(2), 1.0), 720);
    auto contained = [&](const P2& x0, double rho) {
        if (!obs.is_wulff()) {
            const Polygon& P = obs.as_polygon();
            for (std::size_t k = 0; k < P.normals.size(); ++k)
                if (P.normals[k].dot(x0) + rho * F.eval2(P.normals[k].x(), P.normals[k].y())
                    > P.offsets[k] + 1e-12 * (1.0 + rho))
                    return false;
            return true;
        }
        const WulffShape& W = obs.as_wulff();
        for (const P2& q : unit.vertices)
            if (W.gauge(vec2(x0 + rho * q)) > W.r * (1.0 + 1e-12)) return false;
        return true;
    };
    auto feasible = [&](double rho) {
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Vec nF = F.grad(vec2(nrm[k]));
            const P2 x0 = pts[k] - rho * P2(nF[0], nF[1]);
            if (!contained(x0, rho)) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 2.0 * obs.inner_wulff(F).radius + d.h();
    if (feasible(hi)) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

std::vector<std::uint8_t> annulus_mask(const MinkowskiNorm& F, const GridDomain& d, double inner_factor,
                                       double outer_factor)
{
    const WulffBall out = d.obstacle().outer_wulff(F);
    std::vector<std::uint8_t> m(d.node_count(), 0);
    for (int k : d.free_nodes()) {
        const double g = F.polar(vec2(d.lattice_position(k) - out.center));
        m[k] = g >= inner_factor * out.radius && g <= outer_factor * out.radius;
    }
    return m;
}

ContinuationResult continuation_solve(const MinkowskiNorm& F, const GridDomain& d, const SolverConfig& cfg)
{
    validate(cfg, 2);
    std::vector<double> schedule = cfg.schedule.empty() ? std::vector<double>{cfg.p} : cfg.schedule;
    const std::vector<std::uint8_t> ann = annulus_mask(F, d);
    ContinuationResult res;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        SolverConfig ck = cfg;
        ck.p = schedule[k];
        ck.schedule.clear();
        SolveReport rep;
        if (k == 0) {
            rep = solve_vp(F, d, ck);
        } else {
            // Same u, re-exponentiated for the new p.
            const ScalarField warm = exp_transform(res.u_fields.back(), ck.p);
            rep = solve_vp(F, d, ck, &warm);
        }
        const bool ok = rep.converged;
        res.reports.push_back(std::move(rep));
        if (!ok) {
            std::ostringstream os;
            os << "stage p=" << schedule[k] << " failed: " << res.reports.back().message;
            res.message = os.str();
            return res;
        }
        res.u_fields.push_back(log_transform(res.reports.back().field, schedule[k]));
        if (k > 0) {
            const ScalarField& a = res.u_fields[k - 1];
            const ScalarField& b = res.u_fields[k];
            double diff = 0.0;
            for (std::size_t i = 0; i < ann.size(); ++i)
                if (ann[i]) diff = std::max(diff, std::abs(a[i] - b[i]));
            res.cauchy.push_back(diff);
        }
    }
    res.complete = true;
    res.message = "complete";
    return res;
}

} // namespace iamcf
