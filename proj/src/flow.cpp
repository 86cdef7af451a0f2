#include "iamcf/flow.hpp"

#include "iamcf/errors.hpp"
#include "iamcf/obstacle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace iamcf {

namespace {

Vec as_vec(const P2& p)
{
    Vec v(2);
    v << p.x(), p.y();
    return v;
}

struct CellHit {
    int i = -1;
    int j = -1;
    double tx = 0.0;
    double ty = 0.0;
    bool inside = false;
};

CellHit locate(const Lattice& L, const P2& x)
{
    CellHit c;
    const double sx = (x.x() - L.origin[0]) / L.h;
    const double sy = (x.y() - L.origin[1]) / L.h;
    c.i = std::clamp(static_cast<int>(std::floor(sx)), 0, L.dims[0] - 2);
    c.j = std::clamp(static_cast<int>(std::floor(sy)), 0, L.dims[1] - 2);
    c.tx = sx - c.i;
    c.ty = sy - c.j;
    c.inside = sx >= 0.0 && sy >= 0.0 && sx <= L.dims[0] - 1 && sy <= L.dims[1] - 1;
    return c;
}

std::array<std::size_t, 4> corners(const Lattice& L, const CellHit& c)
{
    return {L.index(c.i, c.j), L.index(c.i + 1, c.j), L.index(c.i, c.j + 1), L.index(c.i + 1, c.j + 1)};
}

double bilinear(const std::vector<double>& f, const Lattice& L, const CellHit& c)
{
    const auto k = corners(L, c);
    return (1 - c.tx) * (1 - c.ty) * f[k[0]] + c.tx * (1 - c.ty) * f[k[1]] + (1 - c.tx) * c.ty * f[k[2]]
           + c.tx * c.ty * f[k[3]];
}

std::vector<double> nodal_F_of_gradient(const MinkowskiNorm& F, const ScalarField& u)
{
    const std::vector<Vec> g = nodal_gradient(u);
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = F.eval(g[i]);
    return out;
}

/// J restricted to the cell block [i0, i1) x [j0, j1).
double J_cells(const MinkowskiNorm& F, const ScalarField& u, const ScalarField& phi,
               const std::vector<std::uint8_t>& K, int i0, int i1, int j0, int j1)
{
    const Lattice& L = u.lattice;
    const double h = L.h;
    double J = 0.0;
    for (int i = i0; i < i1; ++i)
        for (int j = j0; j < j1; ++j) {
            const std::size_t k00 = L.index(i, j), k10 = L.index(i + 1, j);
            const std::size_t k01 = L.index(i, j + 1), k11 = L.index(i + 1, j + 1);
            const int hits = K[k00] + K[k10] + K[k01] + K[k11];
            if (hits == 0) continue;
            auto grad = [&](const ScalarField& f, double& gx, double& gy) {
                gx = 0.5 * ((f[k10] - f[k00]) + (f[k11] - f[k01])) / h;
                gy = 0.5 * ((f[k01] - f[k00]) + (f[k11] - f[k10])) / h;
            };
            double ux, uy, px, py;
            grad(u, ux, uy);
            grad(phi, px, py);
            const double pc = 0.25 * (phi[k00] + phi[k10] + phi[k01] + phi[k11]);
            J += 0.25 * hits * h * h * (F.eval2(px, py) + pc * F.eval2(ux, uy));
        }
    return J;
}

} // namespace

FlowSnapshot extract_sublevel(const MinkowskiNorm& F, const ScalarField& u, double t, double floor)
{
    FlowSnapshot s;
    s.t = t;
    const auto [lo, hi] = std::minmax_element(u.values.begin(), u.values.end());
    if (t < *lo || t > *hi) return s;
    s.contour = extract_contour(u, t);
    if (s.contour.empty()) return s;
    s.closed = s.contour.is_closed();
    s.sigma_F = sigma_F(F, s.contour);
    const std::vector<double> g = nodal_F_of_gradient(F, u);
    std::size_t masked = 0;
    for (const Facet& f : s.contour.facets) {
        const CellHit c = locate(u.lattice, s.contour.midpoint(f));
        for (std::size_t k : corners(u.lattice, c))
            if (g[k] < floor) {
                ++masked;
                break;
            }
    }
    s.masked_fraction = static_cast<double>(masked) / static_cast<double>(s.contour.facets.size());
    return s;
}

NestingReport nesting_check(const ScalarField& u, double t1, double t2)
{
    if (!(t1 < t2)) throw Error("nesting check needs t1 < t2");
    NestingReport r;
    r.max_value = -std::numeric_limits<double>::infinity();
    const Contour c = extract_contour(u, t1);
    for (const P2& x : c.vertices) r.max_value = std::max(r.max_value, u.interpolate(as_vec(x)));
    r.pass = c.vertices.empty() || r.max_value < t2;
    return r;
}

double coarea_sigma(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u, double t,
                    double width_cells)
{
    const Lattice& L = u.lattice;
    const std::vector<double> g = nodal_F_of_gradient(F, u);
    const Contour c = extract_contour(u, t);
    if (c.empty()) return 0.0;
    double num = 0.0, den = 0.0;
    for (const Facet& f : c.facets) {
        num += bilinear(g, L, locate(L, c.midpoint(f))) * f.measure;
        den += f.measure;
    }
    const double w = width_cells * L.h * num / den;
    double s = 0.0;
    for (int k : d.free_nodes()) {
        const double z = std::abs(u[k] - t) / w;
        if (z < 1.0) s += g[k] * (1.0 - z) / w;
    }
    return s * L.h * L.h;
}

GrowthSeries area_growth_series(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u,
                                const std::vector<double>& times)
{
    GrowthSeries out;
    out.sigma0 = sigma_F(F, obstacle_contour(d.obstacle()));
    out.hypothesis_verified = d.obstacle().convex();
    for (double t : times) {
        GrowthRow r;
        r.t = t;
        r.predicted = std::exp(t) * out.sigma0;
        if (t <= 0.0) {
            r.sigma_contour = r.sigma_coarea = out.sigma0;
            r.closed = true;
        } else {
            const FlowSnapshot s = extract_sublevel(F, u, t);
            r.sigma_contour = s.sigma_F;
            r.closed = s.closed;
            r.sigma_coarea = coarea_sigma(F, d, u, t);
        }
        r.ratio_contour = r.sigma_contour / r.predicted;
        r.ratio_coarea = r.sigma_coarea / r.predicted;
        out.rows.push_back(r);
    }
    return out;
}

CurvatureResidual weak_curvature_residual(const MinkowskiNorm& F, const ScalarField& u, double t,
                                          const GridDomain* domain, double floor)
{
    const Lattice& L = u.lattice;
    const Contour c = extract_contour(u, t);
    if (c.empty()) throw Error("level " + std::to_string(t) + " has an empty contour");
    if (!c.is_closed()) throw Error("weak curvature residual needs a closed level set; level "
                                    + std::to_string(t) + " reaches the grid edge");

    const MaskedField hf = level_set_HF_field(F, u, floor);
    const std::vector<double> g = nodal_F_of_gradient(F, u);
    std::vector<std::uint8_t> near(L.size(), 0);
    if (domain) {
        for (std::size_t k = 0; k < L.size(); ++k) {
            if (domain->type(k) != NodeType::obstacle) continue;
            const auto ck = L.coords(k);
            for (int di = -2; di <= 2; ++di)
                for (int dj = -2; dj <= 2; ++dj) {
                    const int i = ck[0] + di, j = ck[1] + dj;
                    if (i >= 0 && j >= 0 && i < L.dims[0] && j < L.dims[1]) near[L.index(i, j)] = 1;
                }
        }
    }

    CurvatureResidual r;
    r.t = t;
    r.vertices = c.vertices.size();
    double sum = 0.0;
    std::size_t used = 0;
    for (const P2& x : c.vertices) {
        const CellHit cell = locate(L, x);
        bool ok = true;
        for (std::size_t k : corners(L, cell)) ok = ok && hf.valid[k] && !near[k] && g[k] >= floor;
        if (!ok) {
            ++r.masked;
            continue;
        }
        const double H = bilinear(hf.values, L, cell);
        const double G = bilinear(g, L, cell);
        const double rel = std::abs(H - G) / G;
        r.max_rel = std::max(r.max_rel, rel);
        sum += rel;
        ++used;
    }
    if (used == 0) throw Error("every vertex of level " + std::to_string(t) + " is masked");
    r.mean_rel = sum / static_cast<double>(used);
    r.masked_fraction = static_cast<double>(r.masked) / static_cast<double>(r.vertices);
    return r;
}

double J_functional(const MinkowskiNorm& F, const ScalarField& u, const ScalarField& phi,
                    const std::vector<std::uint8_t>& K)
{
    const Lattice& L = u.lattice;
    if (L.n != 2) throw DimensionMismatch("J functional is implemented for planar fields");
    if (phi.size() != u.size() || K.size() != u.size())
        throw DimensionMismatch("u, phi and K must live on the same lattice");
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!K[k] && phi[k] != u[k]) {
            const auto c = L.coords(k);
            std::ostringstream os;
            os << "candidate differs from u outside K at node (" << c[0] << ", " << c[1] << ")";
            throw Error(os.str());
        }
    return J_cells(F, u, phi, K, 0, L.dims[0] - 1, 0, L.dims[1] - 1);
}

MinimalityReport minimality_spot_check(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u,
                                       const MinimalityConfig& cfg)
{
    if (cfg.trials < 0) throw Error("trial count must be nonnegative");
    if (!(cfg.min_half_width > 0.0) || cfg.max_half_width < cfg.min_half_width)
        throw Error("bump half-width range is empty");
    const Lattice& L = d.lattice();
    const double h = L.h;
    const P2 x0 = d.obstacle().reference_center();
    const double Rs = cfg.sample_radius_factor * d.obstacle().circumradius();

    MinimalityReport rep;
    rep.seed = cfg.seed;
    rep.C = cfg.C;
    rep.trials.resize(cfg.trials);

    // Trials only read shared state, so they run independently and land in
    // their own slot of the report.
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < cfg.trials; ++k) {
        MinimalityTrial tr;
        tr.index = k;
        tr.seed = cfg.seed + static_cast<std::uint64_t>(k);
        std::mt19937_64 rng(tr.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        int i0 = 0, i1 = 0, j0 = 0, j1 = 0;
        bool found = false;
        for (int attempt = 0; attempt < 10000 && !found; ++attempt) {
            tr.half_width = cfg.min_half_width + (cfg.max_half_width - cfg.min_half_width) * unit(rng);
            tr.centre = x0 + Rs * P2(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
            if (F.polar(as_vec(tr.centre - x0)) > Rs) continue;
            const double w = tr.half_width;
            i0 = static_cast<int>(std::floor((tr.centre.x() - w - L.origin[0]) / h));
            i1 = static_cast<int>(std::ceil((tr.centre.x() + w - L.origin[0]) / h));
            j0 = static_cast<int>(std::floor((tr.centre.y() - w - L.origin[1]) / h));
            j1 = static_cast<int>(std::ceil((tr.centre.y() + w - L.origin[1]) / h));
            if (i0 < 1 || j0 < 1 || i1 >= L.dims[0] - 1 || j1 >= L.dims[1] - 1) continue;
            found = true;
            for (int i = i0 - 1; i <= i1 + 1 && found; ++i)
                for (int j = j0 - 1; j <= j1 + 1 && found; ++j) found = d.is_free(L.index(i, j));
        }
        if (!found) {
            tr.pass = false;
            rep.trials[k] = tr;
            continue;
        }

        const double scale = std::max(std::abs(u.interpolate(as_vec(tr.centre))), h);
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        tr.amplitude = sign * cfg.amplitude * (0.1 + 0.9 * unit(rng)) * scale;

        std::vector<std::uint8_t> K(L.size(), 0);
        ScalarField phi = u;
        std::size_t nK = 0;
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) {
                const std::size_t idx = L.index(i, j);
                const double dx = L.origin[0] + h * i - tr.centre.x();
                const double dy = L.origin[1] + h * j - tr.centre.y();
                if (std::abs(dx) >= tr.half_width || std::abs(dy) >= tr.half_width) continue;
                K[idx] = 1;
                ++nK;
                const double bx = std::cos(0.5 * std::numbers::pi * dx / tr.half_width);
                const double by = std::cos(0.5 * std::numbers::pi * dy / tr.half_width);
                phi[idx] += tr.amplitude * bx * bx * by * by;
            }
        tr.measure_K = static_cast<double>(nK) * h * h;
        tr.J_u = J_cells(F, u, u, K, i0 - 1, i1 + 1, j0 - 1, j1 + 1);
        tr.J_phi = J_cells(F, u, phi, K, i0 - 1, i1 + 1, j0 - 1, j1 + 1);
        tr.margin = tr.J_phi - tr.J_u;
        tr.slack = cfg.C * h * tr.measure_K;
        tr.pass = tr.margin >= -tr.slack;
        rep.trials[k] = tr;
    }

    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.worst_scaled_margin = std::numeric_limits<double>::infinity();
    for (const MinimalityTrial& tr : rep.trials) {
        rep.failures += !tr.pass;
        rep.worst_margin = std::min(rep.worst_margin, tr.margin);
        if (tr.measure_K > 0.0)
            rep.worst_scaled_margin = std::min(rep.worst_scaled_margin, tr.margin / (h * tr.measure_K));
    }
    if (rep.trials.empty()) rep.worst_margin = rep.worst_scaled_margin = 0.0;
    rep.pass = rep.failures == 0;
    return rep;
}

PropernessReport properness_proxy(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u)
{
    const Lattice& L = d.lattice();
    const P2 x0 = d.obstacle().reference_center();
    const double xmax = L.origin[0] + L.h * (L.dims[0] - 1), ymax = L.origin[1] + L.h * (L.dims[1] - 1);
    const double half = std::min({x0.x() - L.origin[0], x0.y() - L.origin[1], xmax - x0.x(), ymax - x0.y()});
    PropernessReport r;
    r.min_outer = std::numeric_limits<double>::infinity();
    r.max_mid = -std::numeric_limits<double>::infinity();
    for (int k : d.free_nodes()) {
        const auto c = L.coords(k);
        bool outer = false;
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) outer = outer || d.type(L.index(c[0] + di, c[1] + dj)) == NodeType::outer;
        if (outer) r.min_outer = std::min(r.min_outer, u[k]);
        const double g = F.polar(as_vec(d.lattice_position(k) - x0));
        if (g >= 0.4 * half && g <= 0.5 * half) r.max_mid = std::max(r.max_mid, u[k]);
    }
    r.pass = std::isfinite(r.min_outer) && std::isfinite(r.max_mid) && r.min_outer > r.max_mid;
    return r;
}

DecayReport decay_proxy(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& v)
{
    const Lattice& L = d.lattice();
    const P2 x0 = d.obstacle().reference_center();
    const double xmax = L.origin[0] + L.h * (L.dims[0] - 1), ymax = L.origin[1] + L.h * (L.dims[1] - 1);
    const double half = std::min({x0.x() - L.origin[0], x0.y() - L.origin[1], xmax - x0.x(), ymax - x0.y()});
    const std::vector<Vec> g = nodal_gradient(v);
    DecayReport r;
    for (int k : d.free_nodes()) {
        if (!(v[k] > 0.0)) continue;
        const P2 x = d.lattice_position(k) - x0;
        const double cheb = std::max(std::abs(x.x()), std::abs(x.y()));
        const double q = F.eval(g[k]) / v[k];
        if (cheb >= 0.9 * half) r.outer = std::max(r.outer, q);
        if (cheb >= 0.45 * half && cheb <= 0.55 * half) r.mid = std::max(r.mid, q);
    }
    r.pass = r.mid > 0.0 && r.outer < r.mid;
    return r;
}

} // namespace iamcf
