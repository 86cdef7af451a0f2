#include "iamcf/contour.hpp"

#include "iamcf/errors.hpp"
#include "iamcf/obstacle.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace iamcf {

namespace {

constexpr double kEdgeClamp = 1e-9;

class VertexTable {
public:
    VertexTable(const ScalarField& u, double t, Contour& c) : u_(u), t_(t), c_(c) {}

    /// Crossing on the lattice edge from node a to node b (b = a + stride along `axis`).
    int crossing(std::size_t a, std::size_t b, int axis)
    {
        const std::size_t key = 2 * a + static_cast<std::size_t>(axis);
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;
        const double ua = u_[a], ub = u_[b];
        double s = (t_ - ua) / (ub - ua);
        s = std::clamp(s, kEdgeClamp, 1.0 - kEdgeClamp);
        const Lattice& L = u_.lattice;
        const auto ca = L.coords(a);
        P2 x(L.origin[0] + L.h * ca[0], L.origin[1] + L.h * ca[1]);
        x[axis] += s * L.h;
        const int id = static_cast<int>(c_.vertices.size());
        c_.vertices.push_back(x);
        ids_.emplace(key, id);
        return id;
    }

private:
    const ScalarField& u_;
    double t_;
    Contour& c_;
    std::unordered_map<std::size_t, int> ids_;
};

} // namespace

Contour extract_contour(const ScalarField& u, double t)
{
    const Lattice& L = u.lattice;
    if (L.n != 2) throw DimensionMismatch("facet contours are planar only");
    Contour c;
    VertexTable table(u, t, c);

    for (int i = 0; i + 1 < L.dims[0]; ++i)
        for (int j = 0; j + 1 < L.dims[1]; ++j) {
            // Corners counter-clockwise: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
            const std::array<std::size_t, 4> k{L.index(i, j), L.index(i + 1, j), L.index(i + 1, j + 1),
                                               L.index(i, j + 1)};
            std::array<bool, 4> in{};
            int count = 0;
            for (int q = 0; q < 4; ++q) {
                in[q] = u[k[q]] < t;
                count += in[q];
            }
            if (count == 0 || count == 4) continue;

            // Edge q joins corner q to corner q+1. Exits go from inside to outside
            // in counter-clockwise order, entries the other way.
            std::array<int, 4> vid{-1, -1, -1, -1};
            std::array<int, 4> kind{0, 0, 0, 0}; // +1 exit, -1 entry
            for (int q = 0; q < 4; ++q) {
                const int r = (q + 1) % 4;
                if (in[q] == in[r]) continue;
                kind[q] = in[q] ? 1 : -1;
                switch (q) {
                case 0: vid[q] = table.crossing(k[0], k[1], 0); break;
                case 1: vid[q] = table.crossing(k[1], k[2], 1); break;
                case 2: vid[q] = table.crossing(k[3], k[2], 0); break;
                default: vid[q] = table.crossing(k[0], k[3], 1); break;
                }
            }

            bool join_inside = true;
            if (count == 2 && in[0] == in[2]) {
                const double centre = 0.25 * (u[k[0]] + u[k[1]] + u[k[2]] + u[k[3]]);
                join_inside = centre < t;
            }
            for (int q = 0; q < 4; ++q) {
                if (kind[q] != 1) continue;
                int r = q;
                do {
                    r = join_inside ? (r + 1) % 4 : (r + 3) % 4;
                } while (kind[r] != -1);
                Facet f;
                f.a = vid[q];
                f.b = vid[r];
                c.facets.push_back(f);
            }
        }
    c.refresh_geometry();
    return c;
}

int closed_loop_count(const Contour& c)
{
    const std::size_t nv = c.vertices.size();
    std::vector<int> next(nv, -1), indeg(nv, 0);
    for (const Facet& f : c.facets) {
        next[f.a] = f.b;
        ++indeg[f.b];
    }
    std::vector<std::uint8_t> seen(nv, 0);
    int loops = 0;
    for (std::size_t s = 0; s < nv; ++s) {
        if (seen[s] || next[s] < 0 || indeg[s] == 0) continue;
        std::size_t v = s;
        bool closed = false;
        while (!seen[v]) {
            seen[v] = 1;
            if (next[v] < 0) break;
            v = static_cast<std::size_t>(next[v]);
            if (v == s) {
                closed = true;
                break;
            }
        }
        loops += closed;
    }
    return loops;
}

Contour obstacle_contour(const Obstacle& obstacle, int resolution)
{
    if (obstacle.is_wulff()) return sample_wulff_boundary(obstacle.as_wulff(), resolution);
    const Polygon& P = obstacle.as_polygon();
    Contour c;
    c.vertices = P.vertices;
    const int m = static_cast<int>(P.vertices.size());
    for (int k = 0; k < m; ++k) {
        Facet f;
        f.a = k;
        f.b = (k + 1) % m;
        c.facets.push_back(f);
    }
    c.refresh_geometry();
    return c;
}

} // namespace iamcf
