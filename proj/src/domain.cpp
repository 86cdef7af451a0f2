#include "iamcf/domain.hpp"

#include "iamcf/errors.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace iamcf {

std::string to_string(BoundaryTreatment b)
{
    return b == BoundaryTreatment::fitted ? "fitted" : "staircase";
}

GridDomain::GridDomain(const Lattice& lattice, Obstacle obstacle, DomainOptions options)
    : lattice_(lattice), obstacle_(std::move(obstacle)), options_(options)
{
    if (lattice_.n != 2) throw DimensionMismatch("grid domains are planar");
    if (lattice_.dims[0] < 5 || lattice_.dims[1] < 5) throw DomainError("grid too coarse");
    validate();
    classify();
    build_mesh();
}

P2 GridDomain::lattice_position(std::size_t node) const
{
    auto c = lattice_.coords(node);
    return {lattice_.origin[0] + lattice_.h * c[0], lattice_.origin[1] + lattice_.h * c[1]};
}

void GridDomain::validate()
{
    P2 lo, hi;
    obstacle_.bounding_box(lo, hi);
    const double xmin = lattice_.origin[0], ymin = lattice_.origin[1];
    const double xmax = xmin + lattice_.h * (lattice_.dims[0] - 1);
    const double ymax = ymin + lattice_.h * (lattice_.dims[1] - 1);
    const double width = std::min(xmax - xmin, ymax - ymin);
    const double gap = std::min({lo.x() - xmin, lo.y() - ymin, xmax - hi.x(), ymax - hi.y()});
    if (gap < options_.margin_fraction * width) {
        std::ostringstream os;
        os << "obstacle " << obstacle_.describe() << " leaves a margin of " << gap
           << " to the box, below " << options_.margin_fraction << " x box width " << width;
        throw DomainError(os.str());
    }
    const P2 c = obstacle_.reference_center();
    const double half = std::min({c.x() - xmin, c.y() - ymin, xmax - c.x(), ymax - c.y()});
    const double R = obstacle_.circumradius();
    if (half < options_.circumradius_factor * R) {
        std::ostringstream os;
        os << "box half-width " << half << " is below " << options_.circumradius_factor
           << " x obstacle circumradius " << R;
        if (options_.strict_circumradius) throw DomainError(os.str());
        warnings_.push_back(os.str());
    }
}

void GridDomain::classify()
{
    const std::size_t N = lattice_.size();
    type_.assign(N, NodeType::interior);
    pos_.resize(N);
    const bool fitted = options_.treatment == BoundaryTreatment::fitted;
    const double snap = options_.snap_fraction * lattice_.h;
    for (std::size_t i = 0; i < N; ++i) {
        pos_[i] = lattice_position(i);
        if (obstacle_.contains(pos_[i]) || (fitted && obstacle_.distance_outside(pos_[i]) < snap))
            type_[i] = NodeType::obstacle;
        else if (lattice_.on_edge(i))
            type_[i] = NodeType::outer;
    }

    free_index_.assign(N, -1);
    free_nodes_.clear();
    for (std::size_t i = 0; i < N; ++i)
        if (type_[i] == NodeType::interior) {
            free_index_[i] = static_cast<int>(free_nodes_.size());
            free_nodes_.push_back(static_cast<int>(i));
        }
    if (free_nodes_.empty()) throw DomainError("grid has no interior nodes");

    // Interior nodes must form one 4-connected component.
    std::vector<std::uint8_t> seen(N, 0);
    std::deque<std::size_t> queue{static_cast<std::size_t>(free_nodes_.front())};
    seen[free_nodes_.front()] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        ++reached;
        auto c = lattice_.coords(k);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int q = 0; q < 4; ++q) {
            const int i = c[0] + di[q], j = c[1] + dj[q];
            if (i < 0 || j < 0 || i >= lattice_.dims[0] || j >= lattice_.dims[1]) continue;
            const std::size_t m = lattice_.index(i, j);
            if (!seen[m] && type_[m] == NodeType::interior) {
                seen[m] = 1;
                queue.push_back(m);
            }
        }
    }
    if (reached != free_nodes_.size()) {
        std::ostringstream os;
        os << "interior nodes are disconnected (" << reached << " of " << free_nodes_.size()
           << " reachable)";
        throw DomainError(os.str());
    }

    boundary_layer_.clear();
    for (int k : free_nodes_) {
        auto c = lattice_.coords(k);
        bool touch = false;
        for (int di = -1; di <= 1 && !touch; ++di)
            for (int dj = -1; dj <= 1 && !touch; ++dj)
                touch = type_[lattice_.index(c[0] + di, c[1] + dj)] == NodeType::obstacle;
        if (touch) boundary_layer_.push_back(k);
    }
}

bool GridDomain::orient_ok(const std::array<int, 3>& t) const
{
    const P2 e1 = pos_[t[1]] - pos_[t[0]];
    const P2 e2 = pos_[t[2]] - pos_[t[0]];
    return e1.x() * e2.y() - e1.y() * e2.x() > 1e-6 * lattice_.h * lattice_.h;
}

void GridDomain::build_mesh()
{
    const int nx = lattice_.dims[0], ny = lattice_.dims[1];
    const double h = lattice_.h;
    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < ny; ++j) {
            const int v00 = static_cast<int>(lattice_.index(i, j));
            const int v10 = static_cast<int>(lattice_.index(i + 1, j));
            const int v01 = static_cast<int>(lattice_.index(i, j + 1));
            const int v11 = static_cast<int>(lattice_.index(i + 1, j + 1));
            const bool any_free = is_free(v00) || is_free(v10) || is_free(v01) || is_free(v11);
            if (!any_free && !options_.mesh_all_cells) continue;
            const P2 centre(lattice_.origin[0] + h * (i + 0.5), lattice_.origin[1] + h * (j + 0.5));
            const P2 g = obstacle_.outward_direction(centre);
            const double tA = std::abs(-g.x() + g.y());
            const double tB = std::abs(g.x() + g.y());
            if (tA <= tB) {
                tris.push_back({v00, v10, v01});
                tris.push_back({v11, v01, v10});
            } else {
                tris.push_back({v10, v11, v00});
                tris.push_back({v01, v00, v11});
            }
        }

    if (options_.treatment == BoundaryTreatment::fitted) {
        std::vector<std::uint8_t> moved(type_.size(), 0);
        for (const auto& t : tris) {
            bool has_free = false;
            for (int k : t) has_free |= is_free(k);
            if (!has_free) continue;
            for (int k : t)
                if (type_[k] == NodeType::obstacle && !moved[k]) {
                    pos_[k] = obstacle_.project(lattice_position(k));
                    moved[k] = 1;
                }
        }
        // Undo moves that collapse or invert a triangle.
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& t : tris) {
                if (orient_ok(t)) continue;
                for (int k : t)
                    if (moved[k]) {
                        pos_[k] = lattice_position(k);
                        moved[k] = 0;
                        changed = true;
                    }
            }
        }
        moved_ = 0;
        for (auto m : moved) moved_ += m;
    }

    Mesh& M = mesh_;
    M = Mesh{};
    for (const auto& t : tris) {
        if (!orient_ok(t)) throw DomainError("mesh contains an inverted triangle");
        const P2& c = pos_[t[0]];
        const P2 e1 = pos_[t[1]] - c;
        const P2 e2 = pos_[t[2]] - c;
        const double det = e1.x() * e2.y() - e1.y() * e2.x();
        std::array<double, 6> B{};
        B[0] = (e1.y() - e2.y()) / det;
        B[1] = e2.y() / det;
        B[2] = -e1.y() / det;
        B[3] = (e2.x() - e1.x()) / det;
        B[4] = -e2.x() / det;
        B[5] = e1.x() / det;
        M.tri.push_back(t);
        M.B.push_back(B);
        M.area.push_back(0.5 * det);
    }

    const std::size_t N = type_.size();
    M.gather_ptr.assign(N + 1, 0);
    for (const auto& t : M.tri)
        for (int k : t) ++M.gather_ptr[k + 1];
    for (std::size_t i = 0; i < N; ++i) M.gather_ptr[i + 1] += M.gather_ptr[i];
    M.gather_idx.assign(M.gather_ptr[N], 0);
    std::vector<int> fill(M.gather_ptr.begin(), M.gather_ptr.end() - 1);
    for (std::size_t e = 0; e < M.tri.size(); ++e)
        for (int s = 0; s < 3; ++s) M.gather_idx[fill[M.tri[e][s]]++] = static_cast<int>(3 * e + s);

    boundary_tris_.clear();
    for (std::size_t e = 0; e < M.tri.size(); ++e)
        for (int k : M.tri[e])
            if (type_[k] == NodeType::obstacle) {
                boundary_tris_.push_back(static_cast<int>(e));
                break;
            }
}

} // namespace iamcf
