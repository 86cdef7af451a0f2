#pragma once

#include "iamcf/lattice.hpp"
#include "iamcf/obstacle.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace iamcf {

enum class NodeType : std::uint8_t { interior, obstacle, outer };
enum class BoundaryTreatment { fitted, staircase };

std::string to_string(BoundaryTreatment b);

struct DomainOptions {
    BoundaryTreatment treatment = BoundaryTreatment::fitted;
    /// Free nodes closer than this many cells to the obstacle join it (fitted only).
    double snap_fraction = 0.3;
    /// Required gap between obstacle and box on every side, as a fraction of box width.
    double margin_fraction = 0.25;
    /// Box half-width should be at least this multiple of the obstacle circumradius.
    double circumradius_factor = 8.0;
    /// Turn the circumradius recommendation into an error.
    bool strict_circumradius = false;
    /// Mesh every cell, including cells with no free node (used by oracle tests).
    bool mesh_all_cells = false;
};

/// P1 triangulation over the lattice nodes. Each triangle stores its node ids,
/// the constant gradient operator (grad v = B v_T, rows x and y) and its area.
struct Mesh {
    std::vector<std::array<int, 3>> tri;
    std::vector<std::array<double, 6>> B;
    std::vector<double> area;
    /// Node -> (triangle * 3 + slot) entries, ordered by triangle id.
    std::vector<int> gather_ptr;
    std::vector<int> gather_idx;

    std::size_t size() const noexcept { return tri.size(); }
};

/// Rectangular planar grid with an obstacle Omega^c. Obstacle nodes carry
/// v = 1, outer-edge nodes carry the outer Dirichlet value, interior nodes are
/// unknowns. With the fitted treatment obstacle nodes next to free nodes are
/// moved onto the obstacle boundary and each cell is split along the diagonal
/// closest to the boundary tangent.
class GridDomain {
public:
    GridDomain(const Lattice& lattice, Obstacle obstacle, DomainOptions options = {});

    const Lattice& lattice() const noexcept { return lattice_; }
    const Obstacle& obstacle() const noexcept { return obstacle_; }
    const DomainOptions& options() const noexcept { return options_; }
    const Mesh& mesh() const noexcept { return mesh_; }
    double h() const noexcept { return lattice_.h; }
    std::size_t node_count() const noexcept { return type_.size(); }

    NodeType type(std::size_t node) const { return type_[node]; }
    bool is_free(std::size_t node) const { return type_[node] == NodeType::interior; }
    /// Mesh position (differs from the lattice position for moved nodes).
    const P2& position(std::size_t node) const { return pos_[node]; }
    P2 lattice_position(std::size_t node) const;
    const std::vector<int>& free_nodes() const noexcept { return free_nodes_; }
    /// Index among unknowns, or -1 for constrained nodes.
    int free_index(std::size_t node) const { return free_index_[node]; }
    std::size_t moved_node_count() const noexcept { return moved_; }

    /// Triangles having at least one obstacle node.
    const std::vector<int>& boundary_triangles() const noexcept { return boundary_tris_; }
    /// Interior nodes with an obstacle node among their 8 neighbours.
    const std::vector<int>& boundary_layer() const noexcept { return boundary_layer_; }

    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    void classify();
    void validate();
    void fit_boundary();
    void build_mesh();
    bool orient_ok(const std::array<int, 3>& t) const;

    Lattice lattice_;
    Obstacle obstacle_;
    DomainOptions options_;
    std::vector<NodeType> type_;
    std::vector<P2> pos_;
    std::vector<int> free_nodes_;
    std::vector<int> free_index_;
    std::vector<int> boundary_tris_;
    std::vector<int> boundary_layer_;
    std::vector<std::string> warnings_;
    std::size_t moved_ = 0;
    Mesh mesh_;
};

} // namespace iamcf
