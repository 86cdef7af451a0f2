#pragma once

#include "iamcf/wulff.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace iamcf {

/// Closed polygon, stored counter-clockwise. Edge k runs from vertex k to k+1
/// and has outward unit normal normals[k] with support offsets[k]:
/// the polygon is { x : normals[k] . x <= offsets[k] } when convex.
struct Polygon {
    std::vector<P2> vertices;
    std::vector<P2> normals;
    std::vector<double> offsets;
    bool convex = true;

    explicit Polygon(std::vector<P2> pts);
    P2 centroid() const;
    bool contains(const P2& x) const;
    double distance(const P2& x) const;
    P2 closest_boundary_point(const P2& x) const;
};

struct WulffBall {
    P2 center;
    double radius;
};

/// The compact set Omega^c: a Wulff shape or a polygon.
class Obstacle {
public:
    static Obstacle wulff(WulffShape shape);
    static Obstacle polygon(std::vector<P2> vertices);

    bool is_wulff() const noexcept { return std::holds_alternative<WulffShape>(shape_); }
    const WulffShape& as_wulff() const { return std::get<WulffShape>(shape_); }
    const Polygon& as_polygon() const { return std::get<Polygon>(shape_); }
    bool convex() const noexcept;

    /// Closed membership test.
    bool contains(const P2& x) const;
    /// Approximate Euclidean distance from an outside point to the boundary.
    double distance_outside(const P2& x) const;
    /// Boundary point associated with x (radial for Wulff shapes, nearest for polygons).
    P2 project(const P2& x) const;
    /// Euclidean direction of increasing distance from the obstacle at x.
    P2 outward_direction(const P2& x) const;

    P2 reference_center() const;
    double circumradius() const;
    void bounding_box(P2& lo, P2& hi) const;

    /// Largest W_r(x0) of norm F inside the obstacle, with x0 = reference_center().
    WulffBall inner_wulff(const MinkowskiNorm& F) const;
    /// Smallest W_s(y0) of norm F containing the obstacle, with y0 = reference_center().
    WulffBall outer_wulff(const MinkowskiNorm& F) const;
    /// True when the obstacle is a Wulff shape of F itself.
    bool is_wulff_of(const MinkowskiNorm& F) const;

    /// Boundary samples with Euclidean outward normals. Polygon samples skip
    /// vertices; spacing is at most `spacing`.
    void boundary_samples(double spacing, std::vector<P2>& pts, std::vector<P2>& normals) const;

    std::string describe() const;

private:
    explicit Obstacle(std::variant<WulffShape, Polygon> s) : shape_(std::move(s)) {}
    std::variant<WulffShape, Polygon> shape_;
};

} // namespace iamcf
