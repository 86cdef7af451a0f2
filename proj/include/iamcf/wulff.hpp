#pragma once

#include "iamcf/lattice.hpp"
#include "iamcf/norm.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace iamcf {

/// W_r(x0) = { x : F°(x - x0) < r }.
struct WulffShape {
    MinkowskiNorm norm;
    Vec center;
    double r = 1.0;

    WulffShape(MinkowskiNorm f, Vec x0, double radius);
    double gauge(const Vec& x) const { return norm.polar(x - center); }
    bool contains(const Vec& x) const { return gauge(x) < r; }
};

using P2 = Eigen::Vector2d;

/// Oriented segment a -> b of a planar contour. The enclosed region lies to
/// the left, so the outward Euclidean normal is the right-hand perpendicular.
struct Facet {
    int a = 0;
    int b = 0;
    P2 nu = P2::Zero();
    double measure = 0.0;
    double hf = std::numeric_limits<double>::quiet_NaN();
};

/// Planar polyline contour (one or more loops) with per-facet normals.
struct Contour {
    std::vector<P2> vertices;
    std::vector<Facet> facets;

    bool empty() const noexcept { return facets.empty(); }
    /// Recompute normals and lengths from the current vertex positions.
    void refresh_geometry();
    /// Every vertex starts exactly one facet and ends exactly one facet.
    bool is_closed() const;
    /// Signed area enclosed (positive for counter-clockwise loops).
    double signed_area() const;
    /// Copy with every vertex moved by x -> x + s V(x).
    Contour displaced(const std::function<P2(const P2&)>& V, double s) const;
    P2 midpoint(const Facet& f) const { return 0.5 * (vertices[f.a] + vertices[f.b]); }
};

/// Closed counter-clockwise polygon x0 + r d(theta) / F°(d(theta)).
Contour sample_wulff_boundary(const WulffShape& shape, int resolution);

/// nu_F = F_xi(nu).
Vec anisotropic_normal(const MinkowskiNorm& F, const Vec& nu);

/// sum over facets of F(nu) * length.
double sigma_F(const MinkowskiNorm& F, const Contour& c);

/// Fill facet H_F by interpolating a nodal H_F field at facet midpoints.
/// Facets whose interpolation stencil touches a masked node keep NaN.
void attach_HF(Contour& c, const MaskedField& hf, const Lattice& lattice);

struct FirstVariation {
    double lhs = 0.0;        ///< central difference of sigma_F(N_s) at step s
    double lhs_coarse = 0.0; ///< same at step 2s
    double rhs = 0.0;        ///< sum of H_F <V, nu> |facet|
    bool nonlinear_warning = false;
    int facets_without_hf = 0;
};

/// Compare d/ds sigma_F(N + sV) with the curvature integral. `V` is applied to
/// contour vertices; the field itself is untouched.
FirstVariation first_variation_check(const MinkowskiNorm& F, const Contour& c,
                                     const std::function<P2(const P2&)>& V, double s_step);

/// CSV with columns x,y,nux,nuy,measure,H_F (one row per facet, at the midpoint).
void write_contour_csv(const Contour& c, const std::string& path);

} // namespace iamcf
