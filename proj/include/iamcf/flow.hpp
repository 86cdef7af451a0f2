#pragma once

#include "iamcf/contour.hpp"
#include "iamcf/domain.hpp"
#include "iamcf/lattice.hpp"
#include "iamcf/norm.hpp"

#include <cstdint>
#include <vector>

namespace iamcf {

/// One time slice N_t = boundary of E_t = {u < t}.
struct FlowSnapshot {
    double t = 0.0;
    Contour contour;
    double sigma_F = 0.0;
    /// Fraction of facets lying in a cell with a node where F(grad u) is below the floor.
    double masked_fraction = 0.0;
    bool closed = false;
};

/// Empty snapshot when t lies outside the range of u.
FlowSnapshot extract_sublevel(const MinkowskiNorm& F, const ScalarField& u, double t, double floor = 1e-10);

/// Every vertex of N_{t1} has interpolated u below t2 (t1 < t2).
struct NestingReport {
    double max_value = 0.0; ///< largest interpolated u over the vertices of N_{t1}
    bool pass = false;
};
NestingReport nesting_check(const ScalarField& u, double t1, double t2);

/// Co-area estimate of sigma_F(N_t): sum over free nodes of
/// F(grad u) k_w(u - t) h^2 with a hat kernel k_w of half-width
/// w = width_cells * h * (mean F(grad u) on N_t).
double coarea_sigma(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u, double t,
                    double width_cells = 3.0);

struct GrowthRow {
    double t = 0.0;
    double sigma_contour = 0.0;
    double sigma_coarea = 0.0;
    double predicted = 0.0;   ///< e^t sigma_F(N_0)
    double ratio_contour = 0.0; ///< sigma_contour / predicted
    double ratio_coarea = 0.0;
    bool closed = false;
};

struct GrowthSeries {
    double sigma0 = 0.0; ///< sigma_F of the obstacle boundary
    /// E_0 must be an F-minimizing hull; certified here only for convex obstacles.
    bool hypothesis_verified = false;
    std::vector<GrowthRow> rows;
};

GrowthSeries area_growth_series(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u,
                                const std::vector<double>& times);

struct CurvatureResidual {
    double t = 0.0;
    double max_rel = 0.0;
    double mean_rel = 0.0;
    std::size_t vertices = 0;
    std::size_t masked = 0;
    double masked_fraction = 0.0;
};

/// |H_F - F(grad u)| / F(grad u) at the vertices of N_t, both sides
/// interpolated bilinearly from nodal values. A vertex is masked when a node
/// of its cell has no valid H_F or, given a domain, lies within two cells of
/// the obstacle. Throws for open or empty contours and when every vertex is
/// masked.
CurvatureResidual weak_curvature_residual(const MinkowskiNorm& F, const ScalarField& u, double t,
                                          const GridDomain* domain = nullptr, double floor = 1e-10);

/// J(phi) = sum over cells meeting K of h^2 [F(grad phi) + phi F(grad u)] at the
/// cell centre, each cell weighted by the fraction of its corners in K.
/// Throws when phi differs from u outside K.
double J_functional(const MinkowskiNorm& F, const ScalarField& u, const ScalarField& phi,
                    const std::vector<std::uint8_t>& K);

struct MinimalityConfig {
    int trials = 200;
    std::uint64_t seed = 20240611;
    double C = 2.0;                ///< slack = C h |K|
    double amplitude = 0.5;        ///< bump height as a fraction of |u| at the bump centre
    double min_half_width = 0.25;  ///< half-width range of the square support, in length units
    double max_half_width = 1.0;
    double sample_radius_factor = 4.0; ///< centres satisfy F°(c - x0) <= factor * circumradius
};

struct MinimalityTrial {
    int index = 0;
    std::uint64_t seed = 0;
    P2 centre = P2::Zero();
    double half_width = 0.0;
    double amplitude = 0.0;
    double measure_K = 0.0;
    double J_u = 0.0;
    double J_phi = 0.0;
    double margin = 0.0; ///< J_phi - J_u
    double slack = 0.0;
    bool pass = false;
};

struct MinimalityReport {
    std::uint64_t seed = 0;
    double C = 0.0;
    std::vector<MinimalityTrial> trials;
    double worst_margin = 0.0;         ///< smallest J_phi - J_u
    double worst_scaled_margin = 0.0;  ///< smallest (J_phi - J_u) / (h |K|)
    int failures = 0;
    bool pass = false;
};

/// Random cos^2 tensor bumps on square supports K inside the free region.
/// Trial k draws from a generator seeded with seed + k, so any trial can be
/// replayed on its own.
MinimalityReport minimality_spot_check(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u,
                                       const MinimalityConfig& cfg = {});

/// u on the free layer next to the box edge against u on the mid annulus
/// 0.4 L <= F°(x - x0) <= 0.5 L (L = distance from x0 to the nearest box edge).
struct PropernessReport {
    double min_outer = 0.0;
    double max_mid = 0.0;
    bool pass = false;
};
PropernessReport properness_proxy(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u);

/// max F(grad v)/v on the outermost 10% of the box against the mid annulus
/// 0.45 L <= |x - x0|_inf <= 0.55 L.
struct DecayReport {
    double outer = 0.0;
    double mid = 0.0;
    bool pass = false;
};
DecayReport decay_proxy(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& v);

} // namespace iamcf
