#pragma once

#include "iamcf/lattice.hpp"
#include "iamcf/wulff.hpp"

namespace iamcf {

/// Marching-squares extraction of the level set {u = t} from a planar field.
///
/// The sublevel set {u < t} is kept on the left of every facet, so facet
/// normals point towards increasing u and closed loops around a sublevel set
/// run counter-clockwise. Crossing points are placed by linear interpolation
/// along lattice edges and shared between neighbouring cells, which makes the
/// result a proper polyline. Saddle cells are resolved with the average of
/// the four corner values. Curves that reach the edge of the lattice stay
/// open.
Contour extract_contour(const ScalarField& u, double t);

/// Number of closed loops in a contour (open chains are not counted).
int closed_loop_count(const Contour& c);

/// Boundary of the obstacle as a closed counter-clockwise contour. Wulff
/// shapes are sampled with `resolution` facets, polygons use their edges.
Contour obstacle_contour(const class Obstacle& obstacle, int resolution = 1024);

} // namespace iamcf
