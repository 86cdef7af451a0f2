#include "iamcf/obstacle.hpp"

#include "iamcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace iamcf {

namespace {

Vec to_vec(const P2& p)
{
    Vec v(2);
    v << p.x(), p.y();
    return v;
}

P2 to_p2(const Vec& v) { return {v[0], v[1]}; }

double cross(const P2& a, const P2& b) { return a.x() * b.y() - a.y() * b.x(); }

P2 closest_on_segment(const P2& a, const P2& b, const P2& x)
{
    const P2 d = b - a;
    const double L2 = d.squaredNorm();
    double t = L2 > 0.0 ? (x - a).dot(d) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * d;
}

constexpr int kWulffSamples = 4096;

} // namespace

Polygon::Polygon(std::vector<P2> pts) : vertices(std::move(pts))
{
    if (vertices.size() < 3) throw DomainError("polygon obstacle needs at least 3 vertices");
    double area2 = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k)
        area2 += cross(vertices[k], vertices[(k + 1) % vertices.size()]);
    if (std::abs(area2) == 0.0) throw DomainError("polygon obstacle has zero area");
    if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
    const std::size_t m = vertices.size();
    normals.resize(m);
    offsets.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const P2 d = vertices[(k + 1) % m] - vertices[k];
        if (d.norm() == 0.0) throw DomainError("polygon obstacle has repeated vertices");
        normals[k] = P2(d.y(), -d.x()).normalized();
        offsets[k] = normals[k].dot(vertices[k]);
        const P2 e = vertices[(k + 2) % m] - vertices[(k + 1) % m];
        if (cross(d, e) < -1e-12 * d.norm() * e.norm()) convex = false;
    }
}

P2 Polygon::centroid() const
{
    double A = 0.0;
    P2 c = P2::Zero();
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const P2& a = vertices[k];
        const P2& b = vertices[(k + 1) % vertices.size()];
        const double w = cross(a, b);
        A += w;
        c += w * (a + b);
    }
    return c / (3.0 * A);
}

bool Polygon::contains(const P2& x) const
{
    if (convex) {
        for (std::size_t k = 0; k < normals.size(); ++k)
            if (normals[k].dot(x) > offsets[k]) return false;
        return true;
    }
    if (distance(x) == 0.0) return true;
    bool inside = false;
    for (std::size_t k = 0, j = vertices.size() - 1; k < vertices.size(); j = k++) {
        const P2& a = vertices[k];
        const P2& b = vertices[j];
        if ((a.y() > x.y()) != (b.y() > x.y())
            && x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
    }
    return inside;
}

P2 Polygon::closest_boundary_point(const P2& x) const
{
    P2 best = vertices[0];
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const P2 c = closest_on_segment(vertices[k], vertices[(k + 1) % vertices.size()], x);
        const double d = (c - x).squaredNorm();
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    return best;
}

double Polygon::distance(const P2& x) const
{
    return (closest_boundary_point(x) - x).norm();
}

Obstacle Obstacle::wulff(WulffShape shape)
{
    if (shape.norm.dim() != 2) throw DimensionMismatch("grid obstacles are planar");
    return Obstacle(std::move(shape));
}

Obstacle Obstacle::polygon(std::vector<P2> vertices)
{
    return Obstacle(Polygon(std::move(vertices)));
}

bool Obstacle::convex() const noexcept
{
    return is_wulff() || as_polygon().convex;
}

bool Obstacle::contains(const P2& x) const
{
    if (is_wulff()) return as_wulff().gauge(to_vec(x)) <= as_wulff().r;
    return as_polygon().contains(x);
}

double Obstacle::distance_outside(const P2& x) const
{
    if (is_wulff()) {
        const WulffShape& W = as_wulff();
        const Vec d = to_vec(x) - W.center;
        const double g = W.norm.polar(d);
        if (g <= W.r) return 0.0;
        return (g - W.r) / W.norm.polar_grad(d).norm();
    }
    const Polygon& P = as_polygon();
    return P.contains(x) ? 0.0 : P.distance(x);
}

P2 Obstacle::project(const P2& x) const
{
    if (is_wulff()) {
        const WulffShape& W = as_wulff();
        const Vec d = to_vec(x) - W.center;
        const double g = W.norm.polar(d);
        if (g == 0.0) throw DomainError("cannot project the Wulff centre onto the boundary");
        return to_p2(W.center + (W.r / g) * d);
    }
    return as_polygon().closest_boundary_point(x);
}

P2 Obstacle::outward_direction(const P2& x) const
{
    if (is_wulff()) {
        const WulffShape& W = as_wulff();
        const Vec d = to_vec(x) - W.center;
        if (d.norm() < kGradFloor) return P2(1.0, 0.0);
        return to_p2(W.norm.polar_grad(d)).normalized();
    }
    const Polygon& P = as_polygon();
    if (!P.contains(x)) {
        const P2 d = x - P.closest_boundary_point(x);
        if (d.norm() > 0.0) return d.normalized();
    }
    std::size_t best = 0;
    double bd = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < P.normals.size(); ++k) {
        const double s = P.normals[k].dot(x) - P.offsets[k];
        if (s > bd) {
            bd = s;
            best = k;
        }
    }
    return P.normals[best];
}

P2 Obstacle::reference_center() const
{
    if (is_wulff()) return to_p2(as_wulff().center);
    return as_polygon().centroid();
}

double Obstacle::circumradius() const
{
    const P2 c = reference_center();
    double R = 0.0;
    if (is_wulff()) {
        std::vector<P2> pts, nrm;
        boundary_samples(0.0, pts, nrm);
        for (const P2& p : pts) R = std::max(R, (p - c).norm());
    } else {
        for (const P2& v : as_polygon().vertices) R = std::max(R, (v - c).norm());
    }
    return R;
}

void Obstacle::bounding_box(P2& lo, P2& hi) const
{
    if (is_wulff()) {
        // Support function of W_r(x0) in direction e is x0.e + r F(e).
        const WulffShape& W = as_wulff();
        for (int a = 0; a < 2; ++a) {
            Vec e = Vec::Zero(2);
            e[a] = 1.0;
            const double ext = W.r * W.norm.eval(e);
            lo[a] = W.center[a] - ext;
            hi[a] = W.center[a] + ext;
        }
        return;
    }
    lo = hi = as_polygon().vertices.front();
    for (const P2& v : as_polygon().vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
}

bool Obstacle::is_wulff_of(const MinkowskiNorm& F) const
{
    if (!is_wulff()) return false;
    const MinkowskiNorm& G = as_wulff().norm;
    if (G.kind() != F.kind() || G.dim() != F.dim()) return false;
    switch (F.kind()) {
    case NormKind::euclidean: return true;
    case NormKind::ellipsoidal: return (G.matrix() - F.matrix()).cwiseAbs().maxCoeff() == 0.0;
    case NormKind::lq: return G.q() == F.q() && G.smoothing() == F.smoothing();
    case NormKind::custom: return false;
    }
    return false;
}

WulffBall Obstacle::inner_wulff(const MinkowskiNorm& F) const
{
    const P2 x0 = reference_center();
    if (is_wulff_of(F)) return {x0, as_wulff().r};
    if (!is_wulff() && as_polygon().convex) {
        // W_r(x0) lies in {n.x <= c} iff n.x0 + r F(n) <= c.
        const Polygon& P = as_polygon();
        double r = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < P.normals.size(); ++k)
            r = std::min(r, (P.offsets[k] - P.normals[k].dot(x0)) / F.eval(to_vec(P.normals[k])));
        return {x0, r};
    }
    std::vector<P2> pts, nrm;
    boundary_samples(0.0, pts, nrm);
    double r = std::numeric_limits<double>::infinity();
    for (const P2& p : pts) r = std::min(r, F.polar(to_vec(p - x0)));
    return {x0, r};
}

WulffBall Obstacle::outer_wulff(const MinkowskiNorm& F) const
{
    const P2 y0 = reference_center();
    if (is_wulff_of(F)) return {y0, as_wulff().r};
    double s = 0.0;
    if (!is_wulff()) {
        for (const P2& v : as_polygon().vertices) s = std::max(s, F.polar(to_vec(v - y0)));
        return {y0, s};
    }
    std::vector<P2> pts, nrm;
    boundary_samples(0.0, pts, nrm);
    for (const P2& p : pts) s = std::max(s, F.polar(to_vec(p - y0)));
    return {y0, s};
}

void Obstacle::boundary_samples(double spacing, std::vector<P2>& pts, std::vector<P2>& normals) const
{
    pts.clear();
    normals.clear();
    if (is_wulff()) {
        const WulffShape& W = as_wulff();
        int m = kWulffSamples;
        if (spacing > 0.0) {
            const double perim = sigma_F(MinkowskiNorm::euclidean(2), sample_wulff_boundary(W, 256));
            m = std::max(64, static_cast<int>(std::ceil(perim / spacing)));
        }
        Contour c = sample_wulff_boundary(W, m);
        for (const P2& v : c.vertices) {
            pts.push_back(v);
            normals.push_back(outward_direction(v));
        }
        return;
    }
    const Polygon& P = as_polygon();
    const std::size_t nv = P.vertices.size();
    for (std::size_t k = 0; k < nv; ++k) {
        const P2& a = P.vertices[k];
        const P2& b = P.vertices[(k + 1) % nv];
        const double L = (b - a).norm();
        const int m = spacing > 0.0 ? std::max(1, static_cast<int>(std::ceil(L / spacing))) : 256;
        for (int i = 0; i < m; ++i) {
            pts.push_back(a + ((i + 0.5) / m) * (b - a));
            normals.push_back(P.normals[k]);
        }
    }
}

std::string Obstacle::describe() const
{
    std::ostringstream os;
    if (is_wulff()) {
        const WulffShape& W = as_wulff();
        os << "wulff(center=(" << W.center[0] << "," << W.center[1] << "), r=" << W.r
           << ", norm=" << W.norm.describe() << ")";
    } else {
        os << "polygon(";
        for (std::size_t k = 0; k < as_polygon().vertices.size(); ++k) {
            const P2& v = as_polygon().vertices[k];
            os << (k ? " " : "") << "(" << v.x() << "," << v.y() << ")";
        }
        os << ")";
    }
    return os.str();
}

} // namespace iamcf
