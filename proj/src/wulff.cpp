#include "iamcf/wulff.hpp"

#include "iamcf/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace iamcf {

WulffShape::WulffShape(MinkowskiNorm f, Vec x0, double radius)
    : norm(std::move(f)), center(std::move(x0)), r(radius)
{
    if (center.size() != norm.dim()) throw DimensionMismatch("Wulff centre dimension differs from norm");
    if (!(r > 0.0)) throw Error("Wulff radius must be positive");
}

void Contour::refresh_geometry()
{
    for (Facet& f : facets) {
        const P2 d = vertices[f.b] - vertices[f.a];
        f.measure = d.norm();
        f.nu = f.measure > 0.0 ? P2(P2(d.y(), -d.x()) / f.measure) : P2(P2::Zero());
    }
}

bool Contour::is_closed() const
{
    std::vector<int> starts(vertices.size(), 0), ends(vertices.size(), 0);
    for (const Facet& f : facets) {
        ++starts[f.a];
        ++ends[f.b];
    }
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (starts[i] != 1 || ends[i] != 1) return false;
    return !facets.empty();
}

double Contour::signed_area() const
{
    double s = 0.0;
    for (const Facet& f : facets) {
        const P2& a = vertices[f.a];
        const P2& b = vertices[f.b];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * s;
}

Contour Contour::displaced(const std::function<P2(const P2&)>& V, double s) const
{
    Contour out = *this;
    for (P2& x : out.vertices) x += s * V(x);
    out.refresh_geometry();
    return out;
}

Contour sample_wulff_boundary(const WulffShape& shape, int resolution)
{
    if (shape.norm.dim() != 2) throw DimensionMismatch("facet contours are planar only");
    if (resolution < 8) throw Error("Wulff boundary sampling needs resolution >= 8");
    Contour c;
    c.vertices.reserve(resolution);
    for (int k = 0; k < resolution; ++k) {
        const double t = 2.0 * std::numbers::pi * k / resolution;
        Vec d(2);
        d << std::cos(t), std::sin(t);
        const double g = shape.norm.polar(d);
        c.vertices.emplace_back(shape.center[0] + shape.r * d[0] / g, shape.center[1] + shape.r * d[1] / g);
    }
    c.facets.resize(resolution);
    for (int k = 0; k < resolution; ++k) {
        c.facets[k].a = k;
        c.facets[k].b = (k + 1) % resolution;
    }
    c.refresh_geometry();
    return c;
}

Vec anisotropic_normal(const MinkowskiNorm& F, const Vec& nu)
{
    return F.grad(nu);
}

double sigma_F(const MinkowskiNorm& F, const Contour& c)
{
    if (F.dim() != 2) throw DimensionMismatch("facet contours are planar only");
    double s = 0.0;
    for (const Facet& f : c.facets)
        if (f.measure > 0.0) s += F.eval2(f.nu.x(), f.nu.y()) * f.measure;
    return s;
}

void attach_HF(Contour& c, const MaskedField& hf, const Lattice& L)
{
    if (L.n != 2) throw DimensionMismatch("facet contours are planar only");
    for (Facet& f : c.facets) {
        const P2 m = c.midpoint(f);
        const double sx = (m.x() - L.origin[0]) / L.h;
        const double sy = (m.y() - L.origin[1]) / L.h;
        const int i = static_cast<int>(std::floor(sx));
        const int j = static_cast<int>(std::floor(sy));
        f.hf = std::numeric_limits<double>::quiet_NaN();
        if (i < 0 || j < 0 || i + 1 >= L.dims[0] || j + 1 >= L.dims[1]) continue;
        const std::size_t k00 = L.index(i, j), k10 = L.index(i + 1, j);
        const std::size_t k01 = L.index(i, j + 1), k11 = L.index(i + 1, j + 1);
        if (!hf.valid[k00] || !hf.valid[k10] || !hf.valid[k01] || !hf.valid[k11]) continue;
        const double tx = sx - i, ty = sy - j;
        f.hf = (1 - tx) * (1 - ty) * hf.values[k00] + tx * (1 - ty) * hf.values[k10]
               + (1 - tx) * ty * hf.values[k01] + tx * ty * hf.values[k11];
    }
}

FirstVariation first_variation_check(const MinkowskiNorm& F, const Contour& c,
                                     const std::function<P2(const P2&)>& V, double s_step)
{
    if (!(s_step > 0.0)) throw Error("first variation step must be positive");
    FirstVariation out;
    auto diff = [&](double s) {
        return (sigma_F(F, c.displaced(V, s)) - sigma_F(F, c.displaced(V, -s))) / (2.0 * s);
    };
    out.lhs = diff(s_step);
    out.lhs_coarse = diff(2.0 * s_step);
    // Richardson comparison against the doubled step.
    const double scale = std::max(std::abs(out.lhs), 1e-12);
    out.nonlinear_warning = std::abs(out.lhs_coarse - out.lhs) > 0.01 * scale;
    for (const Facet& f : c.facets) {
        if (std::isnan(f.hf)) {
            ++out.facets_without_hf;
            continue;
        }
        out.rhs += f.hf * V(c.midpoint(f)).dot(f.nu) * f.measure;
    }
    return out;
}

void write_contour_csv(const Contour& c, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "x,y,nux,nuy,measure,H_F\n" << std::setprecision(15);
    for (const Facet& f : c.facets) {
        const P2 m = c.midpoint(f);
        os << m.x() << ',' << m.y() << ',' << f.nu.x() << ',' << f.nu.y() << ',' << f.measure << ',';
        if (std::isnan(f.hf))
            os << "nan";
        else
            os << f.hf;
        os << '\n';
    }
    if (!os) throw Error("write failed for " + path);
}

} // namespace iamcf
