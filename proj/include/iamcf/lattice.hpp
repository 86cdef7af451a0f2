#pragma once

#include "iamcf/norm.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace iamcf {

/// Uniform node lattice in 2 or 3 dimensions. Node (i, j, k) sits at
/// origin + h * (i, j, k); linear index is i-major: ((i * dims[1]) + j) * dims[2] + k.
struct Lattice {
    int n = 2;
    std::array<int, 3> dims{1, 1, 1};
    double h = 1.0;
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    static Lattice square(int cells, double lo, double hi);
    static Lattice cube(int cells, double lo, double hi);

    std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(dims[0]) * dims[1] * (n == 3 ? dims[2] : 1);
    }
    std::size_t index(int i, int j, int k = 0) const noexcept
    {
        return (static_cast<std::size_t>(i) * dims[1] + j) * (n == 3 ? dims[2] : 1) + k;
    }
    std::array<int, 3> coords(std::size_t idx) const noexcept;
    Vec position(std::size_t idx) const;
    /// Lattice stride along axis `a`.
    std::size_t stride(int a) const noexcept;
    bool on_edge(std::size_t idx) const noexcept;
};

enum class FieldMeaning { v_p, u_p, u_limit, generic };
std::string to_string(FieldMeaning m);

struct ScalarField {
    Lattice lattice;
    std::vector<double> values;
    FieldMeaning meaning = FieldMeaning::generic;

    ScalarField() = default;
    ScalarField(Lattice lat, FieldMeaning m, double fill = 0.0)
        : lattice(lat), values(lat.size(), fill), meaning(m) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const noexcept { return values.size(); }

    /// Multilinear interpolation; points outside the lattice are clamped.
    double interpolate(const Vec& x) const;
};

/// Sample f at every lattice node.
template <class Fn>
ScalarField sample(const Lattice& lat, FieldMeaning m, Fn&& f)
{
    ScalarField s(lat, m);
    for (std::size_t i = 0; i < lat.size(); ++i) s.values[i] = f(lat.position(i));
    return s;
}

/// Nodal gradient by centred differences (one-sided on lattice edges).
std::vector<Vec> nodal_gradient(const ScalarField& u);
/// Gradient at a single node, same stencil as nodal_gradient.
Vec gradient_at(const ScalarField& u, std::size_t idx);

/// Value plus validity flag; invalid entries carry value 0.
struct MaskedValue {
    double value = 0.0;
    bool valid = false;
};

struct MaskedField {
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    std::size_t masked_count() const;
};

/// H_F = div F_xi(grad u) at one node in conservative form: F_xi is evaluated
/// on the gradient at the 2n cell-face midpoints around the node and
/// differenced across each face pair. Invalid on the lattice edge and when the
/// node or face gradient falls below `floor` in F.
MaskedValue level_set_HF(const MinkowskiNorm& F, const ScalarField& u, std::size_t node,
                         double floor = 1e-10);
MaskedField level_set_HF_field(const MinkowskiNorm& F, const ScalarField& u, double floor = 1e-10);

// ---- export ----------------------------------------------------------------

/// CSV with columns i,j,x,y,value (plus k,z in 3D).
void write_field_csv(const ScalarField& f, const std::string& path);
/// Binary block: "IAMCFFLD" magic, uint32 n, n x int64 dims, float64 h,
/// n x float64 origin, then row-major float64 payload; all little-endian.
void write_field_binary(const ScalarField& f, const std::string& path);
ScalarField read_field_binary(const std::string& path);

} // namespace iamcf
