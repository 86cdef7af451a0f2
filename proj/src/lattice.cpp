#include "iamcf/lattice.hpp"

#include "iamcf/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace iamcf {

namespace {

constexpr char kMagic[8] = {'I', 'A', 'M', 'C', 'F', 'F', 'L', 'D'};

template <class T>
void put_le(std::ostream& os, T value)
{
    unsigned char b[sizeof(T)];
    std::memcpy(b, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error("truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T value;
    std::memcpy(&value, b, sizeof(T));
    return value;
}

} // namespace

Lattice Lattice::square(int cells, double lo, double hi)
{
    if (cells < 2 || !(hi > lo)) throw DomainError("lattice needs at least 2 cells and hi > lo");
    Lattice L;
    L.n = 2;
    L.dims = {cells + 1, cells + 1, 1};
    L.h = (hi - lo) / cells;
    L.origin = {lo, lo, 0.0};
    return L;
}

Lattice Lattice::cube(int cells, double lo, double hi)
{
    if (cells < 2 || !(hi > lo)) throw DomainError("lattice needs at least 2 cells and hi > lo");
    Lattice L;
    L.n = 3;
    L.dims = {cells + 1, cells + 1, cells + 1};
    L.h = (hi - lo) / cells;
    L.origin = {lo, lo, lo};
    return L;
}

std::array<int, 3> Lattice::coords(std::size_t idx) const noexcept
{
    std::array<int, 3> c{0, 0, 0};
    if (n == 3) {
        c[2] = static_cast<int>(idx % dims[2]);
        idx /= dims[2];
    }
    c[1] = static_cast<int>(idx % dims[1]);
    c[0] = static_cast<int>(idx / dims[1]);
    return c;
}

Vec Lattice::position(std::size_t idx) const
{
    auto c = coords(idx);
    Vec x(n);
    for (int a = 0; a < n; ++a) x[a] = origin[a] + h * c[a];
    return x;
}

std::size_t Lattice::stride(int a) const noexcept
{
    const std::size_t sk = 1;
    const std::size_t sj = (n == 3 ? dims[2] : 1);
    const std::size_t si = sj * dims[1];
    return a == 0 ? si : (a == 1 ? sj : sk);
}

bool Lattice::on_edge(std::size_t idx) const noexcept
{
    auto c = coords(idx);
    for (int a = 0; a < n; ++a)
        if (c[a] == 0 || c[a] == dims[a] - 1) return true;
    return false;
}

std::string to_string(FieldMeaning m)
{
    switch (m) {
    case FieldMeaning::v_p: return "v_p";
    case FieldMeaning::u_p: return "u_p";
    case FieldMeaning::u_limit: return "u_limit";
    case FieldMeaning::generic: return "generic";
    }
    return "generic";
}

double ScalarField::interpolate(const Vec& x) const
{
    const Lattice& L = lattice;
    std::array<int, 3> i0{0, 0, 0};
    std::array<double, 3> t{0.0, 0.0, 0.0};
    for (int a = 0; a < L.n; ++a) {
        double s = (x[a] - L.origin[a]) / L.h;
        s = std::clamp(s, 0.0, static_cast<double>(L.dims[a] - 1));
        int k = std::min(static_cast<int>(std::floor(s)), L.dims[a] - 2);
        i0[a] = k;
        t[a] = s - k;
    }
    double acc = 0.0;
    const int corners = 1 << L.n;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::array<int, 3> ii = i0;
        for (int a = 0; a < L.n; ++a) {
            const int bit = (c >> a) & 1;
            ii[a] += bit;
            w *= bit ? t[a] : 1.0 - t[a];
        }
        if (w != 0.0) acc += w * values[L.index(ii[0], ii[1], ii[2])];
    }
    return acc;
}

Vec gradient_at(const ScalarField& u, std::size_t idx)
{
    const Lattice& L = u.lattice;
    auto c = L.coords(idx);
    Vec g(L.n);
    for (int a = 0; a < L.n; ++a) {
        const std::size_t s = L.stride(a);
        if (c[a] == 0)
            g[a] = (u.values[idx + s] - u.values[idx]) / L.h;
        else if (c[a] == L.dims[a] - 1)
            g[a] = (u.values[idx] - u.values[idx - s]) / L.h;
        else
            g[a] = (u.values[idx + s] - u.values[idx - s]) / (2.0 * L.h);
    }
    return g;
}

std::vector<Vec> nodal_gradient(const ScalarField& u)
{
    std::vector<Vec> g(u.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(u.size()); ++i)
        g[i] = gradient_at(u, static_cast<std::size_t>(i));
    return g;
}

std::size_t MaskedField::masked_count() const
{
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

namespace {

/// Gradient at the midpoint between `lo` and lo + stride(a): the difference
/// along a, the average of the two centred differences across a.
Vec half_point_gradient(const ScalarField& u, std::size_t lo, int a)
{
    const Lattice& L = u.lattice;
    const std::size_t hi = lo + L.stride(a);
    Vec g(L.n);
    for (int b = 0; b < L.n; ++b) {
        if (b == a) {
            g[b] = (u[hi] - u[lo]) / L.h;
        } else {
            const std::size_t t = L.stride(b);
            g[b] = ((u[lo + t] - u[lo - t]) + (u[hi + t] - u[hi - t])) / (4.0 * L.h);
        }
    }
    return g;
}

bool stencil_inside(const Lattice& L, std::size_t node)
{
    const auto c = L.coords(node);
    for (int a = 0; a < L.n; ++a)
        if (c[a] < 1 || c[a] > L.dims[a] - 2) return false;
    return true;
}

} // namespace

MaskedValue level_set_HF(const MinkowskiNorm& F, const ScalarField& u, std::size_t node, double floor)
{
    const Lattice& L = u.lattice;
    if (F.dim() != L.n) throw DimensionMismatch("norm and field dimensions differ");
    if (!stencil_inside(L, node)) return {};
    if (F.eval(gradient_at(u, node)) < floor) return {};
    double div = 0.0;
    for (int a = 0; a < L.n; ++a) {
        const std::size_t s = L.stride(a);
        const Vec gp = half_point_gradient(u, node, a);
        const Vec gm = half_point_gradient(u, node - s, a);
        if (F.eval(gp) < floor || F.eval(gm) < floor) return {};
        div += (F.grad(gp)[a] - F.grad(gm)[a]) / L.h;
    }
    return {div, true};
}

MaskedField level_set_HF_field(const MinkowskiNorm& F, const ScalarField& u, double floor)
{
    const Lattice& L = u.lattice;
    if (F.dim() != L.n) throw DimensionMismatch("norm and field dimensions differ");
    const std::size_t N = u.size();
    // Flux component a of F_xi(grad u) at the midpoint between node i and i + stride(a).
    std::vector<double> flux(N * L.n, 0.0);
    std::vector<std::uint8_t> ok(N * L.n, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(N); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto c = L.coords(i);
        for (int a = 0; a < L.n; ++a) {
            bool inside = c[a] + 1 < L.dims[a];
            for (int b = 0; b < L.n && inside; ++b)
                if (b != a) inside = c[b] >= 1 && c[b] <= L.dims[b] - 2;
            if (!inside) continue;
            const Vec g = half_point_gradient(u, i, a);
            if (F.eval(g) < floor || g.norm() < kGradFloor) continue;
            flux[i * L.n + a] = F.grad(g)[a];
            ok[i * L.n + a] = 1;
        }
    }
    MaskedField out;
    out.values.assign(N, 0.0);
    out.valid.assign(N, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(N); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        if (!stencil_inside(L, i) || F.eval(gradient_at(u, i)) < floor) continue;
        double div = 0.0;
        bool valid = true;
        for (int a = 0; a < L.n && valid; ++a) {
            const std::size_t m = i - L.stride(a);
            valid = ok[i * L.n + a] && ok[m * L.n + a];
            div += (flux[i * L.n + a] - flux[m * L.n + a]) / L.h;
        }
        if (valid) {
            out.values[i] = div;
            out.valid[i] = 1;
        }
    }
    return out;
}

void write_field_csv(const ScalarField& f, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    const Lattice& L = f.lattice;
    os << (L.n == 3 ? "i,j,k,x,y,z,value\n" : "i,j,x,y,value\n");
    os << std::setprecision(17);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        auto c = L.coords(idx);
        Vec x = L.position(idx);
        if (L.n == 3)
            os << c[0] << ',' << c[1] << ',' << c[2] << ',' << x[0] << ',' << x[1] << ',' << x[2];
        else
            os << c[0] << ',' << c[1] << ',' << x[0] << ',' << x[1];
        os << ',' << f.values[idx] << '\n';
    }
    if (!os) throw Error("write failed for " + path);
}

void write_field_binary(const ScalarField& f, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    const Lattice& L = f.lattice;
    os.write(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(L.n));
    for (int a = 0; a < L.n; ++a) put_le<std::int64_t>(os, L.dims[a]);
    put_le<double>(os, L.h);
    for (int a = 0; a < L.n; ++a) put_le<double>(os, L.origin[a]);
    for (double v : f.values) put_le<double>(os, v);
    if (!os) throw Error("write failed for " + path);
}

ScalarField read_field_binary(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw Error(path + " is not a field block");
    Lattice L;
    L.n = static_cast<int>(get_le<std::uint32_t>(is));
    if (L.n < 2 || L.n > 3) throw Error(path + ": unsupported dimension");
    for (int a = 0; a < L.n; ++a) L.dims[a] = static_cast<int>(get_le<std::int64_t>(is));
    L.h = get_le<double>(is);
    for (int a = 0; a < L.n; ++a) L.origin[a] = get_le<double>(is);
    ScalarField f(L, FieldMeaning::generic);
    for (double& v : f.values) v = get_le<double>(is);
    return f;
}

} // namespace iamcf
