#include "iamcf/kernels.hpp"

#include "iamcf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace iamcf {

namespace {

constexpr std::size_t kBlock = 4096;

struct Local {
    double phi;
    double g[3];
};

inline bool degenerate(double F, double area, double vmax)
{
    return F * std::sqrt(2.0 * area) <= kDegenerateRelative * vmax || F == 0.0;
}

inline void grad_of(const std::array<double, 6>& B, const std::array<int, 3>& t,
                    const std::vector<double>& v, double& gx, double& gy, double& vmax)
{
    const double a = v[t[0]], b = v[t[1]], c = v[t[2]];
    gx = B[0] * a + B[1] * b + B[2] * c;
    gy = B[3] * a + B[4] * b + B[5] * c;
    vmax = std::max({std::abs(a), std::abs(b), std::abs(c)});
}

inline double phi_only(const MinkowskiNorm& F, const Mesh& m, std::size_t e,
                       const std::vector<double>& v, const EnergyParams& prm)
{
    double gx, gy, vmax;
    grad_of(m.B[e], m.tri[e], v, gx, gy, vmax);
    const double f = F.eval2(gx, gy);
    const double S = f * f + prm.delta * prm.delta;
    return m.area[e] * std::pow(S, 0.5 * prm.p) / prm.p;
}

inline Local local_terms(const MinkowskiNorm& F, const Mesh& m, std::size_t e,
                         const std::vector<double>& v, const EnergyParams& prm)
{
    double gx, gy, vmax;
    const auto& B = m.B[e];
    grad_of(B, m.tri[e], v, gx, gy, vmax);
    const double w = m.area[e];
    Local L{};
    const double f0 = F.eval2(gx, gy);
    const double S0 = f0 * f0 + prm.delta * prm.delta;
    L.phi = w * std::pow(S0, 0.5 * prm.p) / prm.p;
    if (degenerate(f0, w, vmax)) return L;
    double f, fx[2], H[4];
    F.derivs2(gx, gy, f, fx, H);
    const double S = f * f + prm.delta * prm.delta;
    const double c = std::pow(S, 0.5 * prm.p - 1.0) * f;
    const double dx = c * fx[0], dy = c * fx[1];
    for (int s = 0; s < 3; ++s) L.g[s] = w * (B[s] * dx + B[3 + s] * dy);
    return L;
}

} // namespace

void triangle_hessian(const MinkowskiNorm& F, const Mesh& m, std::size_t e,
                      const std::vector<double>& v, const EnergyParams& prm, double Hl[9])
{
    double gx, gy, vmax;
    const auto& B = m.B[e];
    grad_of(B, m.tri[e], v, gx, gy, vmax);
    const double w = m.area[e];
    const double f0 = F.eval2(gx, gy);
    double H2[4];
    if (degenerate(f0, w, vmax)) {
        // Isotropic surrogate at the degeneracy floor.
        const double ff = kDegenerateRelative * std::max(vmax, 1e-300) / std::sqrt(2.0 * w);
        const double S = ff * ff + prm.delta * prm.delta;
        const double c = std::pow(S, 0.5 * prm.p - 1.0) * std::min(1.0, prm.p - 1.0);
        H2[0] = H2[3] = c;
        H2[1] = H2[2] = 0.0;
    } else {
        double f, fx[2], D2[4];
        F.derivs2(gx, gy, f, fx, D2);
        const double S = f * f + prm.delta * prm.delta;
        const double a = std::pow(S, 0.5 * prm.p - 1.0);
        const double b = (prm.p - 2.0) * std::pow(S, 0.5 * prm.p - 2.0) * f * f;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                H2[2 * i + j] = a * (fx[i] * fx[j] + f * D2[2 * i + j]) + b * fx[i] * fx[j];
    }
    // Hl = w B^T H2 B
    for (int r = 0; r < 3; ++r) {
        const double bx = B[r], by = B[3 + r];
        const double tx = H2[0] * bx + H2[1] * by;
        const double ty = H2[2] * bx + H2[3] * by;
        for (int s = 0; s < 3; ++s) Hl[3 * r + s] = w * (tx * B[s] + ty * B[3 + s]);
    }
}

namespace serial {

double energy(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
              const EnergyParams& prm)
{
    double E = 0.0;
    for (std::size_t e = 0; e < mesh.size(); ++e) E += phi_only(F, mesh, e, v, prm);
    return E;
}

double energy_gradient(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
                       const EnergyParams& prm, std::vector<double>& grad)
{
    grad.assign(v.size(), 0.0);
    double E = 0.0;
    for (std::size_t e = 0; e < mesh.size(); ++e) {
        const Local L = local_terms(F, mesh, e, v, prm);
        E += L.phi;
        for (int s = 0; s < 3; ++s) grad[mesh.tri[e][s]] += L.g[s];
    }
    return E;
}

} // namespace serial

namespace omp {

double energy(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
              const EnergyParams& prm)
{
    const std::size_t m = mesh.size();
    const std::size_t nb = (m + kBlock - 1) / kBlock;
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        double s = 0.0;
        const std::size_t end = std::min(m, (b + 1) * kBlock);
        for (std::size_t e = b * kBlock; e < end; ++e) s += phi_only(F, mesh, e, v, prm);
        partial[b] = s;
    }
    double E = 0.0;
    for (double s : partial) E += s;
    return E;
}

double energy_gradient(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
                       const EnergyParams& prm, std::vector<double>& grad)
{
    const std::size_t m = mesh.size();
    const std::size_t nb = (m + kBlock - 1) / kBlock;
    std::vector<double> loc(3 * m);
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        double s = 0.0;
        const std::size_t end = std::min(m, (b + 1) * kBlock);
        for (std::size_t e = b * kBlock; e < end; ++e) {
            const Local L = local_terms(F, mesh, e, v, prm);
            s += L.phi;
            loc[3 * e] = L.g[0];
            loc[3 * e + 1] = L.g[1];
            loc[3 * e + 2] = L.g[2];
        }
        partial[b] = s;
    }
    grad.assign(v.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) {
        double s = 0.0;
        for (int k = mesh.gather_ptr[i]; k < mesh.gather_ptr[i + 1]; ++k) s += loc[mesh.gather_idx[k]];
        grad[i] = s;
    }
    double E = 0.0;
    for (double s : partial) E += s;
    return E;
}

} // namespace omp

HessianAssembler::HessianAssembler(const GridDomain& domain) : domain_(&domain)
{
    const Mesh& M = domain.mesh();
    const int n = static_cast<int>(domain.free_nodes().size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * M.size());
    for (std::size_t e = 0; e < M.size(); ++e)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const int ra = domain.free_index(M.tri[e][a]);
                const int cb = domain.free_index(M.tri[e][b]);
                if (ra >= 0 && cb >= 0) trip.emplace_back(ra, cb, 0.0);
            }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 0.0);
    H_.resize(n, n);
    H_.setFromTriplets(trip.begin(), trip.end());
    H_.makeCompressed();

    auto find = [&](int row, int col) {
        const int* inner = H_.innerIndexPtr();
        const int lo = H_.outerIndexPtr()[col], hi = H_.outerIndexPtr()[col + 1];
        const int* it = std::lower_bound(inner + lo, inner + hi, row);
        if (it == inner + hi || *it != row) throw SolverError("Hessian pattern lookup failed");
        return static_cast<int>(it - inner);
    };
    slot_.assign(9 * M.size(), -1);
    for (std::size_t e = 0; e < M.size(); ++e)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const int ra = domain.free_index(M.tri[e][a]);
                const int cb = domain.free_index(M.tri[e][b]);
                if (ra >= 0 && cb >= 0) slot_[9 * e + 3 * a + b] = find(ra, cb);
            }
    diag_.resize(n);
    for (int i = 0; i < n; ++i) diag_[i] = find(i, i);
    local_.resize(9 * M.size());
}

void HessianAssembler::assemble(const MinkowskiNorm& F, const std::vector<double>& v,
                                const EnergyParams& prm, bool parallel)
{
    const Mesh& M = domain_->mesh();
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(M.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t e = 0; e < m; ++e) triangle_hessian(F, M, e, v, prm, &local_[9 * e]);
    double* val = H_.valuePtr();
    std::fill(val, val + H_.nonZeros(), 0.0);
    for (std::size_t k = 0; k < slot_.size(); ++k)
        if (slot_[k] >= 0) val[slot_[k]] += local_[k];
}

} // namespace iamcf
