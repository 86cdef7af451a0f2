#pragma once

#include "iamcf/domain.hpp"
#include "iamcf/norm.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace iamcf {

/// Integrand phi(g) = (1/p) (F(g)^2 + delta^2)^(p/2) of the discrete energy.
struct EnergyParams {
    double p = 2.0;
    double delta = 0.0;
};

/// A triangle counts as degenerate when F(grad v) * diameter falls below
/// this fraction of its largest nodal |v|.
inline constexpr double kDegenerateRelative = 1e-10;

/// Reference implementations: plain loops, direct scatter.
namespace serial {
double energy(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
              const EnergyParams& prm);
/// dE/dv at every node (constrained nodes included; callers mask them).
double energy_gradient(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
                       const EnergyParams& prm, std::vector<double>& grad);
} // namespace serial

/// OpenMP implementations. Results do not depend on the thread count:
/// energies are summed in fixed blocks and nodal gradients are gathered in
/// triangle order.
namespace omp {
double energy(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
              const EnergyParams& prm);
double energy_gradient(const MinkowskiNorm& F, const Mesh& mesh, const std::vector<double>& v,
                       const EnergyParams& prm, std::vector<double>& grad);
} // namespace omp

/// Local 3x3 Hessian of one triangle, row-major.
void triangle_hessian(const MinkowskiNorm& F, const Mesh& mesh, std::size_t e,
                      const std::vector<double>& v, const EnergyParams& prm, double H[9]);

/// Hessian of the energy restricted to the free nodes of a domain, assembled
/// into a fixed sparsity pattern.
class HessianAssembler {
public:
    explicit HessianAssembler(const GridDomain& domain);

    /// Overwrites the values of `H` (pattern fixed at construction).
    void assemble(const MinkowskiNorm& F, const std::vector<double>& v, const EnergyParams& prm,
                  bool parallel = true);
    const Eigen::SparseMatrix<double>& matrix() const noexcept { return H_; }
    Eigen::SparseMatrix<double>& matrix() noexcept { return H_; }
    /// Position in the value array of each diagonal entry.
    const std::vector<int>& diagonal_slots() const noexcept { return diag_; }

private:
    const GridDomain* domain_;
    Eigen::SparseMatrix<double> H_;
    std::vector<int> slot_; ///< triangle * 9 + a * 3 + b -> value index, or -1
    std::vector<int> diag_;
    std::vector<double> local_;
};

} // namespace iamcf
