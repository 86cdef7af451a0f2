#pragma once

#include "iamcf/domain.hpp"
#include "iamcf/kernels.hpp"
#include "iamcf/lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace iamcf {

enum class OuterBC { barrier_value, zero };
std::string to_string(OuterBC b);

struct SolverConfig {
    double p = 1.2;
    double delta_reg = 0.0;
    double tol_grad = 1e-8;    ///< relative to the starting gradient norm
    double tol_energy = 1e-12; ///< relative energy decrease over 5 iterations
    double tol_step = 1e-10;   ///< max |du| of an accepted step
    int max_iter = 200;
    std::vector<double> schedule;
    OuterBC outer_bc = OuterBC::barrier_value;
    /// Admissible p range is (p_min, n - p_margin) unless allow_small_p.
    double p_min = 1.01;
    double p_margin = 0.1;
    bool allow_small_p = false;
    /// Cold start is (lower barrier * upper barrier)^(kappa / 2).
    double cold_start_exponent = 0.8;
    bool parallel = true;
    int verbosity = 0;
};

/// Throws ConfigError when p, tolerances or the schedule are inadmissible.
void validate(const SolverConfig& cfg, int n);

/// exponent (n - p) / (p - 1) of the Wulff barriers.
double barrier_exponent(int n, double p);

struct BarrierReport {
    WulffBall inner;
    WulffBall outer;
    double lipschitz = 0.0;       ///< max Euclidean |grad v_h| over triangles
    double slack = 0.0;           ///< 3 h Lip
    double lower_violation = 0.0; ///< max(lower - v), positive when violated
    double upper_violation = 0.0; ///< max(v - upper)
    bool pass = false;
};

struct SolveReport {
    ScalarField field; ///< v_p on the lattice nodes
    double p = 0.0;
    int iterations = 0;
    bool converged = false;
    double energy = 0.0;
    double grad_norm = 0.0;
    double grad_norm_initial = 0.0;
    double last_step = 0.0;
    int gauss_newton_steps = 0;
    std::vector<double> energy_history;
    std::vector<double> grad_history;
    bool energy_monotone = true;
    double min_interior = 0.0;
    double max_interior = 0.0;
    bool max_principle_ok = false;
    BarrierReport barrier;
    std::optional<double> delta_sensitivity;
    std::string message;
};

/// Upper (s / F°(x - y0))^alpha and lower (r / F°(x - x0))^alpha barriers at
/// every node, clipped to 1.
void barrier_fields(const MinkowskiNorm& F, const GridDomain& d, double p, std::vector<double>& lower,
                    std::vector<double>& upper);

/// Minimise the discrete p-energy over v with v = 1 on the obstacle and the
/// outer boundary condition on the box edge. Newton steps are taken in
/// u = -(p - 1) log v on the free nodes.
SolveReport solve_vp(const MinkowskiNorm& F, const GridDomain& d, const SolverConfig& cfg,
                     const ScalarField* warm_start = nullptr);

BarrierReport check_barriers(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& v, double p);

/// u_p = (1 - p) log v_p. Throws naming the first nonpositive node.
ScalarField log_transform(const ScalarField& v, double p);
/// v_p = exp(-u / (p - 1)).
ScalarField exp_transform(const ScalarField& u, double p);

/// Q_p[u] = div(F^(p-1)(grad u) F_xi(grad u)) - F(grad u)^p with centred
/// differences. Nodes whose stencil leaves the free region or meets a
/// degenerate gradient are masked.
MaskedField residual_Qp(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u, double p,
                        double floor = 1e-10);

/// F(grad u) of the P1 interpolant on every mesh triangle.
std::vector<double> triangle_gradient_norms(const MinkowskiNorm& F, const GridDomain& d,
                                            const ScalarField& u);

/// F(grad u) at every free node (NaN elsewhere). Centred differences, except
/// next to obstacle nodes where a one-sided second-order difference reaching
/// away from the obstacle is used.
std::vector<double> node_gradient_norms(const MinkowskiNorm& F, const GridDomain& d, const ScalarField& u);

struct GradientBoundReport {
    double p = 0.0;
    double sup_all = 0.0;      ///< sup over all free nodes
    double sup_boundary = 0.0; ///< sup over the first free layer next to the obstacle
    double sup_interior = 0.0; ///< sup over the remaining free nodes
    double maxgrad_excess = 0.0;
    double inradius = 0.0;
    double estapp_bound = 0.0; ///< (n - p) / R
    double hf_plus = 0.0;      ///< sup of H_F^+ on the obstacle boundary (NaN if unknown)
    double curvature_excess = 0.0; ///< max(0, sup_boundary - hf_plus)
};

GradientBoundReport check_gradient_bounds(const MinkowskiNorm& F, const GridDomain& d,
                                          const ScalarField& u, double p, double R_wulff);

/// Largest rho such that every boundary sample is touched from inside by some
/// W_rho. Boundary samples are spaced by `spacing` (default h / 2) and skip
/// polygon vertices.
double wulff_inradius(const MinkowskiNorm& F, const GridDomain& d, double spacing = 0.0);

struct ContinuationResult {
    std::vector<SolveReport> reports;
    std::vector<ScalarField> u_fields;
    /// ||u_{p_k} - u_{p_{k+1}}||_inf on the annulus {1.5 s <= F°(x - y0) <= 3 s}.
    std::vector<double> cauchy;
    bool complete = false;
    std::string message;
};

std::vector<std::uint8_t> annulus_mask(const MinkowskiNorm& F, const GridDomain& d, double inner_factor = 1.5,
                                       double outer_factor = 3.0);

ContinuationResult continuation_solve(const MinkowskiNorm& F, const GridDomain& d, const SolverConfig& cfg);

} // namespace iamcf
