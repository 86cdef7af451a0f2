#pragma once

#include "iamcf/domain.hpp"
#include "iamcf/flow.hpp"
#include "iamcf/norm.hpp"
#include "iamcf/obstacle.hpp"
#include "iamcf/solver.hpp"

#include <string>
#include <vector>

namespace iamcf {

enum class CheckKind {
    barriers,
    maxgrad,
    inradius_bound,
    boundary_curvature,
    growth,
    minimality,
    weak_curvature,
    p_convergence
};

std::string to_string(CheckKind c);
CheckKind check_from_string(const std::string& s); ///< throws ConfigError
const std::vector<CheckKind>& all_checks();

struct NormSpec {
    std::string kind = "euclidean"; ///< euclidean | ellipsoidal | lq
    Mat A = Mat::Identity(2, 2);
    double q = 4.0;
    double delta = 0.05;
    std::string polar = "auto"; ///< auto | closed_form | numeric_sup
};

struct ObstacleSpec {
    std::string kind = "wulff"; ///< wulff | polygon
    std::vector<double> center{0.0, 0.0};
    double radius = 1.0;
    std::vector<P2> vertices;
};

struct GridSpec {
    double lo = -8.0;
    double hi = 8.0;
    int resolution = 256; ///< cells per side
    BoundaryTreatment boundary = BoundaryTreatment::fitted;
    bool strict_circumradius = false;
};

struct GrowthSpec {
    std::vector<double> times{0.25, 0.5, 1.0, 1.5};
    double tol = 0.05;
};

struct CurvatureSpec {
    std::vector<double> times{0.25, 0.5, 1.0, 1.5};
    double mean_tol = 0.05;
    double masked_tol = 0.01;
};

struct RunConfig {
    std::string name = "run";
    NormSpec norm;
    ObstacleSpec obstacle;
    GridSpec grid;
    SolverConfig solver;
    std::vector<CheckKind> checks = all_checks();
    GrowthSpec growth;
    CurvatureSpec curvature;
    MinimalityConfig minimality;
    bool negative_control = true;
    double maxgrad_tol = 0.02;
    double inradius_slack = 1.10;
    double curvature_eps_fraction = 0.1;
    double convergence_tol = 0.05;
    std::string output_dir; ///< empty: chosen by the driver
    bool write_fields = true;
    bool write_binary = true;
};

/// Parse a JSON document. Syntax errors report "line L, column C"; semantic
/// errors report the JSON pointer of the offending value. Unknown keys are
/// rejected.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// Every field of the configuration, defaults included, as indented JSON.
std::string resolved_config_json(const RunConfig& cfg);

/// Cross-field checks: p range, schedule order, obstacle margin. Throws ConfigError.
void validate(const RunConfig& cfg);

MinkowskiNorm make_norm(const NormSpec& spec);
Obstacle make_obstacle(const ObstacleSpec& spec, const MinkowskiNorm& F);
Lattice make_lattice(const GridSpec& spec);
GridDomain make_domain(const RunConfig& cfg, const MinkowskiNorm& F);

/// "1.5,1.3,1.2" -> {1.5, 1.3, 1.2}. Throws ConfigError on malformed input.
std::vector<double> parse_number_list(const std::string& s, const std::string& where);

} // namespace iamcf
