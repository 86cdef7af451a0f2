#pragma once

#include "iamcf/config.hpp"
#include "iamcf/solver.hpp"

#include <string>
#include <vector>

namespace iamcf {

enum class CheckStatus { pass, fail, hypothesis_unverified };
std::string to_string(CheckStatus s);

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::fail;
    double value = 0.0;
    double tol = 0.0;
};

/// `check=<name> status=<status> value=<value> tol=<tol>`
std::string summary_line(const CheckResult& r);

struct RunResult {
    ContinuationResult continuation;
    std::vector<CheckResult> checks;
    std::string output_dir;
    /// 0 when every check passed or could not be certified, 1 otherwise.
    int exit_code = 0;
};

/// u at p = 1 extrapolated linearly in p from the last two stages; the last
/// stage alone when only one is available.
ScalarField extrapolate_limit(const ContinuationResult& c, const std::vector<double>& schedule);

/// Continuation solve followed by the configured checks. Writes the resolved
/// config, fields, contours, CSV tables and `summary.txt` into `out_dir`.
/// With `run_checks` false only the solve and the field output happen.
RunResult run(const RunConfig& cfg, const std::string& out_dir, bool run_checks = true);

struct StudyRow {
    int resolution = 0;
    double h = 0.0;
    double p = 0.0;
    double error = 0.0;       ///< sup on the annulus against the reference
    double error_limit = 0.0; ///< sup on the annulus against (n-1) log(F°/r), NaN without closed form
    double order = 0.0;       ///< observed order against the next coarser resolution, NaN for the first
};

struct StudyTable {
    std::string reference; ///< "closed_form" or "finest"
    std::vector<StudyRow> rows;
};

/// Repeat the continuation solve at every resolution. Wulff obstacles of the
/// run norm are compared with the exact u_p; other obstacles with the finest
/// resolution at the smallest p.
StudyTable convergence_study(const RunConfig& cfg, const std::vector<int>& resolutions,
                             const std::vector<double>& schedule);
void write_study_csv(const StudyTable& t, const std::string& path);

} // namespace iamcf
