// Command-line driver: solve, check and study subcommands over a JSON run
// configuration.

#include "iamcf/config.hpp"
#include "iamcf/errors.hpp"
#include "iamcf/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
    std::string config;
    std::string out;
    std::string schedule;
    std::string resolution;
    long long seed = -1;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory (default: $IAMCF_OUTPUT_ROOT/<name>)");
    cmd->add_option("--p-schedule", c.schedule, "comma-separated decreasing p values");
    cmd->add_option("--resolution", c.resolution, "cells per side; study accepts a comma-separated list");
    cmd->add_option("--seed", c.seed, "seed for the minimality trials")->check(CLI::NonNegativeNumber);
}

std::string output_dir(const Common& c, const iamcf::RunConfig& cfg)
{
    if (!c.out.empty()) return c.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("IAMCF_OUTPUT_ROOT");
    return (std::filesystem::path(root && *root ? root : "iamcf_out") / cfg.name).string();
}

std::vector<int> parse_resolutions(const std::string& s)
{
    std::vector<int> out;
    for (double v : iamcf::parse_number_list(s, "--resolution")) {
        if (v != static_cast<int>(v) || v < 8) throw iamcf::ConfigError("--resolution", "expected integers >= 8");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

iamcf::RunConfig load(const Common& c)
{
    iamcf::RunConfig cfg = iamcf::load_config(c.config);
    if (!c.schedule.empty()) {
        cfg.solver.schedule = iamcf::parse_number_list(c.schedule, "--p-schedule");
        cfg.solver.p = cfg.solver.schedule.front();
    }
    if (!c.resolution.empty()) cfg.grid.resolution = parse_resolutions(c.resolution).back();
    if (c.seed >= 0) cfg.minimality.seed = static_cast<std::uint64_t>(c.seed);
    iamcf::validate(cfg);
    return cfg;
}

int do_run(const Common& c, bool checks)
{
    const iamcf::RunConfig cfg = load(c);
    const std::string dir = output_dir(c, cfg);
    const iamcf::RunResult r = iamcf::run(cfg, dir, checks);
    for (std::size_t k = 0; k < r.continuation.reports.size(); ++k) {
        const auto& rep = r.continuation.reports[k];
        std::cout << "p=" << rep.p << " iterations=" << rep.iterations << " energy=" << rep.energy
                  << " grad=" << rep.grad_norm << '\n';
    }
    for (const auto& chk : r.checks) std::cout << iamcf::summary_line(chk) << '\n';
    std::cout << "output: " << dir << '\n';
    return r.exit_code == 0 ? 0 : kExitChecksFailed;
}

int do_study(const Common& c)
{
    iamcf::RunConfig cfg = load(c);
    std::vector<int> res = c.resolution.empty() ? std::vector<int>{cfg.grid.resolution / 2, cfg.grid.resolution}
                                                : parse_resolutions(c.resolution);
    const std::vector<double> schedule =
        cfg.solver.schedule.empty() ? std::vector<double>{cfg.solver.p} : cfg.solver.schedule;
    const std::string dir = output_dir(c, cfg);
    std::filesystem::create_directories(dir);
    std::ofstream(std::filesystem::path(dir) / "resolved_config.json") << iamcf::resolved_config_json(cfg);
    const iamcf::StudyTable t = iamcf::convergence_study(cfg, res, schedule);
    const std::string path = (std::filesystem::path(dir) / "study.csv").string();
    iamcf::write_study_csv(t, path);
    std::cout << "reference=" << t.reference << '\n';
    for (const auto& r : t.rows)
        std::cout << "resolution=" << r.resolution << " h=" << r.h << " p=" << r.p << " error=" << r.error
                  << " error_limit=" << r.error_limit << " order=" << r.order << '\n';
    std::cout << "output: " << path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weak inverse anisotropic mean curvature flow via the Finsler p-Laplacian"};
    app.require_subcommand(1);
    Common solve_opts, check_opts, study_opts;
    CLI::App* solve = app.add_subcommand("solve", "continuation solve; writes fields and contours");
    CLI::App* check = app.add_subcommand("check", "solve, then run the configured checks and write summary.txt");
    CLI::App* study = app.add_subcommand("study", "convergence table over resolutions and the p schedule");
    add_common(solve, solve_opts);
    add_common(check, check_opts);
    add_common(study, study_opts);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return do_run(solve_opts, false);
        if (*check) return do_run(check_opts, true);
        return do_study(study_opts);
    } catch (const iamcf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
