#include "iamcf/run.hpp"

#include "iamcf/contour.hpp"
#include "iamcf/errors.hpp"
#include "iamcf/flow.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace iamcf {

namespace fs = std::filesystem;

namespace {

constexpr int kDim = 2;

Vec as_vec(const P2& p)
{
    Vec v(2);
    v << p.x(), p.y();
    return v;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

std::string p_tag(double p)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << p;
    return os.str();
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p);
    if (!os) throw Error("cannot open " + p.string() + " for writing");
    os << std::setprecision(12);
    return os;
}

/// (n - p) log(F°(x - x0) / r) for a Wulff obstacle of F, 0 on obstacle nodes.
/// p = 1 gives the limit flow.
ScalarField exact_u(const MinkowskiNorm& F, const GridDomain& d, double p)
{
    const WulffShape& W = d.obstacle().as_wulff();
    ScalarField u(d.lattice(), p == 1.0 ? FieldMeaning::u_limit : FieldMeaning::u_p);
    for (std::size_t k = 0; k < d.node_count(); ++k) {
        if (d.type(k) == NodeType::obstacle) continue;
        const double g = F.polar(as_vec(d.lattice_position(k)) - W.center);
        u[k] = (kDim - p) * std::log(g / W.r);
    }
    return u;
}

double annulus_sup(const std::vector<std::uint8_t>& mask, const ScalarField& a, const ScalarField& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

double annulus_max_abs(const std::vector<std::uint8_t>& mask, const ScalarField& a)
{
    double s = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) s = std::max(s, std::abs(a[i]));
    return s;
}

/// Field with a Gaussian bump added on the free nodes, used as a deliberately
/// non-minimizing input.
ScalarField corrupted(const GridDomain& d, const ScalarField& u)
{
    const double R = d.obstacle().circumradius();
    const P2 c = d.obstacle().reference_center() + P2(2.0 * R, 0.0);
    ScalarField out = u;
    for (int k : d.free_nodes()) {
        const double r2 = (d.lattice_position(k) - c).squaredNorm();
        out[k] += 2.0 * std::exp(-r2 / (0.3 * R * R));
    }
    return out;
}

class CheckRunner {
public:
    CheckRunner(const RunConfig& cfg, const MinkowskiNorm& F, const GridDomain& d, const ContinuationResult& cont,
                const std::vector<double>& schedule, const fs::path& out)
        : cfg_(cfg), F_(F), d_(d), cont_(cont), schedule_(schedule), out_(out),
          limit_(extrapolate_limit(cont, schedule)), wulff_(d.obstacle().is_wulff_of(F))
    {
        for (std::size_t k = 0; k < cont.u_fields.size(); ++k)
            bounds_.push_back(check_gradient_bounds(F, d, cont.u_fields[k], schedule[k], inradius()));
    }

    const ScalarField& limit() const { return limit_; }

    CheckResult evaluate(CheckKind kind)
    {
        switch (kind) {
        case CheckKind::barriers: return barriers();
        case CheckKind::maxgrad: return maxgrad();
        case CheckKind::inradius_bound: return inradius_bound();
        case CheckKind::boundary_curvature: return boundary_curvature();
        case CheckKind::growth: return growth();
        case CheckKind::minimality: return minimality();
        case CheckKind::weak_curvature: return weak_curvature();
        case CheckKind::p_convergence: return p_convergence();
        }
        throw Error("unhandled check");
    }

private:
    double inradius()
    {
        if (!R_computed_) {
            R_computed_ = true;
            R_ = d_.obstacle().convex() ? wulff_inradius(F_, d_) : std::numeric_limits<double>::quiet_NaN();
        }
        return R_;
    }

    CheckResult make(CheckKind k, bool ok, double value, double tol) const
    {
        return {to_string(k), ok ? CheckStatus::pass : CheckStatus::fail, value, tol};
    }

    CheckResult barriers()
    {
        double worst = 0.0;
        bool ok = true;
        for (const SolveReport& r : cont_.reports) {
            const BarrierReport& b = r.barrier;
            const double viol = std::max(b.lower_violation, b.upper_violation);
            worst = std::max(worst, b.slack > 0.0 ? viol / b.slack : viol);
            ok = ok && b.pass;
        }
        return make(CheckKind::barriers, ok, worst, 1.0);
    }

    CheckResult maxgrad()
    {
        double worst = 0.0;
        for (const auto& b : bounds_) worst = std::max(worst, b.maxgrad_excess);
        return make(CheckKind::maxgrad, worst <= cfg_.maxgrad_tol, worst, cfg_.maxgrad_tol);
    }

    CheckResult inradius_bound()
    {
        if (!std::isfinite(inradius()))
            return {to_string(CheckKind::inradius_bound), CheckStatus::hypothesis_unverified, NAN, cfg_.inradius_slack};
        double worst = 0.0;
        for (const auto& b : bounds_) worst = std::max(worst, b.sup_all / b.estapp_bound);
        return make(CheckKind::inradius_bound, worst <= cfg_.inradius_slack, worst, cfg_.inradius_slack);
    }

    CheckResult boundary_curvature()
    {
        if (!wulff_ || bounds_.empty())
            return {to_string(CheckKind::boundary_curvature), CheckStatus::hypothesis_unverified, NAN, NAN};
        const double hf = bounds_.front().hf_plus;
        bool monotone = true;
        for (std::size_t k = 1; k < bounds_.size(); ++k)
            monotone = monotone && bounds_[k].curvature_excess <= bounds_[k - 1].curvature_excess;
        const double last = bounds_.back().curvature_excess;
        const double tol = cfg_.curvature_eps_fraction * hf;
        return make(CheckKind::boundary_curvature, monotone && last <= tol, last, tol);
    }

    CheckResult growth()
    {
        const GrowthSeries gs = area_growth_series(F_, d_, limit_, cfg_.growth.times);
        std::ofstream os = open_out(out_ / "growth.csv");
        os << "# seed=" << cfg_.minimality.seed << " field=u_limit sigma0=" << gs.sigma0
           << " hypothesis_verified=" << (gs.hypothesis_verified ? "true" : "false") << '\n';
        os << "t,sigma_contour,sigma_coarea,predicted,ratio_contour,ratio_coarea,closed\n";
        double worst = 0.0, worst_coarea = 0.0;
        bool closed = true;
        for (const GrowthRow& r : gs.rows) {
            os << r.t << ',' << r.sigma_contour << ',' << r.sigma_coarea << ',' << r.predicted << ','
               << r.ratio_contour << ',' << r.ratio_coarea << ',' << (r.closed ? 1 : 0) << '\n';
            worst = std::max(worst, std::abs(r.ratio_contour - 1.0));
            worst_coarea = std::max(worst_coarea, std::abs(r.ratio_coarea - 1.0));
            closed = closed && r.closed;
        }
        CheckResult c = make(CheckKind::growth, closed && worst <= cfg_.growth.tol && worst_coarea <= 2.0 * cfg_.growth.tol,
                             worst, cfg_.growth.tol);
        if (!gs.hypothesis_verified) c.status = CheckStatus::hypothesis_unverified;
        return c;
    }

    CheckResult minimality()
    {
        const MinimalityReport rep = minimality_spot_check(F_, d_, limit_, cfg_.minimality);
        bool control_flagged = true;
        int control_failures = 0;
        if (cfg_.negative_control) {
            const MinimalityReport bad = minimality_spot_check(F_, d_, corrupted(d_, limit_), cfg_.minimality);
            control_failures = bad.failures;
            control_flagged = bad.failures > 0;
        }
        std::ofstream os = open_out(out_ / "minimality.csv");
        os << "# seed=" << rep.seed << " C=" << rep.C << " trials=" << rep.trials.size()
           << " failures=" << rep.failures << " negative_control_failures=" << control_failures << '\n';
        os << "index,seed,cx,cy,half_width,amplitude,measure_K,J_u,J_phi,margin,slack,pass\n";
        for (const MinimalityTrial& t : rep.trials)
            os << t.index << ',' << t.seed << ',' << t.centre.x() << ',' << t.centre.y() << ',' << t.half_width
               << ',' << t.amplitude << ',' << t.measure_K << ',' << t.J_u << ',' << t.J_phi << ',' << t.margin
               << ',' << t.slack << ',' << (t.pass ? 1 : 0) << '\n';
        return make(CheckKind::minimality, rep.pass && control_flagged, rep.worst_scaled_margin, -rep.C);
    }

    CheckResult weak_curvature()
    {
        double worst_mean = 0.0, worst_masked = 0.0;
        std::ofstream os = open_out(out_ / "weak_curvature.csv");
        os << "t,mean_rel,max_rel,vertices,masked,masked_fraction\n";
        bool evaluated = true;
        for (double t : cfg_.curvature.times) {
            CurvatureResidual r;
            try {
                r = weak_curvature_residual(F_, limit_, t, &d_);
            } catch (const Error& e) {
                std::cerr << "warning: weak_curvature at t=" << t << ": " << e.what() << '\n';
                os << t << ",nan,nan,0,0,1\n";
                evaluated = false;
                continue;
            }
            os << t << ',' << r.mean_rel << ',' << r.max_rel << ',' << r.vertices << ',' << r.masked << ','
               << r.masked_fraction << '\n';
            worst_mean = std::max(worst_mean, r.mean_rel);
            worst_masked = std::max(worst_masked, r.masked_fraction);
        }
        return make(CheckKind::weak_curvature,
                    evaluated && worst_mean <= cfg_.curvature.mean_tol && worst_masked <= cfg_.curvature.masked_tol, worst_mean,
                    cfg_.curvature.mean_tol);
    }

    CheckResult p_convergence()
    {
        const std::vector<std::uint8_t> ann = annulus_mask(F_, d_);
        if (!wulff_) {
            bool monotone = !cont_.cauchy.empty();
            for (std::size_t k = 1; k < cont_.cauchy.size(); ++k)
                monotone = monotone && cont_.cauchy[k] <= cont_.cauchy[k - 1];
            const double last = cont_.cauchy.empty() ? NAN : cont_.cauchy.back();
            return make(CheckKind::p_convergence, monotone, last, NAN);
        }
        const ScalarField ref = exact_u(F_, d_, 1.0);
        const double scale = annulus_max_abs(ann, ref);
        bool monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        for (const ScalarField& u : cont_.u_fields) {
            const double e = annulus_sup(ann, u, ref) / scale;
            monotone = monotone && e < prev;
            prev = e;
        }
        const double lim = annulus_sup(ann, limit_, ref) / scale;
        return make(CheckKind::p_convergence, monotone && lim <= cfg_.convergence_tol, lim, cfg_.convergence_tol);
    }

    const RunConfig& cfg_;
    const MinkowskiNorm& F_;
    const GridDomain& d_;
    const ContinuationResult& cont_;
    const std::vector<double>& schedule_;
    fs::path out_;
    ScalarField limit_;
    bool wulff_;
    std::vector<GradientBoundReport> bounds_;
    bool R_computed_ = false;
    double R_ = 0.0;
};

void write_convergence_csv(const fs::path& path, const MinkowskiNorm& F, const GridDomain& d,
                           const ContinuationResult& c, const std::vector<double>& schedule)
{
    const bool wulff = d.obstacle().is_wulff_of(F);
    const std::vector<std::uint8_t> ann = annulus_mask(F, d);
    std::ofstream os = open_out(path);
    os << "p,iterations,converged,energy,grad_norm,annulus_err_exact,annulus_err_limit,cauchy\n";
    for (std::size_t k = 0; k < c.reports.size(); ++k) {
        const SolveReport& r = c.reports[k];
        os << r.p << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.energy << ',' << r.grad_norm
           << ',';
        if (wulff && k < c.u_fields.size()) {
            os << annulus_sup(ann, c.u_fields[k], exact_u(F, d, schedule[k])) << ','
               << annulus_sup(ann, c.u_fields[k], exact_u(F, d, 1.0));
        } else {
            os << "nan,nan";
        }
        os << ',' << (k >= 1 && k - 1 < c.cauchy.size() ? fmt(c.cauchy[k - 1]) : std::string("nan")) << '\n';
    }
}

} // namespace

std::string to_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::hypothesis_unverified: return "hypothesis_unverified";
    }
    return "fail";
}

std::string summary_line(const CheckResult& r)
{
    return "check=" + r.name + " status=" + to_string(r.status) + " value=" + fmt(r.value) + " tol=" + fmt(r.tol);
}

ScalarField extrapolate_limit(const ContinuationResult& c, const std::vector<double>& schedule)
{
    if (c.u_fields.empty()) throw SolverError("no solved stage to extrapolate from");
    ScalarField out = c.u_fields.back();
    out.meaning = FieldMeaning::u_limit;
    const std::size_t k = c.u_fields.size() - 1;
    if (k == 0) return out;
    const double pk = schedule[k], pj = schedule[k - 1];
    const double w = (pk - 1.0) / (pj - pk);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * (c.u_fields[k][i] - c.u_fields[k - 1][i]);
    return out;
}

RunResult run(const RunConfig& cfg, const std::string& out_dir, bool run_checks)
{
    validate(cfg);
    const fs::path out(out_dir);
    fs::create_directories(out);
    {
        std::ofstream os = open_out(out / "resolved_config.json");
        os << resolved_config_json(cfg);
    }

    const MinkowskiNorm F = make_norm(cfg.norm);
    const GridDomain d = make_domain(cfg, F);
    for (const std::string& w : d.warnings()) std::cerr << "warning: " << w << '\n';
    const std::vector<double> schedule =
        cfg.solver.schedule.empty() ? std::vector<double>{cfg.solver.p} : cfg.solver.schedule;

    RunResult res;
    res.output_dir = out.string();
    res.continuation = continuation_solve(F, d, cfg.solver);
    const ContinuationResult& c = res.continuation;
    write_convergence_csv(out / "convergence.csv", F, d, c, schedule);
    if (!c.complete) throw SolverError(c.message);

    if (cfg.write_fields) {
        for (std::size_t k = 0; k < c.reports.size(); ++k) {
            const std::string tag = p_tag(schedule[k]);
            if (cfg.write_binary) {
                write_field_binary(c.reports[k].field, (out / ("v_p" + tag + ".bin")).string());
                write_field_binary(c.u_fields[k], (out / ("u_p" + tag + ".bin")).string());
            }
        }
        const std::string last = p_tag(schedule.back());
        write_field_csv(c.reports.back().field, (out / ("v_p" + last + ".csv")).string());
        write_field_csv(c.u_fields.back(), (out / ("u_p" + last + ".csv")).string());
    }

    const ScalarField limit = extrapolate_limit(c, schedule);
    if (cfg.write_fields) {
        write_field_csv(limit, (out / "u_limit.csv").string());
        if (cfg.write_binary) write_field_binary(limit, (out / "u_limit.bin").string());
        const MaskedField hf = level_set_HF_field(F, limit);
        for (double t : cfg.growth.times) {
            if (t <= 0.0) continue;
            Contour contour = extract_contour(limit, t);
            attach_HF(contour, hf, limit.lattice);
            std::ostringstream name;
            name << "contour_t" << std::fixed << std::setprecision(2) << t << ".csv";
            write_contour_csv(contour, (out / name.str()).string());
        }
    }

    if (!run_checks) return res;

    CheckRunner runner(cfg, F, d, c, schedule, out);
    for (CheckKind k : cfg.checks) res.checks.push_back(runner.evaluate(k));
    std::ofstream os = open_out(out / "summary.txt");
    for (const CheckResult& r : res.checks) {
        os << summary_line(r) << '\n';
        if (r.status == CheckStatus::fail) res.exit_code = 1;
    }
    return res;
}

StudyTable convergence_study(const RunConfig& cfg, const std::vector<int>& resolutions,
                             const std::vector<double>& schedule)
{
    if (resolutions.empty() || schedule.empty()) throw ConfigError("", "study needs a resolution and a p value");
    RunConfig base = cfg;
    base.solver.schedule = schedule;
    base.solver.p = schedule.front();
    validate(base);
    const MinkowskiNorm F = make_norm(base.norm);

    struct Level {
        int resolution;
        GridDomain domain;
        ContinuationResult cont;
    };
    std::vector<Level> levels;
    for (int res : resolutions) {
        RunConfig rc = base;
        rc.grid.resolution = res;
        GridDomain d = make_domain(rc, F);
        ContinuationResult c = continuation_solve(F, d, base.solver);
        if (!c.complete) throw SolverError("resolution " + std::to_string(res) + ": " + c.message);
        levels.push_back({res, std::move(d), std::move(c)});
    }

    StudyTable table;
    const bool wulff = levels.front().domain.obstacle().is_wulff_of(F);
    table.reference = wulff ? "closed_form" : "finest";
    std::size_t finest = 0;
    for (std::size_t l = 1; l < levels.size(); ++l)
        if (levels[l].resolution > levels[finest].resolution) finest = l;
    const ScalarField& ref_field = levels[finest].cont.u_fields.back();

    for (std::size_t l = 0; l < levels.size(); ++l) {
        const GridDomain& d = levels[l].domain;
        const std::vector<std::uint8_t> ann = annulus_mask(F, d);
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            const ScalarField& u = levels[l].cont.u_fields[k];
            StudyRow row;
            row.resolution = levels[l].resolution;
            row.h = d.h();
            row.p = schedule[k];
            row.order = std::numeric_limits<double>::quiet_NaN();
            if (wulff) {
                row.error = annulus_sup(ann, u, exact_u(F, d, schedule[k]));
                row.error_limit = annulus_sup(ann, u, exact_u(F, d, 1.0));
            } else {
                double e = 0.0;
                for (std::size_t i = 0; i < ann.size(); ++i)
                    if (ann[i]) e = std::max(e, std::abs(u[i] - ref_field.interpolate(d.lattice().position(i))));
                row.error = e;
                row.error_limit = std::numeric_limits<double>::quiet_NaN();
            }
            table.rows.push_back(row);
        }
    }
    // Observed orders between consecutive resolutions at equal p.
    for (StudyRow& r : table.rows) {
        const StudyRow* coarser = nullptr;
        for (const StudyRow& s : table.rows)
            if (s.p == r.p && s.h > r.h && (!coarser || s.h < coarser->h)) coarser = &s;
        if (coarser && coarser->error > 0.0 && r.error > 0.0)
            r.order = std::log(coarser->error / r.error) / std::log(coarser->h / r.h);
    }
    return table;
}

void write_study_csv(const StudyTable& t, const std::string& path)
{
    std::ofstream os = open_out(path);
    os << "# reference=" << t.reference << '\n';
    os << "resolution,h,p,error,error_limit,order\n";
    for (const StudyRow& r : t.rows)
        os << r.resolution << ',' << r.h << ',' << r.p << ',' << r.error << ',' << r.error_limit << ',' << r.order
           << '\n';
}

} // namespace iamcf
