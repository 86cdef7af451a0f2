#include "iamcf/config.hpp"

#include "iamcf/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace iamcf {

using nlohmann::json;

namespace {

const std::vector<std::pair<CheckKind, const char*>>& check_names()
{
    static const std::vector<std::pair<CheckKind, const char*>> names{
        {CheckKind::barriers, "barriers"},
        {CheckKind::maxgrad, "maxgrad"},
        {CheckKind::inradius_bound, "inradius_bound"},
        {CheckKind::boundary_curvature, "boundary_curvature"},
        {CheckKind::growth, "growth"},
        {CheckKind::minimality, "minimality"},
        {CheckKind::weak_curvature, "weak_curvature"},
        {CheckKind::p_convergence, "p_convergence"},
    };
    return names;
}

/// Walks a JSON object, remembering its pointer and which keys were consumed
/// so leftovers can be reported.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(where(), "expected an object");
    }

    std::string where() const { return path_.empty() ? "/" : path_; }
    std::string child(const std::string& key) const { return path_ + "/" + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json* get(const std::string& key)
    {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out)
    {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigError(child(key), "expected a number");
            out = v->get<double>();
        }
    }
    void integer(const std::string& key, int& out)
    {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigError(child(key), "expected an integer");
            out = v->get<int>();
        }
    }
    void unsigned64(const std::string& key, std::uint64_t& out)
    {
        if (const json* v = get(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0)
                throw ConfigError(child(key), "expected a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void boolean(const std::string& key, bool& out)
    {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) throw ConfigError(child(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out)
    {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ConfigError(child(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void numbers(const std::string& key, std::vector<double>& out)
    {
        if (const json* v = get(key)) {
            if (!v->is_array()) throw ConfigError(child(key), "expected an array of numbers");
            out.clear();
            for (std::size_t k = 0; k < v->size(); ++k) {
                if (!(*v)[k].is_number())
                    throw ConfigError(child(key) + "/" + std::to_string(k), "expected a number");
                out.push_back((*v)[k].get<double>());
            }
        }
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Mat read_matrix(const json& v, const std::string& where)
{
    if (!v.is_array() || v.empty()) throw ConfigError(where, "expected a square matrix (array of rows)");
    const int n = static_cast<int>(v.size());
    if (n > kMaxDim) throw ConfigError(where, "matrix larger than 3 x 3");
    Mat A(n, n);
    for (int i = 0; i < n; ++i) {
        const json& row = v[i];
        const std::string rw = where + "/" + std::to_string(i);
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw ConfigError(rw, "row length differs from the number of rows");
        for (int j = 0; j < n; ++j) {
            if (!row[j].is_number()) throw ConfigError(rw + "/" + std::to_string(j), "expected a number");
            A(i, j) = row[j].get<double>();
        }
    }
    return A;
}

void read_norm(const json& j, NormSpec& s)
{
    Node node(j, "/norm");
    node.string("kind", s.kind);
    if (s.kind != "euclidean" && s.kind != "ellipsoidal" && s.kind != "lq")
        throw ConfigError("/norm/kind", "unknown norm kind '" + s.kind + "' (euclidean, ellipsoidal, lq)");
    if (const json* a = node.get("A")) s.A = read_matrix(*a, "/norm/A");
    node.number("q", s.q);
    node.number("delta", s.delta);
    node.string("polar", s.polar);
    if (s.polar != "auto" && s.polar != "closed_form" && s.polar != "numeric_sup")
        throw ConfigError("/norm/polar", "expected auto, closed_form or numeric_sup");
    node.finish();
}

void read_obstacle(const json& j, ObstacleSpec& s)
{
    Node node(j, "/obstacle");
    node.string("kind", s.kind);
    if (s.kind != "wulff" && s.kind != "polygon")
        throw ConfigError("/obstacle/kind", "unknown obstacle kind '" + s.kind + "' (wulff, polygon)");
    node.numbers("center", s.center);
    if (s.center.size() != 2) throw ConfigError("/obstacle/center", "expected two coordinates");
    node.number("radius", s.radius);
    if (const json* v = node.get("vertices")) {
        if (!v->is_array()) throw ConfigError("/obstacle/vertices", "expected an array of [x, y] pairs");
        s.vertices.clear();
        for (std::size_t k = 0; k < v->size(); ++k) {
            const json& p = (*v)[k];
            const std::string w = "/obstacle/vertices/" + std::to_string(k);
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ConfigError(w, "expected [x, y]");
            s.vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
    }
    node.finish();
}

void read_grid(const json& j, GridSpec& s)
{
    Node node(j, "/grid");
    std::vector<double> box{s.lo, s.hi};
    node.numbers("box", box);
    if (box.size() != 2) throw ConfigError("/grid/box", "expected [lo, hi]");
    s.lo = box[0];
    s.hi = box[1];
    node.integer("resolution", s.resolution);
    std::string b = to_string(s.boundary);
    node.string("boundary", b);
    if (b == "fitted")
        s.boundary = BoundaryTreatment::fitted;
    else if (b == "staircase")
        s.boundary = BoundaryTreatment::staircase;
    else
        throw ConfigError("/grid/boundary", "expected fitted or staircase");
    node.boolean("strict_circumradius", s.strict_circumradius);
    node.finish();
}

void read_solver(const json& j, SolverConfig& s)
{
    Node node(j, "/solver");
    node.number("p", s.p);
    node.numbers("schedule", s.schedule);
    node.number("delta_reg", s.delta_reg);
    node.number("tol_grad", s.tol_grad);
    node.number("tol_energy", s.tol_energy);
    node.number("tol_step", s.tol_step);
    node.integer("max_iter", s.max_iter);
    std::string bc = to_string(s.outer_bc);
    node.string("outer_bc", bc);
    if (bc == "barrier_value")
        s.outer_bc = OuterBC::barrier_value;
    else if (bc == "zero")
        s.outer_bc = OuterBC::zero;
    else
        throw ConfigError("/solver/outer_bc", "expected barrier_value or zero");
    node.number("p_min", s.p_min);
    node.number("p_margin", s.p_margin);
    node.boolean("allow_small_p", s.allow_small_p);
    node.number("cold_start_exponent", s.cold_start_exponent);
    node.boolean("parallel", s.parallel);
    node.integer("verbosity", s.verbosity);
    node.finish();
}

void read_checks(const json& j, RunConfig& cfg)
{
    Node node(j, "/checks");
    if (const json* v = node.get("run")) {
        if (!v->is_array()) throw ConfigError("/checks/run", "expected an array of check names");
        cfg.checks.clear();
        for (std::size_t k = 0; k < v->size(); ++k) {
            const std::string w = "/checks/run/" + std::to_string(k);
            if (!(*v)[k].is_string()) throw ConfigError(w, "expected a check name");
            try {
                cfg.checks.push_back(check_from_string((*v)[k].get<std::string>()));
            } catch (const ConfigError& e) {
                throw ConfigError(w, e.what());
            }
        }
    }
    if (const json* g = node.get("growth")) {
        Node gn(*g, "/checks/growth");
        gn.numbers("times", cfg.growth.times);
        gn.number("tol", cfg.growth.tol);
        gn.finish();
    }
    if (const json* c = node.get("weak_curvature")) {
        Node cn(*c, "/checks/weak_curvature");
        cn.numbers("times", cfg.curvature.times);
        cn.number("mean_tol", cfg.curvature.mean_tol);
        cn.number("masked_tol", cfg.curvature.masked_tol);
        cn.finish();
    }
    if (const json* m = node.get("minimality")) {
        Node mn(*m, "/checks/minimality");
        mn.integer("trials", cfg.minimality.trials);
        mn.unsigned64("seed", cfg.minimality.seed);
        mn.number("C", cfg.minimality.C);
        mn.number("amplitude", cfg.minimality.amplitude);
        mn.number("min_half_width", cfg.minimality.min_half_width);
        mn.number("max_half_width", cfg.minimality.max_half_width);
        mn.number("sample_radius_factor", cfg.minimality.sample_radius_factor);
        mn.boolean("negative_control", cfg.negative_control);
        mn.finish();
    }
    node.number("maxgrad_tol", cfg.maxgrad_tol);
    node.number("inradius_slack", cfg.inradius_slack);
    node.number("curvature_eps_fraction", cfg.curvature_eps_fraction);
    node.number("convergence_tol", cfg.convergence_tol);
    node.finish();
}

std::string line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json matrix_json(const Mat& A)
{
    json rows = json::array();
    for (int i = 0; i < A.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < A.cols(); ++j) r.push_back(A(i, j));
        rows.push_back(r);
    }
    return rows;
}

} // namespace

std::string to_string(CheckKind c)
{
    for (const auto& [k, name] : check_names())
        if (k == c) return name;
    return "unknown";
}

CheckKind check_from_string(const std::string& s)
{
    for (const auto& [k, name] : check_names())
        if (s == name) return k;
    throw ConfigError("", "unknown check '" + s + "'");
}

const std::vector<CheckKind>& all_checks()
{
    static const std::vector<CheckKind> all = [] {
        std::vector<CheckKind> v;
        for (const auto& entry : check_names()) v.push_back(entry.first);
        return v;
    }();
    return all;
}

RunConfig parse_config(const std::string& text, const std::string& source)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + line_column(text, e.byte), "syntax error in config");
    }
    RunConfig cfg;
    Node root(doc, "");
    root.string("name", cfg.name);
    if (const json* v = root.get("norm")) read_norm(*v, cfg.norm);
    if (const json* v = root.get("obstacle")) read_obstacle(*v, cfg.obstacle);
    if (const json* v = root.get("grid")) read_grid(*v, cfg.grid);
    if (const json* v = root.get("solver")) read_solver(*v, cfg.solver);
    if (const json* v = root.get("checks")) read_checks(*v, cfg);
    if (const json* v = root.get("output")) {
        Node out(*v, "/output");
        out.string("dir", cfg.output_dir);
        out.boolean("fields", cfg.write_fields);
        out.boolean("binary", cfg.write_binary);
        out.finish();
    }
    root.finish();
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError(path, "cannot open config file");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path);
}

std::string resolved_config_json(const RunConfig& c)
{
    json j;
    j["name"] = c.name;
    j["norm"] = {{"kind", c.norm.kind}, {"A", matrix_json(c.norm.A)}, {"q", c.norm.q},
                 {"delta", c.norm.delta}, {"polar", c.norm.polar}};
    json verts = json::array();
    for (const P2& p : c.obstacle.vertices) verts.push_back({p.x(), p.y()});
    j["obstacle"] = {{"kind", c.obstacle.kind}, {"center", c.obstacle.center}, {"radius", c.obstacle.radius},
                     {"vertices", verts}};
    j["grid"] = {{"box", {c.grid.lo, c.grid.hi}},
                 {"resolution", c.grid.resolution},
                 {"boundary", to_string(c.grid.boundary)},
                 {"strict_circumradius", c.grid.strict_circumradius}};
    const SolverConfig& s = c.solver;
    j["solver"] = {{"p", s.p},
                   {"schedule", s.schedule},
                   {"delta_reg", s.delta_reg},
                   {"tol_grad", s.tol_grad},
                   {"tol_energy", s.tol_energy},
                   {"tol_step", s.tol_step},
                   {"max_iter", s.max_iter},
                   {"outer_bc", to_string(s.outer_bc)},
                   {"p_min", s.p_min},
                   {"p_margin", s.p_margin},
                   {"allow_small_p", s.allow_small_p},
                   {"cold_start_exponent", s.cold_start_exponent},
                   {"parallel", s.parallel},
                   {"verbosity", s.verbosity}};
    json run = json::array();
    for (CheckKind k : c.checks) run.push_back(to_string(k));
    const MinimalityConfig& m = c.minimality;
    j["checks"] = {
        {"run", run},
        {"growth", {{"times", c.growth.times}, {"tol", c.growth.tol}}},
        {"weak_curvature",
         {{"times", c.curvature.times}, {"mean_tol", c.curvature.mean_tol}, {"masked_tol", c.curvature.masked_tol}}},
        {"minimality",
         {{"trials", m.trials},
          {"seed", m.seed},
          {"C", m.C},
          {"amplitude", m.amplitude},
          {"min_half_width", m.min_half_width},
          {"max_half_width", m.max_half_width},
          {"sample_radius_factor", m.sample_radius_factor},
          {"negative_control", c.negative_control}}},
        {"maxgrad_tol", c.maxgrad_tol},
        {"inradius_slack", c.inradius_slack},
        {"curvature_eps_fraction", c.curvature_eps_fraction},
        {"convergence_tol", c.convergence_tol}};
    j["output"] = {{"dir", c.output_dir}, {"fields", c.write_fields}, {"binary", c.write_binary}};
    return j.dump(2) + "\n";
}

void validate(const RunConfig& cfg)
{
    validate(cfg.solver, 2);
    if (!(cfg.grid.hi > cfg.grid.lo)) throw ConfigError("/grid/box", "box must satisfy lo < hi");
    if (cfg.grid.resolution < 8) throw ConfigError("/grid/resolution", "resolution must be at least 8 cells");
    if (cfg.obstacle.kind == "wulff" && !(cfg.obstacle.radius > 0.0))
        throw ConfigError("/obstacle/radius", "radius must be positive");
    if (cfg.obstacle.kind == "polygon" && cfg.obstacle.vertices.size() < 3)
        throw ConfigError("/obstacle/vertices", "a polygon needs at least three vertices");
    if (cfg.minimality.trials < 0) throw ConfigError("/checks/minimality/trials", "must be nonnegative");
    for (std::size_t k = 0; k < cfg.growth.times.size(); ++k)
        if (cfg.growth.times[k] < 0.0)
            throw ConfigError("/checks/growth/times/" + std::to_string(k), "times must be nonnegative");

    // Geometry: build the obstacle and apply the margin rule without meshing.
    const MinkowskiNorm F = make_norm(cfg.norm);
    const Obstacle obs = make_obstacle(cfg.obstacle, F);
    P2 lo, hi;
    obs.bounding_box(lo, hi);
    const double width = cfg.grid.hi - cfg.grid.lo;
    const double gap = std::min({lo.x() - cfg.grid.lo, lo.y() - cfg.grid.lo, cfg.grid.hi - hi.x(),
                                 cfg.grid.hi - hi.y()});
    const DomainOptions defaults;
    if (gap < defaults.margin_fraction * width) {
        std::ostringstream os;
        os << "obstacle leaves a margin of " << gap << " to the box edge, below "
           << defaults.margin_fraction << " x box width " << width;
        throw ConfigError("/obstacle", os.str());
    }
}

MinkowskiNorm make_norm(const NormSpec& s)
{
    MinkowskiNorm F = MinkowskiNorm::euclidean(2);
    try {
        if (s.kind == "euclidean")
            F = MinkowskiNorm::euclidean(2);
        else if (s.kind == "ellipsoidal")
            F = MinkowskiNorm::ellipsoidal(s.A);
        else if (s.kind == "lq")
            F = MinkowskiNorm::lq(2, s.q, s.delta);
        else
            throw ConfigError("/norm/kind", "unknown norm kind '" + s.kind + "'");
        if (s.polar == "closed_form") F = F.with_polar_mode(PolarMode::closed_form);
        if (s.polar == "numeric_sup") F = F.with_polar_mode(PolarMode::numeric_sup);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("/norm", e.what());
    }
    if (F.dim() != 2) throw ConfigError("/norm/A", "grid runs are planar; the norm must be 2 x 2");
    return F;
}

Obstacle make_obstacle(const ObstacleSpec& s, const MinkowskiNorm& F)
{
    try {
        if (s.kind == "wulff") {
            Vec c(2);
            c << s.center.at(0), s.center.at(1);
            return Obstacle::wulff(WulffShape(F, c, s.radius));
        }
        return Obstacle::polygon(s.vertices);
    } catch (const Error& e) {
        throw ConfigError("/obstacle", e.what());
    }
}

Lattice make_lattice(const GridSpec& s)
{
    return Lattice::square(s.resolution, s.lo, s.hi);
}

GridDomain make_domain(const RunConfig& cfg, const MinkowskiNorm& F)
{
    DomainOptions opt;
    opt.treatment = cfg.grid.boundary;
    opt.strict_circumradius = cfg.grid.strict_circumradius;
    return GridDomain(make_lattice(cfg.grid), make_obstacle(cfg.obstacle, F), opt);
}

std::vector<double> parse_number_list(const std::string& s, const std::string& where)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError(where, "'" + item + "' is not a number");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw ConfigError(where, "'" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(where, "empty list");
    return out;
}

} // namespace iamcf
