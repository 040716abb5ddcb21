#include <carnot/experiment.hpp>

#include <carnot/errors.hpp>
#include <carnot/semiconvex.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace carnot {

using nlohmann::json;

std::vector<std::string> experiment_names() {
    return {"checks", "solve", "comparison", "p_limit", "convolution", "translation_map", "smp"};
}

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& why) {
    throw ConfigError("config '" + key + "': " + why);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_fail(key, e.what());
    }
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            config_fail(where.empty() ? k : where + "." + k, "unknown key");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

GridGeometry grid_from_json(const json& g, int dim) {
    if (!g.is_object()) config_fail("grid", "expected a table");
    Box box;
    std::vector<int> shape;
    if (g.contains("lo") || g.contains("hi")) {
        reject_unknown(g, "grid", {"lo", "hi", "shape", "nodes"});
        const auto lo = get_or<std::vector<double>>(g, "lo", {});
        const auto hi = get_or<std::vector<double>>(g, "hi", {});
        if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
            config_fail("grid", "lo/hi must have " + std::to_string(dim) + " entries");
        box.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), dim);
        box.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), dim);
    } else {
        reject_unknown(g, "grid", {"half_width", "shape", "nodes"});
        box = Box::cube(dim, get_or<double>(g, "half_width", 1.0));
    }
    if (g.contains("shape")) {
        shape = get_or<std::vector<int>>(g, "shape", {});
        if (static_cast<int>(shape.size()) != dim) config_fail("grid.shape", "needs " + std::to_string(dim) + " entries");
    } else {
        shape.assign(static_cast<std::size_t>(dim), get_or<int>(g, "nodes", 17));
    }
    try {
        return GridGeometry(box, shape);
    } catch (const Error& e) {
        config_fail("grid", e.what());
    }
}

std::string boundary_from_json(const json& b, const char* key) {
    if (b.is_string()) return b.get<std::string>();
    if (!b.is_object()) config_fail(key, "expected an expression string or a table");
    reject_unknown(b, key, {"expr", "preset", "params"});
    if (b.contains("expr")) return get_or<std::string>(b, "expr", "");
    if (!b.contains("preset")) config_fail(key, "needs 'expr' or 'preset'");
    try {
        return boundary_preset(get_or<std::string>(b, "preset", ""), get_or<std::map<std::string, double>>(b, "params", {}));
    } catch (const Error& e) {
        config_fail(key, e.what());
    }
}

Expression expression_or_fail(const std::string& text, int dim, const char* key) {
    try {
        return parse_expression(text, dim);
    } catch (const Error& e) {
        config_fail(key, e.what());
    }
}

json solve_summary(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"final_residual", r.final_residual},
            {"converged", r.converged},
            {"stop_reason", r.stop_reason},
            {"method", r.method},
            {"linear_failures", r.linear_failures},
            {"notes", r.metadata}};
}

json check_json(const CheckReport& r) {
    return {{"check", r.check},
            {"samples", r.samples},
            {"violations", r.violations},
            {"worst_slack", r.worst_slack},
            {"min_value", r.min_value},
            {"notes", r.notes},
            {"passed", r.passed()}};
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) os << ',';
            if (std::isinf(r[i])) os << (r[i] > 0 ? "inf" : "-inf");
            else os << r[i];
        }
        os << '\n';
    }
}

/// Collects asserted checks, result payloads and artifacts for one run.
class Run {
public:
    Run(const ExperimentConfig& cfg, std::string out_dir) : cfg_(cfg), out_(std::move(out_dir)) {}

    void check(const std::string& name, bool ok, double value, double threshold) {
        checks_.push_back({{"name", name}, {"passed", ok}, {"value", value}, {"threshold", threshold}});
        passed_ = passed_ && ok;
    }

    json& results() { return results_; }

    bool writes() const { return !out_.empty(); }
    std::string path(const std::string& file) {
        artifacts_.push_back(file);
        return (std::filesystem::path(out_) / file).string();
    }

    void grid(const std::string& file, const GridFunction& g) {
        if (writes()) save(path(file), g, true);
    }

    void csv(const std::string& file, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
        if (writes()) write_csv(path(file), header, rows);
    }

    SolveResult solve_field(const OperatorSpec& op, const ScalarField& f, const GridFunction& initial, const std::string& label) {
        const auto prob = make_problem(cfg_.group, op, cfg_.grid, f, cfg_.eps_reg);
        SolveResult res = solve(prob, initial, cfg_.solve);
        wall_[label] = res.report.wall_time;
        return res;
    }

    GridFunction random_initial(std::uint64_t seed, double lo, double hi) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(lo, hi);
        GridFunction g(cfg_.grid);
        for (auto& v : g.values()) v = u(rng);
        return g;
    }

    ExperimentOutcome finish(double wall) {
        json report;
        report["schema_version"] = kReportSchemaVersion;
        report["name"] = cfg_.name;
        report["experiment"] = cfg_.experiment;
        report["config"] = describe(cfg_);
        report["checks"] = checks_;
        report["results"] = results_;
        report["passed"] = passed_;
        if (writes()) artifacts_.push_back("report.json");
        report["artifacts"] = artifacts_;
        report["metadata"] = metadata(wall);
        if (writes()) write_report(out_, report);
        return {report, passed_};
    }

private:
    json metadata(double wall) const {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        return {{"generated_at", buf}, {"wall_time_s", wall}, {"solve_wall_time_s", wall_}};
    }

    const ExperimentConfig& cfg_;
    std::string out_;
    json checks_ = json::array();
    json results_ = json::object();
    std::vector<std::string> artifacts_;
    std::map<std::string, double> wall_;
    bool passed_ = true;
};

void run_checks(const ExperimentConfig& cfg, Run& run) {
    const json& s = cfg.section;
    const int samples = get_or<int>(s, "samples", 1000);
    const json expect = s.value("expect", json::object());
    const int m = cfg.group.generators();
    const auto ell = check_ellipticity(cfg.op, sample_gradients(m, samples, cfg.seed));
    const auto sc = check_scaling(cfg.op, sample_scaling(m, samples, cfg.seed + 1));
    const auto smp = check_smp_hypotheses(cfg.op, sample_smp(m, samples, cfg.seed + 2));
    run.results()["ellipticity"] = check_json(ell);
    run.results()["scaling"] = check_json(sc);
    run.results()["smp_hypotheses"] = {{"monotonicity", check_json(smp.monotonicity)},
                                       {"scaling", check_json(smp.scaling)},
                                       {"positivity", check_json(smp.positivity)},
                                       {"passed", smp.passed()}};
    run.check("ellipticity", ell.passed() == get_or<bool>(expect, "ellipticity", true), ell.violations, 0);
    run.check("scaling", sc.passed() == get_or<bool>(expect, "scaling", true), sc.violations, 0);
    run.check("smp_hypotheses", smp.passed() == get_or<bool>(expect, "smp", true),
              smp.monotonicity.violations + smp.scaling.violations + smp.positivity.violations, 0);

    const auto violations = validate_spec(cfg.group);
    json vj = json::array();
    for (const auto& v : violations) vj.push_back({{"invariant", v.invariant}, {"detail", v.detail}});
    const auto rank = hormander_rank(cfg.group, Point::Zero(cfg.group.dim()), cfg.group.step());
    run.results()["group"] = {{"violations", vj},
                              {"hormander_rank", rank.achieved_rank},
                              {"depth_used", rank.depth_used},
                              {"dimension", cfg.group.dim()}};
    run.check("group_valid", violations.empty(), static_cast<double>(violations.size()), 0);
    run.check("hormander", rank.achieved_rank == cfg.group.dim(), rank.achieved_rank, cfg.group.dim());
}

void run_solve(const ExperimentConfig& cfg, Run& run) {
    const json& s = cfg.section;
    const std::string init = get_or<std::string>(s, "initial", "boundary");
    const auto f = cfg.boundary.to_field();
    const auto fvals = GridFunction::sample(cfg.grid, f);
    GridFunction start;
    if (init == "boundary") start = fvals;
    else if (init == "zero") start = GridFunction(cfg.grid);
    else if (init == "random") start = run.random_initial(cfg.seed, fvals.min(), fvals.max());
    else config_fail("solve.initial", "expected boundary, zero or random");
    const auto res = run.solve_field(cfg.op, f, start, "solve");
    run.results()["solve"] = solve_summary(res.report);
    run.check("converged", res.report.converged, res.report.final_residual, cfg.solve.tolerance);
    if (cfg.reference) {
        const double err = max_abs_diff(res.u, GridFunction::sample(cfg.grid, cfg.reference->to_field()));
        const double thr = get_or<double>(s, "reference_tolerance", 10.0 * cfg.solve.tolerance);
        run.results()["error_vs_reference"] = err;
        run.check("error_vs_reference", err <= thr, err, thr);
    }
    const auto prob = make_problem(cfg.group, cfg.op, cfg.grid, f, cfg.eps_reg);
    run.grid("solution.grid", res.u);
    run.grid("residual.grid", residual(prob, res.u));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < res.report.history.size(); ++k)
        rows.push_back({static_cast<double>(k + 1), res.report.history[k]});
    run.csv("convergence.csv", {"iteration", "residual"}, rows);
}

void run_comparison(const ExperimentConfig& cfg, Run& run) {
    const json& s = cfg.section;
    const int dim = cfg.group.dim();
    const std::string f_text = cfg.boundary.to_string();
    const std::string g_text =
        s.contains("upper") ? boundary_from_json(s.at("upper"), "comparison.upper") : "(" + f_text + ") + 0.25*exp(-(x1 - 1)^2)";
    const double c = get_or<double>(s, "shift", 0.5);
    const double tol = cfg.solve.tolerance;
    const auto f = cfg.boundary.to_field();
    const auto g = expression_or_fail(g_text, dim, "comparison.upper").to_field();
    const auto fc = expression_or_fail("(" + f_text + ") + " + std::to_string(c), dim, "comparison.shift").to_field();
    const auto fv = GridFunction::sample(cfg.grid, f);
    const auto gv = GridFunction::sample(cfg.grid, g);
    for (std::size_t i = 0; i < fv.size(); ++i)
        if (cfg.grid.is_boundary(i) && fv[i] > gv[i]) config_fail("comparison.upper", "boundary data must satisfy f <= g");
    const double lo = std::min(fv.min(), gv.min()), hi = std::max(fv.max(), gv.max()) + c;
    const auto uf = run.solve_field(cfg.op, f, run.random_initial(cfg.seed, lo, hi), "u_f");
    const auto ug = run.solve_field(cfg.op, g, run.random_initial(cfg.seed + 2, lo, hi), "u_g");
    const auto uc = run.solve_field(cfg.op, fc, run.random_initial(cfg.seed + 3, lo, hi), "u_f_plus_c");
    const auto u2 = run.solve_field(cfg.op, f, run.random_initial(cfg.seed + 1, lo, hi), "u_f_second_start");
    double excess = -std::numeric_limits<double>::infinity(), shift = 0.0;
    for (std::size_t i = 0; i < fv.size(); ++i) {
        excess = std::max(excess, uf.u[i] - ug.u[i]);
        shift = std::max(shift, std::abs(uc.u[i] - uf.u[i] - c));
    }
    const double unique = max_abs_diff(uf.u, u2.u);
    run.results()["upper_expr"] = g_text;
    run.results()["shift"] = c;
    run.results()["solves"] = {{"u_f", solve_summary(uf.report)},
                               {"u_g", solve_summary(ug.report)},
                               {"u_f_plus_c", solve_summary(uc.report)},
                               {"u_f_second_start", solve_summary(u2.report)}};
    run.results()["max_uf_minus_ug"] = excess;
    run.results()["max_shift_defect"] = shift;
    run.results()["max_start_difference"] = unique;
    const bool all_conv = uf.report.converged && ug.report.converged && uc.report.converged && u2.report.converged;
    run.check("all_converged", all_conv, std::max({uf.report.final_residual, ug.report.final_residual,
                                                   uc.report.final_residual, u2.report.final_residual}), tol);
    run.check("ordering", excess <= 10 * tol, excess, 10 * tol);
    run.check("additive_invariance", shift <= 2 * tol, shift, 2 * tol);
    run.check("start_independence", unique <= 1e-6, unique, 1e-6);
    run.grid("u_f.grid", uf.u);
    run.grid("u_g.grid", ug.u);
}

void run_p_limit(const ExperimentConfig& cfg, Run& run) {
    const auto ps = get_or<std::vector<double>>(cfg.section, "ps", {2, 4, 8, 16, 32});
    if (ps.size() < 2) config_fail("p_limit.ps", "needs at least two exponents");
    const auto t0 = std::chrono::steady_clock::now();
    const auto study = p_limit_study(cfg.group, cfg.grid, cfg.boundary.to_field(), ps, cfg.solve, cfg.eps_reg);
    (void)t0;
    json rows = json::array();
    std::vector<std::vector<double>> csv;
    bool conv = true;
    for (const auto& r : study.rows) {
        rows.push_back({{"p", std::isinf(r.p) ? json("inf") : json(r.p)},
                        {"residual", r.residual},
                        {"iterations", r.iterations},
                        {"converged", r.converged},
                        {"error_vs_reference", r.error_vs_reference}});
        csv.push_back({r.p, r.residual, static_cast<double>(r.iterations), r.error_vs_reference});
        conv = conv && r.converged;
    }
    run.results()["table"] = rows;
    const double first = study.rows.front().error_vs_reference;
    const double last = study.rows[ps.size() - 1].error_vs_reference;
    run.check("all_converged", conv, 0, 0);
    run.check("largest_p_closer_than_smallest", last < first, last, first);
    run.csv("p_limit.csv", {"p", "residual", "iterations", "error_vs_reference"}, csv);
    run.grid("u_inf.grid", study.reference);
}

void run_convolution(const ExperimentConfig& cfg, Run& run) {
    auto eps = get_or<std::vector<double>>(cfg.section, "eps", {0.5, 0.25, 0.125});
    if (eps.empty()) config_fail("convolution.eps", "needs at least one value");
    for (double e : eps)
        if (!(e > 0.0)) config_fail("convolution.eps", "values must be positive");
    std::sort(eps.begin(), eps.end());
    const auto w = GridFunction::sample(cfg.grid, cfg.boundary.to_field());
    GridFunction neg = w;
    for (auto& v : neg.values()) v = -v;
    bool above = true, below = true, ordered = true, gaps = true, finite = true, dual = true;
    double prev_gap = -1.0;
    GridFunction prev;
    json rows = json::array();
    std::vector<std::vector<double>> csv;
    for (double e : eps) {
        const auto sup = sup_convolution(cfg.group, w, e);
        const auto inf = inf_convolution(cfg.group, w, e);
        auto mirrored = sup_convolution(cfg.group, neg, e);
        for (auto& v : mirrored.values()) v = -v;
        dual = dual && max_abs_diff(inf, mirrored) == 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            above = above && sup[i] >= w[i];
            below = below && inf[i] <= w[i];
            if (prev.size()) ordered = ordered && sup[i] >= prev[i];
        }
        const double gap = max_abs_diff(sup, w);
        gaps = gaps && gap >= prev_gap;
        const double lam = semiconvexity_constant(sup);
        const double mu = semiconcavity_constant(inf);
        finite = finite && std::isfinite(lam) && std::isfinite(mu);
        rows.push_back({{"eps", e}, {"sup_gap", gap}, {"inf_gap", max_abs_diff(inf, w)},
                        {"semiconvexity", std::isfinite(lam) ? json(lam) : json("inf")},
                        {"semiconcavity", std::isfinite(mu) ? json(mu) : json("inf")}});
        csv.push_back({e, gap, max_abs_diff(inf, w), lam, mu});
        prev_gap = gap;
        prev = sup;
    }
    run.results()["table"] = rows;
    run.check("sup_above", above, 0, 0);
    run.check("inf_below", below, 0, 0);
    run.check("eps_monotone", ordered, 0, 0);
    run.check("gap_shrinks_with_eps", gaps, 0, 0);
    run.check("semiconvex_finite", finite, 0, 0);
    run.check("duality_exact", dual, 0, 0);
    run.csv("convolution.csv", {"eps", "sup_gap", "inf_gap", "semiconvexity", "semiconcavity"}, csv);
}

void run_translation(const ExperimentConfig& cfg, Run& run) {
    const json& s = cfg.section;
    const double delta = get_or<double>(s, "delta", 0.2);
    const int pairs = get_or<int>(s, "pairs", 100);
    if (!(delta > 0.0) || pairs < 1) config_fail("translation_map", "needs delta > 0 and pairs >= 1");
    const int dim = cfg.group.dim();
    const std::string v_text = s.contains("v") ? boundary_from_json(s.at("v"), "translation_map.v") : cfg.boundary.to_string();
    const auto u = GridFunction::sample(cfg.grid, cfg.boundary.to_field());
    const auto v = GridFunction::sample(cfg.grid, expression_or_fail(v_text, dim, "translation_map.v").to_field());
    const auto mask = metric_interior_mask(cfg.group, cfg.grid, delta);
    const auto hs = sample_ball(cfg.group, 0.95 * delta, 2 * pairs + 1, cfg.seed);
    const double lip = grid_lipschitz_constant(cfg.group, u);
    const double interp = interpolation_error(u);
    const Point& l = hs.back();
    int violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> csv;
    for (int k = 0; k < pairs; ++k) {
        const auto& h = hs[static_cast<std::size_t>(2 * k)];
        const auto& hp = hs[static_cast<std::size_t>(2 * k + 1)];
        const auto a = translation_max(cfg.group, u, v, h, l, delta, mask);
        const auto b = translation_max(cfg.group, u, v, hp, l, delta, mask);
        const double bound = metric(cfg.group, h, hp) * lip + 4.0 * interp;
        const double diff = std::abs(a.M - b.M);
        worst = std::min(worst, bound - diff);
        if (diff > bound) ++violations;
        csv.push_back({static_cast<double>(k), a.M, b.M, metric(cfg.group, h, hp), bound});
    }
    GridFunction u2 = u, v2 = v;
    for (auto& x : u2.values()) x += 1.0;
    for (auto& x : v2.values()) x -= 0.25;
    const auto r1 = translation_max(cfg.group, u, v, hs[0], l, delta, mask);
    const auto r2 = translation_max(cfg.group, u2, v2, hs[0], l, delta, mask);
    const bool relabel = std::abs((r2.M - r1.M) - 1.25) <= 1e-12 * (1.0 + std::abs(r1.M)) && r1.argmax_nodes == r2.argmax_nodes;
    bool in_mask = true;
    for (std::size_t i : r1.argmax_nodes) in_mask = in_mask && mask[i];
    run.results()["v_expr"] = v_text;
    run.results()["delta"] = delta;
    run.results()["lipschitz_constant"] = lip;
    run.results()["interpolation_error"] = interp;
    run.results()["min_slack"] = worst;
    run.results()["example"] = {{"M", r1.M}, {"argmax_nodes", r1.argmax_nodes}};
    run.check("lipschitz_bound", violations == 0, violations, 0);
    run.check("relabel_invariance", relabel, r2.M - r1.M, 1.25);
    run.check("argmax_in_mask", in_mask, static_cast<double>(r1.argmax_nodes.size()), 0);
    run.csv("translation.csv", {"pair", "M_h", "M_h_prime", "distance", "bound"}, csv);
}

void run_smp(const ExperimentConfig& cfg, Run& run) {
    const double tol = cfg.solve.tolerance;
    const auto f = cfg.boundary.to_field();
    const auto res = run.solve_field(cfg.op, f, GridFunction::sample(cfg.grid, f), "solve");
    const auto w = smp_witness(res.u, 10 * tol);
    run.results()["solve"] = solve_summary(res.report);
    run.results()["witness"] = {{"max_value", w.max_value},     {"boundary_max", w.boundary_max},
                                {"interior_max", w.interior_max}, {"gap", w.gap},
                                {"interior_attains", w.interior_attains}, {"constant_case", w.constant_case},
                                {"argmax_node", w.argmax_node}};
    run.check("converged", res.report.converged, res.report.final_residual, tol);
    if (w.constant_case) {
        run.check("constant_case_flagged", true, w.gap, 10 * tol);
    } else {
        run.check("boundary_only_max", !w.interior_attains, w.gap, 10 * tol);
        run.check("interior_gap", w.gap > 10 * tol, w.gap, 10 * tol);
    }
    run.grid("solution.grid", res.u);
}

}  // namespace

GroupSpec group_from_json(const json& j) {
    if (!j.is_object()) config_fail("group", "expected a name or a table");
    reject_unknown(j, "group", {"name", "step", "layer_dims", "constants"});
    const auto dims = get_or<std::vector<int>>(j, "layer_dims", {});
    if (dims.empty()) config_fail("group.layer_dims", "required");
    if (j.contains("step") && get_or<int>(j, "step", 0) != static_cast<int>(dims.size()))
        config_fail("group.step", "must equal the number of layers");
    std::vector<StructureConstant> cs;
    for (const auto& q : j.value("constants", json::array())) {
        if (!q.is_array() || q.size() != 4) config_fail("group.constants", "entries are [k, i, j, value]");
        try {
            cs.push_back({q[0].get<int>() - 1, q[1].get<int>() - 1, q[2].get<int>() - 1, q[3].get<double>()});
        } catch (const json::exception& e) {
            config_fail("group.constants", e.what());
        }
    }
    try {
        return GroupSpec(get_or<std::string>(j, "name", "custom"), dims, cs);
    } catch (const Error& e) {
        config_fail("group", e.what());
    }
}

json group_to_json(const GroupSpec& spec) {
    json cs = json::array();
    for (const auto& c : spec.supplied()) cs.push_back({c.k + 1, c.i + 1, c.j + 1, c.value});
    return {{"name", spec.name()}, {"step", spec.step()}, {"layer_dims", spec.layer_dims()}, {"constants", cs}};
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("config: top level must be a table");
    reject_unknown(j, "", {"name", "experiment", "group", "group_file", "operator", "grid", "boundary", "reference", "seed",
                           "solver", "checks", "solve", "comparison", "p_limit", "convolution", "translation_map", "smp"});
    ExperimentConfig cfg;
    cfg.name = get_or<std::string>(j, "name", "experiment");
    cfg.experiment = get_or<std::string>(j, "experiment", "");
    const auto names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        config_fail("experiment", "unknown experiment '" + cfg.experiment + "'");

    if (j.contains("group_file")) {
        const auto p = std::filesystem::path(base_dir) / get_or<std::string>(j, "group_file", "");
        cfg.group = group_from_json(parse_json_text(read_file(p.string()), p.string()));
        cfg.group_label = p.filename().string();
    } else if (j.contains("group") && j.at("group").is_object()) {
        cfg.group = group_from_json(j.at("group"));
        cfg.group_label = cfg.group.name();
    } else {
        cfg.group_label = get_or<std::string>(j, "group", "heisenberg");
        try {
            cfg.group = builtin_group(cfg.group_label);
        } catch (const Error& e) {
            config_fail("group", e.what());
        }
    }
    const int dim = cfg.group.dim();

    const json op = j.value("operator", json("sub_laplacian"));
    if (op.is_string()) {
        cfg.operator_name = op.get<std::string>();
    } else if (op.is_object()) {
        reject_unknown(op, "operator", {"name", "params", "choices"});
        cfg.operator_name = get_or<std::string>(op, "name", "");
        cfg.operator_params = get_or<std::map<std::string, double>>(op, "params", {});
        cfg.operator_choices = get_or<std::map<std::string, std::string>>(op, "choices", {});
    } else {
        config_fail("operator", "expected a name or a table");
    }
    try {
        cfg.op = builtin_operator(cfg.operator_name, cfg.operator_params, cfg.operator_choices);
    } catch (const Error& e) {
        config_fail("operator", e.what());
    }

    cfg.grid = grid_from_json(j.value("grid", json::object()), dim);
    cfg.boundary_text = boundary_from_json(j.value("boundary", json("0")), "boundary");
    cfg.boundary = expression_or_fail(cfg.boundary_text, dim, "boundary");
    if (j.contains("reference"))
        cfg.reference = expression_or_fail(boundary_from_json(j.at("reference"), "reference"), dim, "reference");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 1);

    const json sv = j.value("solver", json::object());
    reject_unknown(sv, "solver", {"tolerance", "max_iter", "method", "eps_reg", "continuation", "scheme", "directions",
                                  "stencil_radius", "viscosity"});
    cfg.solve.tolerance = get_or<double>(sv, "tolerance", 1e-8);
    if (!(cfg.solve.tolerance > 0.0)) config_fail("solver.tolerance", "must be positive");
    cfg.solve.max_iter = get_or<int>(sv, "max_iter", 300);
    if (cfg.solve.max_iter < 1) config_fail("solver.max_iter", "must be at least 1");
    const auto method = get_or<std::string>(sv, "method", "newton");
    if (method == "newton") cfg.solve.method = SolveMethod::Newton;
    else if (method == "explicit") cfg.solve.method = SolveMethod::Explicit;
    else config_fail("solver.method", "expected newton or explicit");
    cfg.solve.continuation = get_or<bool>(sv, "continuation", true);
    cfg.eps_reg = get_or<double>(sv, "eps_reg", -1.0);
    const auto scheme = get_or<std::string>(sv, "scheme", cfg.op.name == "infinity" ? "midrange" : "central");
    if (scheme == "central") cfg.solve.scheme = Scheme::Central;
    else if (scheme == "midrange") cfg.solve.scheme = Scheme::Midrange;
    else config_fail("solver.scheme", "expected central or midrange");
    if (cfg.solve.scheme == Scheme::Midrange && cfg.op.name != "infinity" && cfg.experiment != "p_limit")
        config_fail("solver.scheme", "midrange applies to the infinity operator only");
    cfg.solve.directions = get_or<int>(sv, "directions", 32);
    if (cfg.solve.directions < 2) config_fail("solver.directions", "must be at least 2");
    cfg.solve.stencil_radius = get_or<double>(sv, "stencil_radius", -1.0);
    cfg.solve.viscosity = get_or<double>(sv, "viscosity", -1.0);
    cfg.section = j.value(cfg.experiment, json::object());
    if (!cfg.section.is_object()) config_fail(cfg.experiment, "expected a table");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    const auto base = std::filesystem::path(path).parent_path().string();
    return parse_config(parse_json_text(read_file(path), path), base.empty() ? "." : base);
}

json describe(const ExperimentConfig& cfg) {
    json d;
    d["name"] = cfg.name;
    d["experiment"] = cfg.experiment;
    d["group"] = group_to_json(cfg.group);
    d["group"]["label"] = cfg.group_label;
    d["operator"] = {{"name", cfg.operator_name},
                     {"params", cfg.operator_params},
                     {"choices", cfg.operator_choices},
                     {"phi", cfg.op.phi_label},
                     {"degenerate", cfg.op.degenerate},
                     {"singular_at_zero", cfg.op.singular_at_zero}};
    std::vector<double> lo(cfg.grid.box().lo.data(), cfg.grid.box().lo.data() + cfg.grid.dim());
    std::vector<double> hi(cfg.grid.box().hi.data(), cfg.grid.box().hi.data() + cfg.grid.dim());
    d["grid"] = {{"lo", lo}, {"hi", hi}, {"shape", cfg.grid.shape()}};
    d["boundary"] = cfg.boundary.to_string();
    if (cfg.reference) d["reference"] = cfg.reference->to_string();
    d["seed"] = cfg.seed;
    double h2 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < cfg.grid.dim(); ++a) h2 = std::min(h2, cfg.grid.spacing(a) * cfg.grid.spacing(a));
    const double eps = cfg.eps_reg >= 0.0 ? cfg.eps_reg : h2;
    d["solver"] = {{"tolerance", cfg.solve.tolerance},
                   {"max_iter", cfg.solve.max_iter},
                   {"method", cfg.solve.method == SolveMethod::Newton ? "newton" : "explicit"},
                   {"continuation", cfg.solve.continuation},
                   {"scheme", cfg.solve.scheme == Scheme::Midrange ? "midrange" : "central"},
                   {"eps_reg", eps}};
    if (cfg.solve.scheme == Scheme::Midrange) {
        d["solver"]["directions"] = cfg.solve.directions;
        d["solver"]["stencil_radius"] = cfg.solve.stencil_radius > 0.0 ? cfg.solve.stencil_radius : std::sqrt(std::sqrt(h2));
    } else if (cfg.op.degenerate) {
        d["solver"]["viscosity"] = cfg.solve.viscosity >= 0.0 ? cfg.solve.viscosity : h2;
    }
    d[cfg.experiment] = cfg.section;
    return d;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    Run run(cfg, out_dir);
    if (cfg.experiment == "checks") run_checks(cfg, run);
    else if (cfg.experiment == "solve") run_solve(cfg, run);
    else if (cfg.experiment == "comparison") run_comparison(cfg, run);
    else if (cfg.experiment == "p_limit") run_p_limit(cfg, run);
    else if (cfg.experiment == "convolution") run_convolution(cfg, run);
    else if (cfg.experiment == "translation_map") run_translation(cfg, run);
    else if (cfg.experiment == "smp") run_smp(cfg, run);
    else throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    return run.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

json error_report(const std::string& type, const std::string& message) {
    return {{"schema_version", kReportSchemaVersion},
            {"passed", false},
            {"error", {{"type", type}, {"message", message}}},
            {"metadata", json::object()}};
}

void write_report(const std::string& out_dir, const json& report) {
    std::filesystem::create_directories(out_dir);
    const auto path = (std::filesystem::path(out_dir) / "report.json").string();
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << report.dump(2) << '\n';
}

}  // namespace carnot
