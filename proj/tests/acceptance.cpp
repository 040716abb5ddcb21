// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include "oracles.hpp"

#include <carnot/expression.hpp>
#include <carnot/group.hpp>
#include <carnot/horizontal.hpp>
#include <carnot/operators.hpp>
#include <carnot/semiconvex.hpp>
#include <carnot/solver.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace carnot;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Point random_point(std::mt19937_64& rng, int n, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Point p(n);
    for (int k = 0; k < n; ++k) p[k] = u(rng);
    return p;
}

double rel_err(const Point& a, const Point& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

ScalarField expr(const std::string& text) { return parse_expression(text).to_field(); }

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void group_algebra(Outcome& o) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (const auto& g : {heisenberg(1), heisenberg(2), engel(), free_step2(2)}) {
        for (int s = 0; s < 1000; ++s) {
            const Point x = random_point(rng, g.dim()), y = random_point(rng, g.dim()), z = random_point(rng, g.dim());
            worst = std::max(worst, rel_err(multiply(g, multiply(g, x, y), z), multiply(g, x, multiply(g, y, z))));
            worst = std::max(worst, rel_err(multiply(g, x, identity(g)), x));
            worst = std::max(worst, rel_err(multiply(g, identity(g), x), x));
            worst = std::max(worst, multiply(g, x, inverse(x)).cwiseAbs().maxCoeff());
            worst = std::max(worst, multiply(g, inverse(x), x).cwiseAbs().maxCoeff());
        }
    }
    double oracle_err = 0.0;
    const auto h1 = heisenberg(1);
    for (int s = 0; s < 1000; ++s) {
        const Point x = random_point(rng, 3), y = random_point(rng, 3);
        const Eigen::Vector3d ref = oracle::h1_coords(oracle::h1_matrix(x) * oracle::h1_matrix(y));
        oracle_err = std::max(oracle_err, rel_err(multiply(h1, x, y), ref));
    }
    const double t = seconds_since(t0);
    o.detail << "axioms " << worst << ", H1 oracle " << oracle_err << ", " << t << " s";
    o.require(worst <= 1e-12, "axioms <= 1e-12");
    o.require(oracle_err <= 1e-14, "matrix oracle to rounding");
    o.require(t < 5.0, "runtime < 5 s");
}

void homogeneity(Outcome& o) {
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (const auto& g : {heisenberg(1), heisenberg(2), engel(), free_step2(2)}) {
        for (int s = 0; s < 1000; ++s) {
            const Point x = random_point(rng, g.dim()), y = random_point(rng, g.dim()), z = random_point(rng, g.dim());
            const double lam = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
            const double n = hom_norm(g, x);
            worst = std::max(worst, std::abs(hom_norm(g, dilate(g, lam, x)) - lam * n) / (lam * n));
            const double d = metric(g, x, y);
            worst = std::max(worst, std::abs(metric(g, multiply(g, z, x), multiply(g, z, y)) - d) / d);
        }
    }
    o.detail << "max relative error " << worst;
    o.require(worst <= 1e-12, "error <= 1e-12");
}

void hormander(Outcome& o) {
    const auto h = hormander_rank(heisenberg(1), Point::Zero(3), 2);
    const auto e = hormander_rank(engel(), Point::Zero(4), 3);
    const auto eshort = hormander_rank(engel(), Point::Zero(4), 2);
    const auto a = hormander_rank(abelian(4), Point::Zero(4), 1);
    o.detail << "H1 " << h.achieved_rank << "@" << h.depth_used << ", Engel " << e.achieved_rank << "@" << e.depth_used
             << " (depth 2: " << eshort.achieved_rank << "), R^4 " << a.achieved_rank << "@" << a.depth_used;
    o.require(h.achieved_rank == 3 && h.depth_used == 2, "H1 rank 3 at depth 2");
    o.require(e.achieved_rank == 4 && e.depth_used == 3 && eshort.achieved_rank < 4, "Engel rank 4 at depth 3");
    o.require(a.achieved_rank == 4 && a.depth_used == 1, "abelian rank n at depth 1");
}

void derivative_cross_validation(Outcome& o) {
    const auto h1 = heisenberg(1);
    const std::vector<std::string> fields = {"sin(x)*cos(y) + t", "exp(x*y) - t^2", "x^3 - 3*x*y^2 + x*t",
                                             "cos(t + x*y)", "log(2 + x^2)*y + t*y"};
    std::mt19937_64 rng(4);
    double min_order = INFINITY, worst_ratio = 0.0;
    for (const auto& text : fields) {
        const auto u = expr(text);
        for (int s = 0; s < 5; ++s) {
            const Point x = random_point(rng, 3, 0.8);
            const Eigen::VectorXd xi = horizontal_jet(frame_at(h1, x), u.jet(x)).hgrad;
            for (int i = 0; i < 2; ++i) {
                // Forward differences at t and t/2 on the finest pair; Richardson removes the O(t) term.
                const double t = 0.1 * std::pow(0.5, 5);
                const double coarse = group_directional_derivative(h1, u, x, 1, i + 1, 2 * t);
                const double fine = group_directional_derivative(h1, u, x, 1, i + 1, t);
                const double e_coarse = std::abs(coarse - xi[i]), e_fine = std::abs(fine - xi[i]);
                const double e_extrap = std::abs(2 * fine - coarse - xi[i]);
                min_order = std::min(min_order, std::log2(e_coarse / e_fine));
                worst_ratio = std::max(worst_ratio, e_extrap / std::max(e_fine, 1e-12));
            }
        }
    }
    o.detail << "min order " << min_order << ", worst extrapolated/raw error ratio " << worst_ratio;
    o.require(min_order >= 0.9, "order >= 0.9");
    o.require(worst_ratio <= 0.1, "extrapolation gains a decade");
}

void exact_kernels(Outcome& o) {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    double worst = 0.0;
    for (const char* text : {"0.7*x - 1.3*y", "t"}) {
        const auto f = expr(text);
        const auto prob = make_problem(h1, builtin_operator("infinity"), g, f);
        worst = std::max(worst, interior_residual_norm(prob, residual(prob, GridFunction::sample(g, f))));
    }
    o.detail << "max interior residual " << worst;
    o.require(worst <= 1e-10, "residual <= 1e-10");
}

void aronsson_lift(Outcome& o) {
    const auto h1 = heisenberg(1);
    const auto f = expr("pow(abs(x), 4/3) - pow(abs(y), 4/3)");
    std::vector<double> hs, errs;
    for (int n : {17, 33, 65}) {
        const auto g = GridGeometry::cube(3, 1.0, n);
        const auto prob = make_problem(h1, builtin_operator("infinity"), g, f);
        const auto r = residual(prob, GridFunction::sample(g, f));
        double m = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point x = g.node(i);
            if (!g.is_boundary(i) && std::abs(x[0]) >= 0.2 && std::abs(x[1]) >= 0.2) m = std::max(m, std::abs(r[i]));
        }
        hs.push_back(g.spacing(0));
        errs.push_back(m);
    }
    const double order = log_slope(hs, errs);
    o.detail << "residuals " << errs[0] << " " << errs[1] << " " << errs[2] << ", order " << order;
    o.require(errs[1] < errs[0] && errs[2] < errs[1], "decreasing");
    o.require(order >= 0.5, "order >= 0.5");
}

void structure_conditions(Outcome& o) {
    const auto grads = sample_gradients(2, 1000, 7);
    const auto scal = sample_scaling(2, 1000, 8);
    const auto smp = sample_smp(2, 1000, 9);
    int passing_violations = 0;
    for (const auto& op : {builtin_operator("infinity"), builtin_operator("normalized_p", {{"p", 4.0}})}) {
        const auto e = check_ellipticity(op, grads);
        const auto s = check_scaling(op, scal);
        const auto h = check_smp_hypotheses(op, smp);
        passing_violations += e.violations + s.violations + h.monotonicity.violations + h.scaling.violations +
                              h.positivity.violations;
        o.require(e.passed() && s.passed() && h.passed(), op.name + " passes");
    }
    const auto broken = builtin_operator("broken_negative");
    const auto be = check_ellipticity(broken, grads);
    const auto bh = check_smp_hypotheses(broken, smp);
    o.detail << "violations on passing instances " << passing_violations << ", broken: ellipticity " << be.violations
             << ", (1) " << bh.monotonicity.violations << ", (3) " << bh.positivity.violations;
    o.require(passing_violations == 0, "zero violations");
    o.require(!be.passed() && !bh.monotonicity.passed() && !bh.positivity.passed(), "broken instance fails");
}

void convolution(Outcome& o) {
    const auto t0 = Clock::now();
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    const auto w = GridFunction::sample(g, expr("sqrt(x^2 + y^2) - abs(t) + 0.5*sin(3*x)*y"));
    std::vector<GridFunction> sups;
    bool above = true, monotone = true, finite = true;
    std::vector<double> gaps;
    for (double eps : {0.125, 0.25, 0.5}) {
        sups.push_back(sup_convolution(h1, w, eps));
        const auto& s = sups.back();
        for (std::size_t i = 0; i < g.size(); ++i) above = above && s[i] >= w[i];
        if (sups.size() > 1)
            for (std::size_t i = 0; i < g.size(); ++i) monotone = monotone && s[i] >= sups[sups.size() - 2][i];
        finite = finite && std::isfinite(semiconvexity_constant(s));
        gaps.push_back(max_abs_diff(s, w));
    }
    const double t = seconds_since(t0);
    o.detail << "gaps (eps 0.125, 0.25, 0.5) " << gaps[0] << " " << gaps[1] << " " << gaps[2] << ", " << t << " s";
    o.require(above, "w^eps >= w");
    o.require(monotone, "eps-monotone");
    o.require(finite, "semiconvexity constant finite");
    o.require(gaps[0] < gaps[1] && gaps[1] < gaps[2], "gap shrinks with eps");
    o.require(t < 60.0, "runtime < 60 s");
}

void chain_rule(Outcome& o) {
    const auto h1 = heisenberg(1);
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> c(-0.9, 0.9);
    std::vector<Point> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(Eigen::Vector3d(c(rng), c(rng), c(rng)));
    const auto w = expr("x^2 + sin(y)*t + x*y");
    int violations = 0, evaluated = 0;
    double worst = INFINITY;
    for (const char* name : {"sub_laplacian", "normalized_p", "infinity"}) {
        for (const auto& h : {quadratic_map(0.8, -1.0), exponential_map(-1.0)}) {
            const auto r = chain_rule_inequality_check(h1, builtin_operator(name), w, h, pts);
            violations += r.violations;
            evaluated += r.points;
            worst = std::min(worst, r.worst_slack);
        }
    }
    o.detail << "evaluated " << evaluated << " of 6000, violations " << violations << ", worst slack " << worst;
    o.require(violations == 0 && worst >= -1e-9, "slack >= -1e-9");
    o.require(evaluated > 0, "points evaluated");
}

GridFunction random_start(const GridGeometry& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 2.5);
    GridFunction w(g);
    for (auto& v : w.values()) v = u(rng);
    return w;
}

void comparison(Outcome& o) {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    const double tol = 1e-8;
    const auto f = expr("sin(2*x)*y + 0.5*t");
    const auto gg = expr("sin(2*x)*y + 0.5*t + 0.4*exp(-3*(x - 1)^2)");
    const auto fc = expr("sin(2*x)*y + 0.5*t + 0.5");
    double slowest = 0.0;
    for (const auto& op : {builtin_operator("sub_laplacian"), builtin_operator("normalized_p", {{"p", 4.0}}),
                           builtin_operator("infinity")}) {
        SolveOptions opt;
        opt.tolerance = tol;
        opt.max_iter = 300;
        if (op.name == "infinity") opt.scheme = Scheme::Midrange;
        const auto uf = solve(make_problem(h1, op, g, f), random_start(g, 1), opt);
        const auto ug = solve(make_problem(h1, op, g, gg), random_start(g, 2), opt);
        const auto uc = solve(make_problem(h1, op, g, fc), random_start(g, 3), opt);
        const auto u2 = solve(make_problem(h1, op, g, f), random_start(g, 4), opt);
        double excess = -INFINITY, shift = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            excess = std::max(excess, uf.u[i] - ug.u[i]);
            shift = std::max(shift, std::abs(uc.u[i] - uf.u[i] - 0.5));
        }
        const double unique = max_abs_diff(uf.u, u2.u);
        for (const auto* r : {&uf.report, &ug.report, &uc.report, &u2.report}) {
            slowest = std::max(slowest, r->wall_time);
            o.require(r->converged, op.name + " converged");
        }
        o.detail << op.name << ": (a) " << excess << " (b) " << shift << " (c) " << unique << "; ";
        o.require(excess <= 10 * tol, op.name + " (a)");
        o.require(shift <= 2 * tol, op.name + " (b)");
        o.require(unique <= 1e-6, op.name + " (c)");
    }
    o.detail << "slowest solve " << slowest << " s";
    o.require(slowest < 180.0, "runtime < 3 min per solve");
}

void p_limit(Outcome& o) {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    SolveOptions opt;
    opt.tolerance = 1e-8;
    opt.max_iter = 300;
    const auto study = p_limit_study(h1, g, expr(boundary_preset("aronsson", {})), {2, 4, 8, 16, 32}, opt);
    bool conv = true;
    for (const auto& r : study.rows) {
        conv = conv && r.converged;
        if (!std::isinf(r.p)) o.detail << "p=" << r.p << ": " << r.error_vs_reference << "; ";
    }
    o.require(conv, "all solves converged");
    o.require(study.rows[4].error_vs_reference < study.rows[0].error_vs_reference, "p = 32 closer than p = 2");
}

void smp(Outcome& o) {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    const double tol = 1e-8;
    const auto f = expr(boundary_preset("bumps", {}));
    const auto prob = make_problem(h1, builtin_operator("sub_laplacian"), g, f);
    const auto res = solve(prob, boundary_values(prob), tol, 200);
    const auto w = smp_witness(res.u, 10 * tol);
    o.detail << "boundary max " << w.boundary_max << ", interior max " << w.interior_max << ", gap " << w.gap;
    o.require(res.report.converged, "converged");
    o.require(!w.constant_case && !w.interior_attains && w.gap > 10 * tol, "max only on the boundary band");
}

void translation_lipschitz(Outcome& o) {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    const auto u = GridFunction::sample(g, expr("sin(x)*cos(y) + 0.3*t"));
    const auto v = GridFunction::sample(g, expr("sin(x)*cos(y) + 0.3*t + 0.1*x*y"));
    const double delta = 0.2;
    const auto mask = metric_interior_mask(h1, g, delta);
    const auto hs = sample_ball(h1, 0.95 * delta, 201, 13);
    const double lip = grid_lipschitz_constant(h1, u);
    const double interp = interpolation_error(u);
    int violations = 0;
    double worst = INFINITY;
    for (int k = 0; k < 100; ++k) {
        const auto a = translation_max(h1, u, v, hs[2 * k], hs[200], delta, mask);
        const auto b = translation_max(h1, u, v, hs[2 * k + 1], hs[200], delta, mask);
        const double slack = metric(h1, hs[2 * k], hs[2 * k + 1]) * lip + 4 * interp - std::abs(a.M - b.M);
        worst = std::min(worst, slack);
        if (slack < 0.0) ++violations;
    }
    o.detail << "100 pairs, violations " << violations << ", min slack " << worst;
    o.require(violations == 0, "bound holds on every pair");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
        {"group algebra", group_algebra},
        {"homogeneity", homogeneity},
        {"hormander certification", hormander},
        {"derivative cross-validation", derivative_cross_validation},
        {"exact-kernel residuals", exact_kernels},
        {"aronsson lift", aronsson_lift},
        {"structure conditions", structure_conditions},
        {"convolution suite", convolution},
        {"chain-rule estimate", chain_rule},
        {"comparison witness", comparison},
        {"p-limit study", p_limit},
        {"smp witness", smp},
        {"translation-map lipschitz", translation_lipschitz},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            criteria[k].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %-28s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                    o.detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
