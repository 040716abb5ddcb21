#include "fields.hpp"

#include <carnot/semiconvex.hpp>
#include <carnot/solver.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace carnot;
using testfields::make_field;

namespace {

ScalarField field(std::function<double(const Point&)> f) {
    ScalarField s;
    s.value = std::move(f);
    return s;
}

GridFunction random_initial(const GridGeometry& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridFunction w(g);
    for (auto& v : w.values()) v = u(rng);
    return w;
}

GridFunction sample(const GridGeometry& g, const ScalarField& f) { return GridFunction::sample(g, f); }

double max_interior_gap(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

const char* kOps[] = {"sub_laplacian", "normalized_p", "infinity"};

}  // namespace

TEST_CASE("exact kernels have vanishing residual") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 33);
    const auto inf = builtin_operator("infinity");
    for (const auto& f : {field([](const Point& x) { return 0.7 * x[0] - 1.3 * x[1]; }),
                          field([](const Point& x) { return x[2]; })}) {
        const auto prob = make_problem(h1, inf, g, f);
        const auto res = residual(prob, sample(g, f));
        CHECK(interior_residual_norm(prob, res) <= 1e-10);
        for (std::size_t i = 0; i < res.size(); ++i)
            if (g.is_boundary(i)) CHECK(res[i] == 0.0);
    }
}

TEST_CASE("residual sign convention and boundary rows") {
    const auto ab = abelian(2);
    const auto g = GridGeometry::cube(2, 1.0, 9);
    const auto f = field([](const Point& x) { return x[0] * x[0]; });
    const auto prob = make_problem(ab, builtin_operator("sub_laplacian"), g, f);
    GridFunction u = sample(g, f);
    const auto r = residual(prob, u);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!g.is_boundary(i)) CHECK(r[i] == doctest::Approx(-2.0));
    u[0] += 0.25;
    CHECK(residual(prob, u)[0] == doctest::Approx(0.25));
    CHECK_THROWS_AS(residual(prob, GridFunction(GridGeometry::cube(2, 1.0, 5))), DimensionMismatch);
}

TEST_CASE("stencil consistency is second order") {
    const auto h1 = heisenberg(1);
    const auto u = make_field("u", [](const auto* x) { return sin(x[0]) * cos(x[1]) + x[2] * x[2] * x[0] + x[1] * x[2]; });
    const Point probe = Eigen::Vector3d(0.5, 0.25, -0.5);
    for (const char* name : kOps) {
        const auto op = builtin_operator(name);
        const double exact = apply(op, horizontal_jet(frame_at(h1, probe), u.jet(probe)), 0.0);
        std::vector<double> errs;
        for (int nodes : {9, 17, 33, 65}) {
            const auto g = GridGeometry::cube(3, 1.0, nodes);
            const auto prob = make_problem(h1, op, g, u, 0.0);
            const auto r = residual(prob, sample(g, u));
            std::size_t idx = 0;
            double best = 1e9;
            for (std::size_t i = 0; i < g.size(); ++i)
                if ((g.node(i) - probe).norm() < best) {
                    best = (g.node(i) - probe).norm();
                    idx = i;
                }
            REQUIRE(best < 1e-12);
            errs.push_back(std::abs(r[idx] - exact));
        }
        const double order = std::log2(errs[2] / errs[3]);
        INFO(name << " errors " << errs[0] << " " << errs[1] << " " << errs[2] << " " << errs[3]);
        CHECK(order >= 1.8);
    }
}

TEST_CASE("constants and linear data are reproduced") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 13);
    for (const char* name : kOps) {
        const auto op = builtin_operator(name);
        const auto c = make_problem(h1, op, g, field([](const Point&) { return 0.75; }));
        INFO(std::string(name));
        const auto sc = solve(c, random_initial(g, 3), 1e-10, 200);
        CHECK(sc.report.converged);
        CHECK(max_abs_diff(sc.u, GridFunction(g, 0.75)) <= 1e-9);
        const auto lin = field([](const Point& x) { return x[0] - 0.5 * x[1]; });
        const auto l = make_problem(h1, op, g, lin);
        const auto sl = solve(l, GridFunction(g), 1e-10, 200);
        CHECK(sl.report.converged);
        CHECK(sl.report.final_residual <= 1e-10);
        CHECK(max_abs_diff(sl.u, sample(g, lin)) <= 1e-9);
        CHECK(sl.report.metadata.at("monotonicity") == "no discrete monotonicity claim");
    }
}

TEST_CASE("comparison, additive invariance and uniqueness at small scale") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 13);
    const auto f = field([](const Point& x) { return std::sin(2 * x[0]) * x[1] + 0.5 * x[2]; });
    const auto gg = field([](const Point& x) {
        return std::sin(2 * x[0]) * x[1] + 0.5 * x[2] + 0.4 * std::exp(-3 * (x[0] - 1) * (x[0] - 1));
    });
    const auto fc = field([](const Point& x) { return std::sin(2 * x[0]) * x[1] + 0.5 * x[2] + 0.5; });
    for (const char* name : kOps) {
        INFO(std::string(name));
        const auto op = builtin_operator(name);
        SolveOptions o;
        o.tolerance = 1e-9;
        o.max_iter = 300;
        if (op.name == "infinity") o.scheme = Scheme::Midrange;
        const auto uf = solve(make_problem(h1, op, g, f), random_initial(g, 1), o);
        const auto ug = solve(make_problem(h1, op, g, gg), random_initial(g, 2), o);
        const auto uc = solve(make_problem(h1, op, g, fc), random_initial(g, 3), o);
        const auto u2 = solve(make_problem(h1, op, g, f), random_initial(g, 4), o);
        REQUIRE(uf.report.converged);
        REQUIRE(ug.report.converged);
        REQUIRE(uc.report.converged);
        REQUIRE(u2.report.converged);
        double excess = -INFINITY, shift = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            excess = std::max(excess, uf.u[i] - ug.u[i]);
            shift = std::max(shift, std::abs(uc.u[i] - uf.u[i] - 0.5));
        }
        CHECK(excess <= 10 * o.tolerance);
        CHECK(shift <= 2 * o.tolerance);
        CHECK(max_interior_gap(uf.u, u2.u) <= 1e-6);
    }
}

TEST_CASE("midrange scheme: exactness, monotonicity and its reach") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 9);
    SolveOptions o;
    o.scheme = Scheme::Midrange;
    const auto lin = field([](const Point& x) { return 0.3 * x[0] - 0.8 * x[1] + 0.1; });
    const auto prob = make_problem(h1, builtin_operator("infinity"), g, lin);
    const auto r = scheme_residual(prob, sample(g, lin), o);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(r[i]) <= 1e-10);

    // Raising any single value never lowers the residual at that node and never raises it elsewhere.
    const auto base = random_initial(g, 9);
    const auto r0 = scheme_residual(prob, base, o);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t j = rng() % g.size();
        GridFunction up = base;
        up[j] += 0.3;
        const auto r1 = scheme_residual(prob, up, o);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.is_boundary(i)) continue;
            if (i == j) CHECK(r1[i] >= r0[i] - 1e-12);
            else CHECK(r1[i] <= r0[i] + 1e-12);
        }
    }

    const auto sl = solve(prob, random_initial(g, 2), o);
    CHECK(sl.report.converged);
    CHECK(max_abs_diff(sl.u, sample(g, lin)) <= 1e-8);
    CHECK(sl.report.metadata.at("scheme") == "midrange");
    CHECK_THROWS_AS(solve(make_problem(h1, builtin_operator("sub_laplacian"), g, lin), GridFunction(g), o),
                    InvalidParameter);
}

TEST_CASE("explicit relaxation and divergence guard") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 7);
    const auto f = field([](const Point& x) { return x[0] * x[1] + x[2]; });
    SolveOptions o;
    o.method = SolveMethod::Explicit;
    o.tolerance = 1e-6;
    o.max_iter = 20000;
    const auto prob = make_problem(h1, builtin_operator("sub_laplacian"), g, f);
    const auto ex = solve(prob, GridFunction(g), o);
    CHECK(ex.report.converged);
    CHECK(ex.report.method == "explicit");
    const auto nw = solve(prob, GridFunction(g), 1e-10, 50);
    CHECK(max_abs_diff(ex.u, nw.u) < 1e-4);
    const auto broken = make_problem(h1, builtin_operator("broken_negative"), g, f);
    CHECK_THROWS_AS(solve(broken, random_initial(g, 1), o), Diverged);
    o.tolerance = 0.0;
    CHECK_THROWS_AS(solve(prob, GridFunction(g), o), InvalidParameter);
    SolveOptions few;
    few.max_iter = 1;
    const auto cut = solve(make_problem(h1, builtin_operator("infinity"), g, f), random_initial(g, 2), few);
    CHECK_FALSE(cut.report.converged);
    CHECK(cut.report.stop_reason == "max_iter reached");
}

TEST_CASE("strict subsolution echo") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 17);
    const auto f = field([](const Point& x) { return x[0] + 0.3 * x[1] * x[1]; });
    const auto prob = make_problem(h1, builtin_operator("sub_laplacian", {{"phi_power", 0.0}}), g, f);
    const auto sol = solve(prob, GridFunction(g), 1e-10, 50);
    REQUIRE(sol.report.converged);
    const double lambda = 0.05, theta = 0.5;
    const auto ul = strict_subsolution_perturb(sol.u, lambda);
    auto shifted = prob;
    shifted.boundary = field([&](const Point&) { return 0.0; });
    const auto r = residual(shifted, ul);
    int tested = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) continue;
        const double gx = (sol.u[i + g.stride(0)] - sol.u[i - g.stride(0)]) / (2 * g.spacing(0));
        const double gy = (sol.u[i + g.stride(1)] - sol.u[i - g.stride(1)]) / (2 * g.spacing(1));
        const double gt = (sol.u[i + g.stride(2)] - sol.u[i - g.stride(2)]) / (2 * g.spacing(2));
        const Point x = g.node(i);
        const double x1 = gx - 0.5 * x[1] * gt, x2 = gy + 0.5 * x[0] * gt;
        if (std::hypot(x1, x2) < theta) continue;
        ++tested;
        CHECK(r[i] <= -lambda * theta * theta);
    }
    CHECK(tested > 100);
}

TEST_CASE("p-limit study and SMP witness") {
    const auto h1 = heisenberg(1);
    const auto g = GridGeometry::cube(3, 1.0, 9);
    SolveOptions o;
    o.tolerance = 1e-10;
    const auto lin = field([](const Point& x) { return 0.4 * x[0] + x[1]; });
    const auto study = p_limit_study(h1, g, lin, {2, 4, 8}, o);
    REQUIRE(study.rows.size() == 4);
    for (const auto& row : study.rows) {
        CHECK(row.converged);
        CHECK(row.error_vs_reference <= 1e-9);
    }
    CHECK(std::isinf(study.rows.back().p));
    const auto curved = field([](const Point& x) { return x[0] * x[0] - x[1] * x[1] + 0.3 * x[2]; });
    const auto s2 = p_limit_study(h1, g, curved, {2}, o);
    const auto sub = solve(make_problem(h1, builtin_operator("sub_laplacian"), g, curved), GridFunction(g), o);
    CHECK(max_abs_diff(s2.solutions[0], sub.u) <= 1e-9);

    const auto flat = smp_witness(GridFunction(g, 2.0), 1e-9);
    CHECK(flat.constant_case);
    CHECK(flat.interior_attains);
    const auto lsol = solve(make_problem(h1, builtin_operator("sub_laplacian"), g, lin), GridFunction(g), o);
    const auto w = smp_witness(lsol.u, 1e-8);
    CHECK_FALSE(w.interior_attains);
    CHECK(g.is_boundary(w.argmax_node));
    const auto bumps = field([](const Point& x) {
        return std::exp(-4 * ((x[0] - 1) * (x[0] - 1) + x[1] * x[1])) + std::exp(-4 * ((x[1] + 1) * (x[1] + 1) + x[2] * x[2]));
    });
    const auto bsol = solve(make_problem(h1, builtin_operator("sub_laplacian"), g, bumps), GridFunction(g), o);
    const auto bw = smp_witness(bsol.u, 1e-8);
    CHECK_FALSE(bw.interior_attains);
    CHECK(bw.gap > 1e-8);
}
