#include "oracles.hpp"

#include <carnot/group.hpp>

#include <doctest.h>

#include <random>

using namespace carnot;

namespace {

Point pt(std::initializer_list<double> v) {
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p[i++] = x;
    return p;
}

Point random_point(std::mt19937_64& rng, int n, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Point p(n);
    for (int k = 0; k < n; ++k) p[k] = u(rng);
    return p;
}

double rel_err(const Point& a, const Point& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("builtin specs validate") {
    for (const auto& g : {abelian(2), heisenberg(1), heisenberg(2), heisenberg(3), engel(), free_step2(2), free_step2(3)}) {
        CAPTURE(g.name());
        CHECK(validate_spec(g).empty());
    }
    CHECK(heisenberg(1).homogeneous_dimension() == 4);
    CHECK(engel().homogeneous_dimension() == 7);
    CHECK(heisenberg(2).dim() == 5);
}

TEST_CASE("broken specs report each invariant") {
    SUBCASE("symmetric bracket") {
        GroupSpec g("bad", {2, 1}, {{2, 0, 1, 1.0}, {2, 1, 0, 1.0}});
        auto v = validate_spec(g);
        REQUIRE_FALSE(v.empty());
        CHECK(v.front().invariant == "antisymmetry");
        CHECK(v.front().indices == std::vector<int>{3, 1, 2});
    }
    SUBCASE("grading") {
        GroupSpec g("bad", {2, 1}, {{0, 0, 1, 1.0}, {0, 1, 0, -1.0}});
        bool found = false;
        for (const auto& v : validate_spec(g)) found = found || v.invariant == "grading";
        CHECK(found);
    }
    SUBCASE("generation") {
        GroupSpec g("bad", {2, 1}, {});
        auto v = validate_spec(g);
        REQUIRE(v.size() == 1);
        CHECK(v.front().invariant == "generation");
    }
    SUBCASE("jacobi") {
        // so(3)-like cyclic brackets inside one layer also break grading; Jacobi is checked independently.
        GroupSpec g("bad", {2, 1, 1},
                    {{2, 0, 1, 1.0}, {2, 1, 0, -1.0}, {3, 0, 2, 1.0}, {3, 2, 0, -1.0}, {3, 1, 2, 1.0}, {3, 2, 1, -1.0}});
        // [e1,[e2,e3]] + [e2,[e3,e1]] + [e3,[e1,e2]] = 0 - [e2,e4] + [e3,e3] = 0, so still a valid algebra.
        CHECK(validate_spec(g).empty());
        GroupSpec h("bad", {3, 1}, {{3, 0, 1, 1.0}, {3, 1, 0, -1.0}, {1, 1, 2, 1.0}, {1, 2, 1, -1.0}});
        bool jacobi = false;
        for (const auto& v : validate_spec(h)) jacobi = jacobi || v.invariant == "jacobi";
        CHECK(jacobi);
    }
    CHECK_THROWS_AS(GroupSpec("bad", {2, 1}, {{3, 0, 1, 1.0}}), InvalidParameter);
    CHECK_THROWS_AS(GroupSpec("bad", {0}, {}), InvalidParameter);
}

TEST_CASE("H1 products against the matrix oracle") {
    const auto g = heisenberg(1);
    const Point z = multiply(g, pt({1, 0, 0}), pt({0, 1, 0}));
    CHECK(z[0] == 1.0);
    CHECK(z[1] == 1.0);
    CHECK(z[2] == 0.5);
    std::mt19937_64 rng(7);
    for (int s = 0; s < 200; ++s) {
        const Point x = random_point(rng, 3);
        const Point y = random_point(rng, 3);
        const Eigen::Vector3d ref = oracle::h1_coords(oracle::h1_matrix(x) * oracle::h1_matrix(y));
        CHECK(rel_err(multiply(g, x, y), ref) <= 1e-14);
    }
}

TEST_CASE("products against generic nilpotent matrix oracles") {
    std::mt19937_64 rng(11);
    const std::vector<std::pair<GroupSpec, oracle::MatrixRep>> cases = {
        {heisenberg(2), oracle::heisenberg_rep(2)},
        {heisenberg(3), oracle::heisenberg_rep(3)},
        {engel(), oracle::engel_rep()},
        {free_step2(2), oracle::heisenberg_rep(1)},
    };
    for (const auto& [g, rep] : cases) {
        CAPTURE(g.name());
        for (int s = 0; s < 100; ++s) {
            const Point x = random_point(rng, g.dim());
            const Point y = random_point(rng, g.dim());
            CHECK(rel_err(multiply(g, x, y), oracle::product(rep, x, y)) <= 1e-12);
        }
    }
}

TEST_CASE("group axioms on random triples") {
    std::mt19937_64 rng(3);
    for (const auto& g : {heisenberg(1), heisenberg(2), engel(), free_step2(2), free_step2(3), abelian(3)}) {
        CAPTURE(g.name());
        double worst = 0.0;
        for (int s = 0; s < 1000; ++s) {
            const Point x = random_point(rng, g.dim());
            const Point y = random_point(rng, g.dim());
            const Point z = random_point(rng, g.dim());
            worst = std::max(worst, rel_err(multiply(g, multiply(g, x, y), z), multiply(g, x, multiply(g, y, z))));
            worst = std::max(worst, rel_err(multiply(g, x, identity(g)), x));
            worst = std::max(worst, multiply(g, x, inverse(x)).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-12);
    }
    CHECK_THROWS_AS(multiply(GroupSpec("step4", {2, 1, 1, 1},
                                       {{2, 0, 1, 1.0}, {2, 1, 0, -1.0}, {3, 0, 2, 1.0}, {3, 2, 0, -1.0},
                                        {4, 0, 3, 1.0}, {4, 3, 0, -1.0}}),
                             Point::Zero(5), Point::Zero(5)),
                    UnsupportedStep);
    CHECK_THROWS_AS(multiply(heisenberg(1), Point::Zero(2), Point::Zero(3)), DimensionMismatch);
    const auto a = abelian(1);
    CHECK(multiply(a, pt({2.5}), pt({-1.0}))[0] == 1.5);
}

TEST_CASE("inverse") {
    CHECK(inverse(pt({1, 2, 3})) == pt({-1, -2, -3}));
    CHECK(inverse(pt({0, 0, 0})) == pt({0, 0, 0}));
    CHECK(multiply(heisenberg(1), pt({1, 0, 0}), inverse(pt({1, 0, 0}))) == pt({0, 0, 0}));
}

TEST_CASE("dilations") {
    const auto g = heisenberg(1);
    CHECK(dilate(g, 2.0, pt({1, 1, 1})) == pt({2, 2, 4}));
    CHECK(dilate(g, 1.0, pt({0.3, -2, 5})) == pt({0.3, -2, 5}));
    CHECK_THROWS_AS(dilate(g, 0.0, pt({1, 1, 1})), NonPositiveLambda);
    CHECK_THROWS_AS(dilate(g, -1.0, pt({1, 1, 1})), NonPositiveLambda);
    std::mt19937_64 rng(5);
    for (const auto& grp : {heisenberg(1), engel()}) {
        for (int s = 0; s < 200; ++s) {
            const Point x = random_point(rng, grp.dim());
            const Point y = random_point(rng, grp.dim());
            const double lam = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
            CHECK(rel_err(dilate(grp, lam, multiply(grp, x, y)),
                          multiply(grp, dilate(grp, lam, x), dilate(grp, lam, y))) <= 1e-12);
        }
    }
}

TEST_CASE("homogeneous norm and metric") {
    const auto g = heisenberg(1);
    CHECK(hom_norm(g, pt({1, 0, 0})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hom_norm(g, pt({0, 0, 4})) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(hom_norm(g, dilate(g, 3.0, pt({0, 0, 4}))) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(hom_norm(g, Point::Zero(3)) == 0.0);
    CHECK(metric(g, pt({1, 0, 0}), Point::Zero(3)) == doctest::Approx(1.0));
    // Engel: r! = 6, ||(0,0,0,2)|| = (2^2)^(6/4 / 6)... = 2^(1/3).
    CHECK(hom_norm(engel(), pt({0, 0, 0, 2})) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));
    std::mt19937_64 rng(9);
    for (const auto& grp : {heisenberg(1), heisenberg(2), engel(), free_step2(3)}) {
        double worst = 0.0;
        for (int s = 0; s < 1000; ++s) {
            const Point x = random_point(rng, grp.dim());
            const Point y = random_point(rng, grp.dim());
            const Point z = random_point(rng, grp.dim());
            const double lam = std::uniform_real_distribution<double>(0.1, 4.0)(rng);
            const double n = hom_norm(grp, x);
            worst = std::max(worst, std::abs(hom_norm(grp, dilate(grp, lam, x)) - lam * n) / (lam * n));
            worst = std::max(worst, std::abs(hom_norm(grp, inverse(x)) - n) / n);
            const double d = metric(grp, x, y);
            worst = std::max(worst, std::abs(metric(grp, multiply(grp, z, x), multiply(grp, z, y)) - d) / d);
            worst = std::max(worst, std::abs(metric(grp, x, x)));
        }
        CAPTURE(grp.name());
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("measure scaling of dilated boxes") {
    CHECK(dilated_box_volume(heisenberg(1), 2.0, 1.0) == 16.0);
    CHECK(dilated_box_volume(engel(), 2.0, 3.0) == 3.0 * 128.0);
    CHECK(dilated_box_volume(abelian(3), 0.5, 8.0) == 1.0);
}

TEST_CASE("conjugation") {
    const auto g = heisenberg(1);
    const Point c = conjugate(g, pt({1, 0, 0}), pt({0, 1, 0}));
    const Eigen::Vector3d ref = oracle::h1_coords(oracle::h1_matrix(Eigen::Vector3d(-1, 0, 0)) *
                                                  oracle::h1_matrix(Eigen::Vector3d(0, 1, 0)) *
                                                  oracle::h1_matrix(Eigen::Vector3d(1, 0, 0)));
    CHECK(c == Point(ref));
    CHECK(c == pt({0, 1, -1}));
    const auto a = abelian(2);
    CHECK(conjugate(a, pt({3, 4}), pt({1, 2})) == pt({1, 2}));
    std::mt19937_64 rng(13);
    for (const auto& grp : {heisenberg(1), engel()}) {
        for (int s = 0; s < 200; ++s) {
            const Point h = random_point(rng, grp.dim());
            const Point x = random_point(rng, grp.dim());
            CHECK(rel_err(conjugate(grp, inverse(h), conjugate(grp, h, x)), x) <= 1e-12);
        }
    }
}

TEST_CASE("conjugation constant estimate") {
    const auto ab = estimate_conjugation_constant(abelian(2), 1.0, 500);
    CHECK(ab.conjugation == doctest::Approx(1.0).epsilon(1e-12));
    const auto g = heisenberg(1);
    const auto small = estimate_conjugation_constant(g, 1.0, 1000, 1);
    const auto large = estimate_conjugation_constant(g, 1.0, 10000, 2);
    CHECK(std::isfinite(small.conjugation));
    CHECK(std::abs(small.conjugation - large.conjugation) <= 0.1 * large.conjugation);
    CHECK(std::isfinite(large.pseudo_triangle));
    CHECK(large.pseudo_triangle >= 0.5);
    CHECK_THROWS_AS(estimate_conjugation_constant(g, 1.0, 0), InvalidParameter);
}

TEST_CASE("layer projections") {
    const auto g = engel();
    const Point x = pt({1, 2, 3, 4});
    CHECK(project_layer(g, x, 1) == Eigen::Vector2d(1, 2));
    CHECK(project_layer(g, x, 3)[0] == 4.0);
    std::vector<Eigen::VectorXd> layers;
    for (int j = 1; j <= 3; ++j) layers.push_back(project_layer(g, x, j));
    CHECK(from_layers(g, layers) == x);
}

TEST_CASE("builtin lookup") {
    CHECK(builtin_group("heisenberg").dim() == 3);
    CHECK(builtin_group("heisenberg2").dim() == 5);
    CHECK(builtin_group("abelian4").dim() == 4);
    CHECK(builtin_group("free_step2_3").dim() == 6);
    CHECK_THROWS_AS(builtin_group("sl2"), UnknownName);
}
