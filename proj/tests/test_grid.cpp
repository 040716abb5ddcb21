#include <carnot/grid.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

using namespace carnot;

namespace {

GridFunction random_grid(const GridGeometry& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    GridFunction w(g);
    for (auto& v : w.values()) v = n(rng) * 1e3;
    return w;
}

}  // namespace

TEST_CASE("geometry indexing") {
    const GridGeometry g(Box{Eigen::Vector3d(-1, 0, 2), Eigen::Vector3d(1, 3, 2.5)}, {3, 4, 5});
    CHECK(g.size() == 60);
    CHECK(g.spacing(0) == 1.0);
    CHECK(g.spacing(1) == 1.0);
    CHECK(g.spacing(2) == 0.125);
    CHECK(g.stride(0) == 20);
    CHECK(g.stride(2) == 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g.flat_index(g.multi_index(i)) == i);
        const auto idx = g.multi_index(i);
        bool edge = false;
        for (int a = 0; a < 3; ++a) edge = edge || idx[static_cast<std::size_t>(a)] == 0 ||
                                           idx[static_cast<std::size_t>(a)] == g.shape()[static_cast<std::size_t>(a)] - 1;
        CHECK(g.is_boundary(i) == edge);
    }
    CHECK(g.node(59) == Eigen::Vector3d(1, 3, 2.5));
    CHECK_THROWS_AS(GridGeometry(Box::cube(2, 1.0), {2, 5}), InvalidParameter);
}

TEST_CASE("multilinear interpolation is exact on multilinear functions") {
    const auto g = GridGeometry::cube(3, 1.0, 7);
    GridFunction w(g);
    auto f = [](const Point& x) { return 1 + 2 * x[0] - x[1] * x[2] + 0.5 * x[0] * x[1] * x[2]; };
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = f(g.node(i));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 200; ++k) {
        const Point x = Eigen::Vector3d(u(rng), u(rng), u(rng));
        CHECK(w.interpolate(x) == doctest::Approx(f(x)).epsilon(1e-13));
    }
    CHECK(w.interpolate(Eigen::Vector3d(1, 1, 1)) == doctest::Approx(f(Eigen::Vector3d(1, 1, 1))));
    CHECK_THROWS_AS(w.interpolate(Eigen::Vector3d(1.01, 0, 0)), DomainExit);
}

TEST_CASE("text and binary round trips are bit exact") {
    const GridGeometry g(Box{Eigen::Vector3d(-1, -0.5, -2), Eigen::Vector3d(1, 0.5, 2)}, {5, 3, 4});
    const auto w = random_grid(g, 42);
    std::stringstream text;
    write_text(text, w);
    const auto t = read_text(text);
    CHECK(t.geometry() == g);
    CHECK(t.values() == w.values());
    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    write_binary(bin, w);
    const auto b = read_binary(bin);
    CHECK(b.geometry() == g);
    CHECK(b.values() == w.values());

    const auto dir = std::filesystem::temp_directory_path();
    save((dir / "carnot_test.grid").string(), w, true);
    save((dir / "carnot_test_text.grid").string(), w, false);
    CHECK(load((dir / "carnot_test.grid").string()).values() == w.values());
    CHECK(load((dir / "carnot_test_text.grid").string()).values() == w.values());
    std::filesystem::remove(dir / "carnot_test.grid");
    std::filesystem::remove(dir / "carnot_test_text.grid");
}

TEST_CASE("malformed input is rejected") {
    std::stringstream bad("carnot-grid 2\n");
    CHECK_THROWS(read_text(bad));
    std::stringstream junk("XXXX");
    CHECK_THROWS(read_binary(junk));
    const auto g = GridGeometry::cube(2, 1.0, 3);
    CHECK_THROWS_AS(GridFunction(g, std::vector<double>(8, 0.0)), DimensionMismatch);
    std::stringstream nan_text;
    write_text(nan_text, GridFunction(g, 1.0));
    std::string body = nan_text.str();
    body.replace(body.rfind('1'), 1, "nan");
    std::stringstream nan_in(body);
    CHECK_THROWS_AS(read_text(nan_in), ConfigError);
    CHECK_THROWS_AS(max_abs_diff(GridFunction(g), GridFunction(GridGeometry::cube(2, 1.0, 4))), DimensionMismatch);
}
