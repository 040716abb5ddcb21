#include <carnot/errors.hpp>
#include <carnot/experiment.hpp>

#include <doctest.h>

using namespace carnot;
using nlohmann::json;

namespace {

json base_config() {
    return {{"name", "t"},
            {"experiment", "solve"},
            {"group", "heisenberg"},
            {"operator", "sub_laplacian"},
            {"grid", {{"half_width", 1.0}, {"nodes", 7}}},
            {"boundary", "x + 2*y"},
            {"reference", "x + 2*y"}};
}

}  // namespace

TEST_CASE("config resolution and rejection") {
    const auto cfg = parse_config(base_config(), ".");
    CHECK(cfg.group.dim() == 3);
    CHECK(cfg.grid.shape() == std::vector<int>{7, 7, 7});
    CHECK(cfg.solve.scheme == Scheme::Central);
    CHECK(describe(cfg).at("boundary") == "x + 2*y");

    auto inf = base_config();
    inf["operator"] = "infinity";
    CHECK(parse_config(inf, ".").solve.scheme == Scheme::Midrange);

    const std::vector<std::pair<const char*, json>> bad = {
        {"operator", "laplace_beltrami"},
        {"experiment", "bogus"},
        {"boundary", "x + foo"},
        {"group", "tetrahedral"},
        {"solver", {{"tolerance", 0.0}}},
        {"solver", {{"scheme", "upwind"}}},
        {"grid", {{"nodes", 7}, {"colour", 1}}},
        {"spurious", 1},
    };
    for (const auto& [key, value] : bad) {
        INFO(key << " = " << value.dump());
        auto j = base_config();
        j[key] = value;
        CHECK_THROWS_AS(parse_config(j, "."), ConfigError);
    }
    auto sub_mid = base_config();
    sub_mid["solver"] = {{"scheme", "midrange"}};
    CHECK_THROWS_AS(parse_config(sub_mid, "."), ConfigError);
}

TEST_CASE("inline groups round trip through json") {
    const json g = {{"name", "h1"}, {"layer_dims", {2, 1}}, {"constants", {{3, 1, 2, 1.0}, {3, 2, 1, -1.0}}}};
    const auto spec = group_from_json(g);
    CHECK(spec.dim() == 3);
    const auto back = group_from_json(group_to_json(spec));
    CHECK(group_to_json(back) == group_to_json(spec));
    CHECK_THROWS_AS(group_from_json({{"layer_dims", {2, 1}}, {"constants", {{3, 1}}}}), ConfigError);
}

TEST_CASE("solve experiment on linear data is exact and deterministic") {
    const auto cfg = parse_config(base_config(), ".");
    const auto a = run_experiment(cfg, "");
    const auto b = run_experiment(cfg, "");
    CHECK(a.passed);
    CHECK(a.report.at("schema_version") == 1);
    CHECK(a.report.at("results").at("error_vs_reference").get<double>() <= 10 * cfg.solve.tolerance);
    auto ja = a.report, jb = b.report;
    ja.erase("metadata");
    jb.erase("metadata");
    CHECK(ja.dump() == jb.dump());
    CHECK(a.report.at("metadata").contains("generated_at"));
}

TEST_CASE("error report shape") {
    const auto r = error_report("ConfigError", "boom");
    CHECK(r.at("schema_version") == kReportSchemaVersion);
    CHECK(r.at("passed") == false);
    CHECK(r.at("error").at("type") == "ConfigError");
}
