#include <carnot/errors.hpp>
#include <carnot/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace carnot;

/// Exit codes: 0 all asserted checks passed, 1 some check failed, 2 configuration error, 3 runtime error.
enum Exit { kPassed = 0, kFailed = 1, kConfig = 2, kRuntime = 3 };

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const UnknownSymbol*>(&e)) return "UnknownSymbol";
    if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
    if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const UnsupportedStep*>(&e)) return "UnsupportedStep";
    if (dynamic_cast<const NonPositiveLambda*>(&e)) return "NonPositiveLambda";
    if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const DomainExit*>(&e)) return "DomainExit";
    if (dynamic_cast<const UnknownName*>(&e)) return "UnknownName";
    if (dynamic_cast<const InvalidParameter*>(&e)) return "InvalidParameter";
    if (dynamic_cast<const SingularGradient*>(&e)) return "SingularGradient";
    if (dynamic_cast<const NotSemiConvex*>(&e)) return "NotSemiConvex";
    if (dynamic_cast<const EmptyDomain*>(&e)) return "EmptyDomain";
    if (dynamic_cast<const Diverged*>(&e)) return "Diverged";
    if (dynamic_cast<const EvaluationError*>(&e)) return "EvaluationError";
    return "Error";
}

int fail(const std::exception& e, int code, const std::string& out_dir, bool quiet) {
    const auto type = error_type(e);
    if (!out_dir.empty()) {
        try {
            write_report(out_dir, error_report(type, e.what()));
        } catch (const std::exception& w) {
            std::cerr << "carnot_lab: could not write the error report: " << w.what() << '\n';
        }
    }
    if (!quiet || code == kConfig) std::cerr << "carnot_lab: " << type << ": " << e.what() << '\n';
    return code;
}

ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
    auto cfg = load_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experiments for fully nonlinear sub-elliptic equations on Carnot groups"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet,-q", quiet, "Suppress progress and summary output")->configurable(false);

    std::string config, out_dir;
    std::optional<std::uint64_t> seed;
    auto* validate = app.add_subcommand("validate", "Parse and resolve a config without running it");
    validate->add_option("--config", config, "Experiment config (JSON)")->required();
    auto* run = app.add_subcommand("run", "Run the experiment and write report.json plus artifacts");
    run->add_option("--config", config, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Override the config seed");
    auto* desc = app.add_subcommand("describe", "Print the resolved config as JSON");
    desc->add_option("--config", config, "Experiment config (JSON)")->required();
    desc->add_option("--seed", seed, "Override the config seed");
    for (auto* sub : {validate, run, desc}) sub->add_flag("--quiet,-q", quiet, "Suppress progress and summary output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPassed : kConfig;
    }

    ExperimentConfig cfg;
    try {
        cfg = load(config, seed);
    } catch (const Error& e) {
        return fail(e, kConfig, run->parsed() ? out_dir : "", quiet);
    }

    if (validate->parsed()) {
        if (!quiet) std::cout << "ok: " << cfg.name << " (" << cfg.experiment << ")\n";
        return kPassed;
    }
    if (desc->parsed()) {
        std::cout << describe(cfg).dump(2) << '\n';
        return kPassed;
    }
    try {
        if (!quiet) std::cerr << "running " << cfg.experiment << " '" << cfg.name << "'\n";
        const auto outcome = run_experiment(cfg, out_dir);
        if (!quiet) {
            for (const auto& c : outcome.report.at("checks"))
                std::cout << (c.at("passed").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << '\n';
            std::cout << (outcome.passed ? "passed" : "failed") << ": " << out_dir << "/report.json\n";
        }
        return outcome.passed ? kPassed : kFailed;
    } catch (const ConfigError& e) {
        return fail(e, kConfig, out_dir, quiet);
    } catch (const std::exception& e) {
        return fail(e, kRuntime, out_dir, quiet);
    }
}
