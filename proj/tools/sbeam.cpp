#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sbeam/sbeam.hpp"

namespace {

using namespace sbeam;
using namespace sbeam::cli;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> trials;
    std::string lambdas;
    std::optional<double> epsilon;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--trials", c.trials, "ensemble size for every stochastic suite");
    app->add_option("--lambda", c.lambdas, "comma separated lambda grid");
    app->add_option("--epsilon", c.epsilon, "cutoff epsilon");
}

RunConfig load(const Common& c)
{
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::from_file(c.config_path);
    if (c.seed)
        cfg.seed = *c.seed;
    if (!c.out.empty())
        cfg.output = c.out;
    if (c.trials)
        cfg.override_trials(*c.trials);
    if (!c.lambdas.empty()) {
        cfg.carleman_lambdas = parse_list(c.lambdas);
        cfg.revised_lambdas = cfg.carleman_lambdas;
    }
    if (c.epsilon)
        cfg.epsilon = *c.epsilon;
    cfg.validate();
    return cfg;
}

int report(const std::filesystem::path& dir)
{
    std::ifstream is(dir / "manifest.json");
    if (!is) {
        std::cerr << "no manifest.json in " << dir << '\n';
        return 2;
    }
    const auto m = nlohmann::json::parse(is);
    std::cout << fmt::format("config {} seed {} version {}\n", m.at("config_hash").get<std::string>(),
                             m.at("seed").get<std::uint64_t>(), m.at("version").get<std::string>());
    for (const auto& s : m.at("suites")) {
        std::cout << fmt::format("[{}] {}\n", s.at("pass").get<bool>() ? "PASS" : "FAIL", s.at("name").get<std::string>());
        for (const auto& c : s.at("checks")) {
            const bool info = c.value("informational", false);
            const auto v = c.at("value");
            std::cout << fmt::format("  {:<5} {:<36} {}\n", info ? "info" : (c.at("pass").get<bool>() ? "ok" : "FAIL"),
                                     c.at("name").get<std::string>(),
                                     v.is_null() ? std::string("nan") : fmt::format("{:.6e}", v.get<double>()));
        }
    }
    std::ifstream ts(dir / "timings.json");
    if (ts) {
        const auto t = nlohmann::json::parse(ts);
        for (const auto& [k, v] : t.items())
            std::cout << fmt::format("time {:<14} {:.2f} s\n", k, v.at("total").get<double>());
    }
    const bool pass = m.at("pass").get<bool>();
    std::cout << (pass ? "overall: PASS\n" : "overall: FAIL\n");
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic clamped beam simulator and estimate verification harness"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts;
    std::string suite;
    std::string trajectory;
    auto* run = app.add_subcommand("run", "run a verification suite");
    run->add_option("suite", suite, "eigen | energy | identity | carleman | revised | observability | all")->required();
    run->add_option("--export-trajectory", trajectory, "write one modal trajectory as CSV");
    add_common(run, run_opts);

    std::string golden_out;
    auto* sweep = app.add_subcommand("sweep", "lambda sweep of the manufactured corpus");
    sweep->add_option("--write-golden", golden_out, "record the sweep as a golden file");
    add_common(sweep, sweep_opts);

    std::string report_dir = "sbeam-out";
    auto* rep = app.add_subcommand("report", "print the summary of a finished run");
    rep->add_option("dir", report_dir, "output directory of a run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const auto cfg = load(run_opts);
            if (!trajectory.empty()) {
                std::ofstream os(trajectory);
                export_trajectory(cfg, 0, os);
            }
            const auto m = run_suite(cfg, suite, cfg.output);
            std::ifstream summary(std::filesystem::path(cfg.output) / "summary.txt");
            std::cout << summary.rdbuf();
            return m.pass() ? 0 : 1;
        }
        if (*sweep) {
            const auto cfg = load(sweep_opts);
            Runner runner(cfg);
            const auto table = runner.carleman_sweep();
            OutputDir out(cfg.output);
            SuiteResult sr;
            sr.name = "sweep";
            out.write_with(sr, "carleman_sweep.csv", [&](std::ostream& os) { table.write_csv(os); });
            out.write_json(sr, "carleman_sweep.json", to_json(table));
            emit_plot_data(table, "carleman", cfg.hash(), out, sr);
            const auto summary = summarize_sweep(table.rows);
            for (std::size_t i = 0; i < summary.lambdas.size(); ++i)
                std::cout << fmt::format("lambda {:>6g}  max ratio {:.9e}\n", summary.lambdas[i], summary.max_ratio[i]);
            std::cout << fmt::format("empirical lambda0 {}  constant {:.9e}\n", table.empirical_lambda0,
                                     table.empirical_constant);
            if (!golden_out.empty()) {
                std::ofstream os(golden_out);
                os << carleman_golden_json(table, cfg).dump(2) << '\n';
                std::cout << "golden written to " << golden_out << '\n';
            }
            return table.pass ? 0 : 1;
        }
        return report(report_dir);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
