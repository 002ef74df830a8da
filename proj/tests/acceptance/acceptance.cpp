// One line per acceptance criterion; exit status 0 only if all pass.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sbeam/cli_runner.hpp"

namespace fs = std::filesystem;
using namespace sbeam;
using namespace sbeam::cli;

namespace {

struct Criterion {
    std::string id;
    std::string title;
    std::string suite;
    std::vector<std::string> checks;
    std::vector<std::string> phases; // empty: whole suite
    double limit = 0.0;              // seconds
};

const SuiteResult& find_suite(const RunManifest& m, const std::string& name)
{
    for (const auto& s : m.suites)
        if (s.name == name)
            return s;
    throw std::runtime_error("suite missing from manifest: " + name);
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "sbeam_acceptance";
    fs::remove_all(work);
    const RunConfig config;

    RunManifest first, second;
    try {
        first = run_suite(config, "all", work / "run1");
        second = run_suite(config, "all", work / "run2");
    } catch (const std::exception& e) {
        std::cout << "ERROR running suites: " << e.what() << '\n';
        return 1;
    }

    const std::vector<Criterion> criteria{
        {"AC1", "eigenbasis", "eigen",
         {"orthonormality_error", "eigenrelation_residual", "first_root_vs_bisection"}, {}, 1.0},
        {"AC2", "energy identity", "energy", {"conservation_drift", "forced_order_ratio", "mean_energy_law_z"}, {}, 30.0},
        {"AC3", "pointwise identity", "identity", {"pointwise_max_residual"}, {"pointwise"}, 5.0},
        {"AC4", "integrated balance", "identity",
         {"deterministic_balance", "stochastic_balance_z", "stochastic_refinement_shrinks"}, {"balance"}, 120.0},
        {"AC5", "coefficient audit", "carleman",
         {"audit_completed", "lower_bounds_positive", "h5_over_lambda_exact"}, {"audit"}, 5.0},
        {"AC6", "carleman sweep", "carleman", {"sweep_ratios_finite", "amplitude_invariance", "golden_match"},
         {"sweep"}, 60.0},
        {"AC7", "revised carleman", "revised", {"revised_pass", "tail_coefficient_scaling"}, {}, 120.0},
        {"AC8", "observability", "observability",
         {"constant_finite", "constant_stable_2N", "boundary_term_positive"}, {}, 300.0},
    };

    bool all = true;
    for (const auto& c : criteria) {
        const auto& s = find_suite(first, c.suite);
        bool pass = true;
        std::string detail;
        for (const auto& name : c.checks) {
            const auto& chk = s.check(name);
            pass = pass && chk.pass;
            detail += fmt::format(" {}={:.4g}{}", name, chk.value, chk.pass ? "" : "(FAIL)");
        }
        double seconds = s.seconds;
        if (!c.phases.empty()) {
            seconds = 0.0;
            for (const auto& p : c.phases)
                seconds += s.phases.at(p);
        }
        const bool in_time = seconds < c.limit;
        pass = pass && in_time;
        all = all && pass;
        std::cout << fmt::format("{} {} {}:{} runtime={:.2f}s(limit {:g}s{})\n", c.id, pass ? "PASS" : "FAIL", c.title,
                                 detail, seconds, c.limit, in_time ? "" : ", exceeded");
    }

    // byte-identical outputs across the two runs
    std::vector<std::string> files{"manifest.json", "summary.txt"};
    for (const auto& [name, hash] : first.files)
        files.push_back(name);
    int differing = 0;
    std::string first_diff;
    for (const auto& f : files) {
        const auto a = slurp(work / "run1" / f), b = slurp(work / "run2" / f);
        if (a.empty() || a != b) {
            ++differing;
            if (first_diff.empty())
                first_diff = f;
        }
    }
    const bool det = differing == 0 && first.files == second.files;
    all = all && det;
    std::cout << fmt::format("AC9 {} determinism: files_compared={} differing={}{}\n", det ? "PASS" : "FAIL",
                             files.size(), differing, first_diff.empty() ? "" : " first=" + first_diff);
    std::cout << (all ? "ALL PASS\n" : "SOME CRITERIA FAILED\n");
    return all ? 0 : 1;
}
