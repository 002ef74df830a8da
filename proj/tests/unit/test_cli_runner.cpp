#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbeam/cli_runner.hpp"

using namespace sbeam;
using namespace sbeam::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("sbeam_unit_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST(Fnv, KnownValues)
{
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(RunConfig, DefaultsAreValid)
{
    EXPECT_NO_THROW(RunConfig{}.validate());
}

TEST(RunConfig, RoundTripIsIdempotent)
{
    RunConfig c;
    c.seed = 99;
    c.carleman_lambdas = {2, 2.5, 7};
    c.epsilon = 0.25;
    c.golden = "/tmp/g.json";
    const std::string once = c.to_ini();
    const auto parsed = RunConfig::parse_text(once);
    EXPECT_EQ(parsed.to_ini(), once);
    EXPECT_EQ(parsed.hash(), c.hash());
    EXPECT_EQ(parsed.carleman_lambdas, c.carleman_lambdas);
    EXPECT_EQ(parsed.golden, c.golden);
}

TEST(RunConfig, PartialFileKeepsDefaults)
{
    const auto c = RunConfig::parse_text("[run]\nseed = 5\n[revised]\nlambdas = 3, 5\n");
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.revised_lambdas, (std::vector<double>{3, 5}));
    EXPECT_EQ(c.modes, 8);
    EXPECT_EQ(c.horizon, 1.0);
}

TEST(RunConfig, HashIgnoresOutputDirectory)
{
    RunConfig a, b;
    b.output = "elsewhere";
    EXPECT_EQ(a.hash(), b.hash());
    b.seed += 1;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(RunConfig, ValidationListsEveryViolation)
{
    RunConfig c;
    c.interval = {2.0, 1.0};
    c.modes = 0;
    c.epsilon = 0.7;
    c.carleman_lambdas.clear();
    try {
        c.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_GE(e.violations().size(), 4u);
        EXPECT_NE(std::string(e.what()).find("modes"), std::string::npos);
    }
}

TEST(RunConfig, EpsilonMustLieOnTheTimeGrid)
{
    RunConfig c;
    c.epsilon = 0.1;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunConfig, ParseErrorsAreCollected)
{
    try {
        RunConfig::parse_text("[bogus]\nk = 1\n[run]\nseed = x\nextra = 2\n[carleman]\nlambdas = 1,two\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.violations().size(), 4u);
    }
    EXPECT_THROW(RunConfig::from_file("/nonexistent/sbeam.ini"), ConfigError);
}

TEST(RunConfig, TrialsOverrideReachesEverySuite)
{
    RunConfig c;
    c.override_trials(17);
    EXPECT_EQ(c.energy_trials, 17);
    EXPECT_EQ(c.balance_trials, 17);
    EXPECT_EQ(c.revised_trials, 17);
    EXPECT_EQ(c.obs_trials, 17);
}

TEST(ParseList, NumbersAndErrors)
{
    EXPECT_EQ(parse_list(" 1, 2.5 ,3 "), (std::vector<double>{1, 2.5, 3}));
    EXPECT_TRUE(parse_list("").empty());
    EXPECT_THROW(parse_list("1,x"), ConfigError);
    EXPECT_THROW(parse_list("1.5.2"), ConfigError);
}

TEST(RunSuite, UnknownSuiteWritesNothing)
{
    const auto dir = scratch("unknown");
    EXPECT_THROW(run_suite(RunConfig{}, "bogus", dir), ConfigError);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(RunSuite, EigenPassesAndIsDeterministic)
{
    const auto d1 = scratch("eigen1"), d2 = scratch("eigen2");
    const auto m = run_suite(RunConfig{}, "eigen", d1);
    run_suite(RunConfig{}, "eigen", d2);
    ASSERT_EQ(m.suites.size(), 1u);
    EXPECT_TRUE(m.pass());
    EXPECT_LT(m.suites[0].check("orthonormality_error").value, 1e-8);
    EXPECT_LT(m.suites[0].check("first_root_vs_bisection").value, 1e-6);
    for (const char* f : {"manifest.json", "eigen.json", "eigen_modes.csv", "summary.txt", "config.ini"})
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    const auto j = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    EXPECT_EQ(j.at("config_hash"), hex64(RunConfig{}.hash()));
    EXPECT_EQ(j.at("suites")[0].at("name"), "eigen");
    EXPECT_FALSE(j.contains("timings"));
    EXPECT_TRUE(fs::exists(d1 / "timings.json"));
    EXPECT_NEAR(j.at("cutoff_constants").at("c1").get<double>(), 3.75, 0.0);
}

TEST(RunSuite, FailingCheckFailsTheSuite)
{
    SuiteResult r;
    r.add("ok", true, 0, 1);
    r.info("note", 5);
    EXPECT_TRUE(r.pass());
    r.add("bad", false, 2, 1);
    EXPECT_FALSE(r.pass());
    EXPECT_THROW(r.check("missing"), ContractViolation);
}

TEST(PlotData, OneFilePerSeriesWithHashedNames)
{
    const auto dir = scratch("plot");
    OutputDir out(dir);
    SuiteResult sr;
    EstimateReport rep;
    for (int l = 1; l <= 6; ++l) {
        rep.rows.push_back({"alpha", double(l), 1, 2, 0.5, 0, 0, 0, false});
        rep.rows.push_back({"beta", double(l), 1, 4, 0.25, 0, 0, 0, false});
    }
    const auto names = emit_plot_data(rep, "sweep", 0x1234abcd5678ull, out, sr);
    ASSERT_EQ(names.size(), 2u);
    EXPECT_NE(names[0], names[1]);
    EXPECT_NE(names[0].find("00001234"), std::string::npos);
    std::ifstream is(dir / names[0]);
    std::string line;
    int n = 0;
    std::getline(is, line);
    EXPECT_EQ(line, "lambda,ratio,ratio_se");
    while (std::getline(is, line))
        ++n;
    EXPECT_EQ(n, 6);
    const auto again = emit_plot_data(rep, "sweep", 0x1234abcd5678ull, out, sr);
    EXPECT_EQ(again, names);
    EXPECT_THROW(emit_plot_data(EstimateReport{}, "sweep", 1, out, sr), ContractViolation);
}

TEST(Trajectory, ExportWritesAllSteps)
{
    RunConfig c;
    c.energy_steps = 16;
    std::ostringstream os;
    export_trajectory(c, 0, os);
    int lines = 0;
    std::istringstream is(os.str());
    std::string l;
    while (std::getline(is, l))
        ++lines;
    EXPECT_EQ(lines, 18);
}

TEST(BisectionOracle, FirstRoot)
{
    EXPECT_NEAR(first_root_bisection(), 4.730040744862704, 1e-12);
}
