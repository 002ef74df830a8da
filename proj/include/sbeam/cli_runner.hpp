#pragma once

// Run configuration, suite orchestration, manifests and report emission.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sbeam/beam_operator.hpp"
#include "sbeam/carleman_weights.hpp"
#include "sbeam/energy_monitor.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/estimate_verifier.hpp"
#include "sbeam/identity_checker.hpp"
#include "sbeam/manufactured.hpp"
#include "sbeam/spectral_sde.hpp"

namespace sbeam::cli {

using nlohmann::json;

inline constexpr const char* kToolName = "sbeam";
inline constexpr const char* kToolVersion = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    return fmt::format("{:016x}", v);
}

inline std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty())
            continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size())
            throw ConfigError({"not a number in list: '" + item + "'"});
        out.push_back(v);
    }
    return out;
}

inline std::string format_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + fmt::format("{}", v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
    std::string scenario = "default";
    std::uint64_t seed = 20240611;
    std::string output = "sbeam-out"; // not part of the hash

    Interval interval{1.0, 2.0};
    double horizon = 1.0;
    int modes = 8;
    int x_panels = 4, x_order = 12; // spatial quadrature for ensemble integrals

    int energy_steps = 1024, energy_trials = 256;

    std::vector<double> identity_lambdas{1, 2, 4, 8};
    int identity_points = 100;
    double balance_lambda = 2.0;
    int balance_steps = 512, balance_trials = 256;

    std::vector<double> carleman_lambdas{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    int audit_points = 1000;
    std::uint64_t audit_seed = 1;
    double x0 = 0.0;
    std::string golden; // empty: built-in location

    double epsilon = 0.125;
    std::vector<double> revised_lambdas{2, 4, 6};
    int revised_steps = 1024, revised_trials = 256;

    int obs_data = 64, obs_trials = 200, obs_steps = 1024;
    double obs_g_amplitude = 0.1;
    std::uint64_t obs_data_seed = 7;

    std::vector<std::string> violations() const
    {
        std::vector<std::string> v;
        auto need = [&](bool ok, const std::string& msg) {
            if (!ok)
                v.push_back(msg);
        };
        need(std::isfinite(interval.a) && std::isfinite(interval.b) && interval.a < interval.b,
             "domain: need a < b");
        need(interval.a > 0.0, "domain: the weight with x0 = 0 needs a > 0");
        need(horizon > 0.0 && std::isfinite(horizon), "domain: T must be positive");
        need(modes >= 1 && modes <= 64, "galerkin: modes must lie in 1..64");
        need(x_panels >= 1 && x_order >= 2, "galerkin: x quadrature needs panels >= 1 and order >= 2");
        need(energy_steps >= 8, "energy: steps must be >= 8");
        need(energy_trials >= 2, "energy: trials must be >= 2");
        need(!identity_lambdas.empty(), "identity: lambda list is empty");
        for (double l : identity_lambdas)
            need(l > 0.0, "identity: lambdas must be positive");
        need(identity_points >= 1, "identity: points must be >= 1");
        need(balance_lambda > 0.0, "identity: balance_lambda must be positive");
        need(balance_steps >= 16 && balance_steps % 8 == 0, "identity: balance_steps must be a multiple of 8");
        need(balance_trials >= 2, "identity: balance_trials must be >= 2");
        need(!carleman_lambdas.empty(), "carleman: lambda list is empty");
        for (double l : carleman_lambdas)
            need(l > 0.0, "carleman: lambdas must be positive");
        need(audit_points >= 1, "carleman: audit_points must be >= 1");
        need(x0 == 0.0, "carleman: only x0 = 0 is implemented for the F/H coefficients");
        need(epsilon > 0.0 && epsilon < 0.5 * horizon, "revised: need 0 < epsilon < T/2");
        need(!revised_lambdas.empty(), "revised: lambda list is empty");
        for (double l : revised_lambdas)
            need(l > 0.0, "revised: lambdas must be positive");
        need(revised_steps >= 16, "revised: steps must be >= 16");
        need(revised_trials >= 2, "revised: trials must be >= 2");
        if (epsilon > 0.0 && revised_steps >= 16) {
            for (double e : {epsilon, 0.5 * epsilon}) {
                const double r = e / (horizon / revised_steps);
                need(std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r),
                     fmt::format("revised: epsilon {} is not a multiple of T/steps", e));
            }
        }
        need(obs_data >= 1, "observability: data must be >= 1");
        need(obs_trials >= 1, "observability: trials must be >= 1");
        need(obs_steps >= 8, "observability: steps must be >= 8");
        need(obs_g_amplitude >= 0.0, "observability: g_amplitude must be non-negative");
        return v;
    }

    void validate() const
    {
        auto v = violations();
        if (!v.empty())
            throw ConfigError(std::move(v));
    }

    /// Canonical text; every field except the output directory.
    std::string to_ini() const
    {
        std::ostringstream os;
        os << "[run]\nscenario = " << scenario << "\nseed = " << seed << "\n\n";
        os << "[domain]\na = " << fmt::format("{}", interval.a) << "\nb = " << fmt::format("{}", interval.b)
           << "\nT = " << fmt::format("{}", horizon) << "\n\n";
        os << "[galerkin]\nmodes = " << modes << "\nx_panels = " << x_panels << "\nx_order = " << x_order << "\n\n";
        os << "[energy]\nsteps = " << energy_steps << "\ntrials = " << energy_trials << "\n\n";
        os << "[identity]\nlambdas = " << format_list(identity_lambdas) << "\npoints = " << identity_points
           << "\nbalance_lambda = " << fmt::format("{}", balance_lambda) << "\nbalance_steps = " << balance_steps
           << "\nbalance_trials = " << balance_trials << "\n\n";
        os << "[carleman]\nlambdas = " << format_list(carleman_lambdas) << "\naudit_points = " << audit_points
           << "\naudit_seed = " << audit_seed << "\nx0 = " << fmt::format("{}", x0) << "\ngolden = " << golden
           << "\n\n";
        os << "[revised]\nepsilon = " << fmt::format("{}", epsilon) << "\nlambdas = " << format_list(revised_lambdas)
           << "\nsteps = " << revised_steps << "\ntrials = " << revised_trials << "\n\n";
        os << "[observability]\ndata = " << obs_data << "\ntrials = " << obs_trials << "\nsteps = " << obs_steps
           << "\ng_amplitude = " << fmt::format("{}", obs_g_amplitude) << "\ndata_seed = " << obs_data_seed
           << "\n";
        return os.str();
    }

    std::uint64_t hash() const { return fnv1a64(to_ini()); }

    static RunConfig parse(std::istream& is)
    {
        boost::property_tree::ptree pt;
        try {
            boost::property_tree::ini_parser::read_ini(is, pt);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError({std::string("malformed config: ") + e.what()});
        }
        static const std::map<std::string, std::vector<std::string>> known{
            {"run", {"scenario", "seed", "output"}},
            {"domain", {"a", "b", "T"}},
            {"galerkin", {"modes", "x_panels", "x_order"}},
            {"energy", {"steps", "trials"}},
            {"identity", {"lambdas", "points", "balance_lambda", "balance_steps", "balance_trials"}},
            {"carleman", {"lambdas", "audit_points", "audit_seed", "x0", "golden"}},
            {"revised", {"epsilon", "lambdas", "steps", "trials"}},
            {"observability", {"data", "trials", "steps", "g_amplitude", "data_seed"}}};
        std::vector<std::string> errors;
        for (const auto& [section, body] : pt) {
            const auto it = known.find(section);
            if (it == known.end()) {
                errors.push_back("unknown section [" + section + "]");
                continue;
            }
            for (const auto& [key, value] : body)
                if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                    errors.push_back("unknown key " + section + "." + key);
        }
        RunConfig c;
        auto get = [&](const char* path, auto& field) {
            const auto v = pt.get_optional<std::string>(path);
            if (!v)
                return;
            std::istringstream ss(*v);
            using T = std::decay_t<decltype(field)>;
            if constexpr (std::is_same_v<T, std::string>) {
                field = *v;
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                try {
                    field = parse_list(*v);
                } catch (const ConfigError& e) {
                    errors.push_back(std::string(path) + ": " + e.violations().front());
                }
            } else {
                T parsed{};
                ss >> parsed;
                if (ss.fail() || !(ss >> std::ws).eof())
                    errors.push_back(std::string(path) + ": cannot parse '" + *v + "'");
                else
                    field = parsed;
            }
        };
        get("run.scenario", c.scenario);
        get("run.seed", c.seed);
        get("run.output", c.output);
        get("domain.a", c.interval.a);
        get("domain.b", c.interval.b);
        get("domain.T", c.horizon);
        get("galerkin.modes", c.modes);
        get("galerkin.x_panels", c.x_panels);
        get("galerkin.x_order", c.x_order);
        get("energy.steps", c.energy_steps);
        get("energy.trials", c.energy_trials);
        get("identity.lambdas", c.identity_lambdas);
        get("identity.points", c.identity_points);
        get("identity.balance_lambda", c.balance_lambda);
        get("identity.balance_steps", c.balance_steps);
        get("identity.balance_trials", c.balance_trials);
        get("carleman.lambdas", c.carleman_lambdas);
        get("carleman.audit_points", c.audit_points);
        get("carleman.audit_seed", c.audit_seed);
        get("carleman.x0", c.x0);
        get("carleman.golden", c.golden);
        get("revised.epsilon", c.epsilon);
        get("revised.lambdas", c.revised_lambdas);
        get("revised.steps", c.revised_steps);
        get("revised.trials", c.revised_trials);
        get("observability.data", c.obs_data);
        get("observability.trials", c.obs_trials);
        get("observability.steps", c.obs_steps);
        get("observability.g_amplitude", c.obs_g_amplitude);
        get("observability.data_seed", c.obs_data_seed);
        if (!errors.empty())
            throw ConfigError(std::move(errors));
        return c;
    }

    static RunConfig parse_text(const std::string& text)
    {
        std::istringstream is(text);
        return parse(is);
    }

    static RunConfig from_file(const std::filesystem::path& path)
    {
        std::ifstream is(path);
        if (!is)
            throw ConfigError({"cannot open config file " + path.string()});
        return parse(is);
    }

    /// --trials replaces every ensemble size.
    void override_trials(int n)
    {
        energy_trials = balance_trials = revised_trials = obs_trials = n;
    }
};

// ---------------------------------------------------------------------------
// Results

struct Check {
    std::string name;
    bool pass = true;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
    bool informational = false; // reported, never fails the suite
};

class PhaseTimer {
public:
    PhaseTimer() : start_(std::chrono::steady_clock::now()) {}
    /// Seconds since construction or the previous lap.
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct SuiteResult {
    std::string name;
    std::vector<Check> checks;
    json report = json::object();
    std::vector<std::string> files;
    double seconds = 0.0;
    std::map<std::string, double> phases; // wall time of named parts, seconds

    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.informational && !c.pass)
                return false;
        return true;
    }
    const Check& check(const std::string& n) const
    {
        for (const auto& c : checks)
            if (c.name == n)
                return c;
        throw ContractViolation("SuiteResult " + name + ": no check " + n);
    }
    void add(std::string n, bool ok, double value, double threshold, std::string detail = {})
    {
        checks.push_back({std::move(n), ok, value, threshold, std::move(detail), false});
    }
    void info(std::string n, double value, std::string detail = {})
    {
        checks.push_back({std::move(n), true, value, 0.0, std::move(detail), true});
    }
};

inline json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

inline json to_json(const Check& c)
{
    json j{{"name", c.name}, {"pass", c.pass}, {"value", number(c.value)}, {"threshold", number(c.threshold)}};
    if (!c.detail.empty())
        j["detail"] = c.detail;
    if (c.informational)
        j["informational"] = true;
    return j;
}

inline json to_json(const EstimateRow& r)
{
    return {{"scenario", r.scenario}, {"lambda", r.lambda},       {"lhs", number(r.lhs)},
            {"rhs", number(r.rhs)},   {"ratio", number(r.ratio)}, {"lhs_se", number(r.lhs_se)},
            {"rhs_se", number(r.rhs_se)}, {"ratio_se", number(r.ratio_se)}, {"skipped", r.skipped}};
}

inline json to_json(const EstimateReport& r)
{
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(to_json(row));
    json extras = json::object();
    for (const auto& [k, v] : r.extras)
        extras[k] = number(v);
    return {{"id", r.id},
            {"rows", rows},
            {"empirical_lambda0", number(r.empirical_lambda0)},
            {"empirical_constant", number(r.empirical_constant)},
            {"folded_constant", number(r.folded_constant)},
            {"pass", r.pass},
            {"extras", extras}};
}

inline json to_json(const IdentityBreakdown& b)
{
    json mean = json::object(), se = json::object();
    for (int k = 0; k < kBalanceTermCount; ++k) {
        mean[balance_term_name(k)] = number(b.mean[k]);
        se[balance_term_name(k)] = number(b.stderr_[k]);
    }
    return {{"trials", b.trials},
            {"mean", mean},
            {"stderr", se},
            {"scale", number(b.scale)},
            {"relative_residual", number(b.relative_residual())},
            {"relative_residual_printed", number(b.relative_residual_printed())},
            {"residual_z", number(b.residual_z())}};
}

// ---------------------------------------------------------------------------
// Output

/// Writes files under one directory and keeps the inventory.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root) : root_(std::move(root))
    {
        std::filesystem::create_directories(root_);
    }
    const std::filesystem::path& root() const noexcept { return root_; }

    void write(SuiteResult& suite, const std::string& name, const std::string& content)
    {
        std::ofstream os(root_ / name, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write " + (root_ / name).string());
        os << content;
        suite.files.push_back(name);
        files_[name] = content;
    }
    void write_json(SuiteResult& suite, const std::string& name, const json& j)
    {
        write(suite, name, j.dump(2) + "\n");
    }
    template <class F>
    void write_with(SuiteResult& suite, const std::string& name, F&& fill)
    {
        std::ostringstream os;
        fill(os);
        write(suite, name, os.str());
    }
    const std::map<std::string, std::string>& files() const noexcept { return files_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::string> files_;
};

/// One CSV per scenario series of a sweep; names carry the config hash.
inline std::vector<std::string> emit_plot_data(const EstimateReport& rep, const std::string& stem,
                                               std::uint64_t config_hash, OutputDir& out, SuiteResult& suite)
{
    require(!rep.rows.empty(), "emit_plot_data: empty table");
    std::vector<std::string> scenarios;
    for (const auto& r : rep.rows)
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
            scenarios.push_back(r.scenario);
    std::vector<std::string> names;
    for (const auto& s : scenarios) {
        const std::string name = fmt::format("plot_{}_{}_{}.csv", stem, s, hex64(config_hash).substr(0, 8));
        out.write_with(suite, name, [&](std::ostream& os) {
            os << "lambda,ratio,ratio_se\n";
            os.precision(17);
            for (const auto& r : rep.rows)
                if (r.scenario == s)
                    os << r.lambda << ',' << r.ratio << ',' << r.ratio_se << '\n';
        });
        names.push_back(name);
    }
    return names;
}

// ---------------------------------------------------------------------------
// Suites

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"eigen", "energy", "identity", "carleman", "revised", "observability"};
    return names;
}

#ifdef SBEAM_GOLDEN_DIR
inline constexpr const char* kDefaultGoldenDir = SBEAM_GOLDEN_DIR;
#else
inline constexpr const char* kDefaultGoldenDir = "tests/golden";
#endif

inline std::filesystem::path golden_path(const RunConfig& c)
{
    if (!c.golden.empty())
        return c.golden;
    return std::filesystem::path(kDefaultGoldenDir) / "carleman_manufactured.json";
}

/// Plain bisection on cos(z) cosh(z) - 1 in [4.5, 5]; an oracle independent
/// of the mode solver.
inline double first_root_bisection()
{
    double lo = 4.5, hi = 5.0;
    auto f = [](double z) { return std::cos(z) * std::cosh(z) - 1.0; };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(lo) < 0.0) == (f(mid) < 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline json carleman_golden_json(const EstimateReport& rep, const RunConfig& c)
{
    json ratios = json::object();
    for (const auto& r : rep.rows)
        ratios[r.scenario].push_back(number(r.ratio));
    return {{"interval", {c.interval.a, c.interval.b}},
            {"T", c.horizon},
            {"lambdas", c.carleman_lambdas},
            {"ratios", ratios},
            {"empirical_lambda0", number(rep.empirical_lambda0)},
            {"empirical_constant", number(rep.empirical_constant)}};
}

class Runner {
public:
    explicit Runner(RunConfig config) : config_(std::move(config))
    {
        config_.validate();
        basis_ = std::make_shared<const ModalBasis>(config_.interval, config_.modes);
        xbasis_ = std::make_shared<const ModalBasis>(config_.interval, config_.modes, config_.x_panels, config_.x_order);
    }

    const RunConfig& config() const noexcept { return config_; }

    SuiteResult run(const std::string& suite, OutputDir& out)
    {
        using Clock = std::chrono::steady_clock;
        const auto t0 = Clock::now();
        SuiteResult r;
        r.name = suite;
        try {
            if (suite == "eigen")
                eigen(r, out);
            else if (suite == "energy")
                energy_suite(r, out);
            else if (suite == "identity")
                identity(r, out);
            else if (suite == "carleman")
                carleman(r, out);
            else if (suite == "revised")
                revised(r, out);
            else if (suite == "observability")
                observability(r, out);
            else
                throw ConfigError({"unknown suite '" + suite + "'"});
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error(fmt::format("suite {}: {}", suite, e.what()));
        }
        r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        return r;
    }

    /// Sweep of the manufactured corpus; shared by the carleman suite and `sweep`.
    EstimateReport carleman_sweep() const
    {
        return verify_carleman(manufactured_corpus(config_.interval, config_.horizon), config_.interval,
                               config_.horizon, config_.carleman_lambdas, {}, config_.x0);
    }

private:
    SimulationConfig sim(int steps, int trials) const
    {
        SimulationConfig s;
        s.interval = config_.interval;
        s.horizon = config_.horizon;
        s.modes = config_.modes;
        s.steps = steps;
        s.seed = config_.seed;
        s.trials = trials;
        return s;
    }

    void eigen(SuiteResult& r, OutputDir& out)
    {
        const auto& B = *basis_;
        const int M = B.size();
        const auto w = B.quadrature().weights();
        double orth = 0.0, eig_res = 0.0, min_trace = INFINITY;
        json modes = json::array();
        for (int k = 0; k < M; ++k) {
            for (int m = 0; m < M; ++m) {
                double s = 0.0;
                for (std::size_t q = 0; q < w.size(); ++q)
                    s += w[q] * B.nodal(0, k)[q] * B.nodal(0, m)[q];
                orth = std::max(orth, std::abs(s - (k == m ? 1.0 : 0.0)));
            }
            double num = 0.0;
            for (std::size_t q = 0; q < w.size(); ++q) {
                const double d = B.nodal(4, k)[q] - B.eigenvalues()[k] * B.nodal(0, k)[q];
                num += w[q] * d * d;
            }
            const double res = std::sqrt(num) / B.eigenvalues()[k];
            eig_res = std::max(eig_res, res);
            min_trace = std::min(min_trace, std::abs(B.at_b(2)[k]));
            modes.push_back({{"k", k + 1},
                             {"mu", B.mode(k).wavenumber()},
                             {"eigenvalue", B.eigenvalues()[k]},
                             {"v_xx_b", B.at_b(2)[k]},
                             {"v_xxx_b", B.at_b(3)[k]},
                             {"eigen_residual", res}});
        }
        const double L = config_.interval.length();
        const double root_diff = std::abs(B.mode(0).wavenumber() * L - first_root_bisection());
        r.add("orthonormality_error", orth < 1e-8, orth, 1e-8);
        r.add("eigenrelation_residual", eig_res < 1e-6, eig_res, 1e-6);
        r.add("first_root_vs_bisection", root_diff < 1e-6, root_diff, 1e-6,
              fmt::format("mu1 L = {:.12f}", B.mode(0).wavenumber() * L));
        r.add("boundary_trace_nonzero", min_trace > 0.0, min_trace, 0.0, "min_k |v_k''(b)|");
        r.report = {{"modes", modes}, {"orthonormality_error", orth}, {"eigen_residual", eig_res},
                    {"first_root", B.mode(0).wavenumber() * L}, {"bisection_oracle", first_root_bisection()}};
        out.write_json(r, "eigen.json", r.report);
        out.write_with(r, "eigen_modes.csv", [&](std::ostream& os) {
            os << "k,mu,eigenvalue,v_xx_b,v_xxx_b,eigen_residual\n";
            os.precision(17);
            for (const auto& m : modes)
                os << m["k"].get<int>() << ',' << m["mu"].get<double>() << ',' << m["eigenvalue"].get<double>() << ','
                   << m["v_xx_b"].get<double>() << ',' << m["v_xxx_b"].get<double>() << ','
                   << m["eigen_residual"].get<double>() << '\n';
        });
    }

    void energy_suite(SuiteResult& r, OutputDir& out)
    {
        const int M = config_.modes;
        const auto eig = basis_->eigenvalues();
        json rep;

        // free vibration from random data
        {
            GalerkinSystem sys(sim(config_.energy_steps, 1), basis_, Forcing::none());
            const auto init = random_initial_data(config_.seed, 0, M);
            const auto series = energy_series(sys.simulate(init, 0), eig);
            double drift = 0.0;
            for (double e : series)
                drift = std::max(drift, std::abs(e - series.front()) / series.front());
            r.add("conservation_drift", drift < 1e-8, drift, 1e-8);
            rep["conservation_drift"] = drift;
        }
        // deterministic forcing: Ito residual under step halving
        {
            auto fm = [](double t, std::span<double> o) {
                for (std::size_t k = 0; k < o.size(); ++k)
                    o[k] = std::cos(3.0 * (k + 1) * t + 0.3 * k) / (k + 1);
            };
            InitialData init = InitialData::zero(M);
            init.c0[0] = 1.0;
            if (M > 1)
                init.cdot0[1] = 0.5;
            std::vector<double> res;
            json rows = json::array();
            for (int n : {128, 256, 512}) {
                GalerkinSystem sys(sim(n, 1), basis_, Forcing::modal(fm, nullptr));
                const auto ir = ito_identity_residual(sys.simulate(init, 0), eig);
                res.push_back(ir.max_abs);
                rows.push_back({{"steps", n}, {"max_residual", ir.max_abs}});
            }
            const double r1 = res[0] / res[1], r2 = res[1] / res[2];
            r.add("forced_order_ratio", std::abs(r1 - 4.0) <= 0.5 && std::abs(r2 - 4.0) <= 0.5, r2, 4.0,
                  fmt::format("ratios {:.4f}, {:.4f}; target 4 +- 0.5", r1, r2));
            rep["forced_residuals"] = rows;
        }
        // additive noise: E[E(t)] = t sum g_k^2
        {
            const int N = config_.energy_trials;
            std::vector<double> g(M, 0.0);
            for (int k = 0; k < M; ++k)
                g[k] = 1.0 / (k + 1);
            double g2 = 0.0;
            for (double v : g)
                g2 += v * v;
            auto gm = [g](double, std::span<double> o) { std::copy(g.begin(), g.end(), o.begin()); };
            GalerkinSystem sys(sim(config_.energy_steps, N), basis_, Forcing::modal(nullptr, gm));
            std::vector<std::vector<double>> series(N);
            std::vector<double> ito(N);
            parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
                const auto tr = sys.simulate(InitialData::zero(M), i);
                series[i] = energy_series(tr, eig);
                ito[i] = ito_identity_residual(tr, eig).relative();
            });
            auto rec = energy_record(series, config_.horizon);
            rec.theory.resize(rec.t.size());
            double zmax = 0.0;
            for (std::size_t i = 0; i < rec.t.size(); ++i) {
                rec.theory[i] = rec.t[i] * g2;
                if (i > 0 && rec.stderr_[i] > 0.0)
                    zmax = std::max(zmax, std::abs(rec.mean[i] - rec.theory[i]) / rec.stderr_[i]);
            }
            r.add("mean_energy_law_z", zmax <= 3.0, zmax, 3.0, "max over t of |mean - t sum g_k^2| / stderr");
            const double ito_mean = std::accumulate(ito.begin(), ito.end(), 0.0) / N;
            r.info("pathwise_ito_residual", ito_mean, "mean relative residual of the pathwise energy balance");
            const auto est = energy_estimate_check(series, 0.0, std::sqrt(g2 * config_.horizon));
            r.info("energy_estimate_ratio", est.max_ratio, "max sqrt E[E(t)] / (sqrt E[E(s)] + ||f|| + ||g||)");
            rep["mean_energy_z"] = zmax;
            rep["energy_estimate"] = {{"max_ratio", est.max_ratio}, {"worst_s", est.worst_s},
                                      {"worst_t", est.worst_t}, {"evaluated", est.evaluated}};
            out.write_with(r, "energy_mean.csv", [&](std::ostream& os) { rec.write_csv(os); });
        }
        r.report = rep;
        out.write_json(r, "energy.json", rep);
    }

    void identity(SuiteResult& r, OutputDir& out)
    {
        const auto& I = config_.interval;
        const double T = config_.horizon;
        json rep;
        PhaseTimer timer;

        // pointwise, fixed corpus
        const auto corpus = manufactured_corpus(I, T);
        double worst = 0.0, worst_printed = 0.0;
        std::ostringstream csv;
        csv << "field,lambda,t,x,lhs,rhs,residual,residual_printed\n";
        csv.precision(17);
        const NormalStream pts(config_.seed, 0x1D1Dull);
        for (double lam : config_.identity_lambdas) {
            const WeightField w{lam, 0.0, T};
            for (std::size_t f = 0; f < corpus.size(); ++f) {
                for (int i = 0; i < config_.identity_points; ++i) {
                    const std::uint32_t base = static_cast<std::uint32_t>(2 * (f * config_.identity_points + i));
                    const double t = T * pts.uniform(base);
                    const double x = I.a + I.length() * pts.uniform(base + 1);
                    const auto p = pointwise_identity(corpus[f], w, t, x);
                    worst = std::max(worst, std::abs(p.residual));
                    worst_printed = std::max(worst_printed, std::abs(p.residual_printed));
                    csv << corpus[f].name() << ',' << lam << ',' << t << ',' << x << ',' << p.lhs << ',' << p.rhs
                        << ',' << p.residual << ',' << p.residual_printed << '\n';
                }
            }
        }
        r.add("pointwise_max_residual", worst < 1e-6, worst, 1e-6);
        r.info("pointwise_printed_group_residual", worst_printed,
               "u_x^2 group with the second x-derivative of B - (G - Phi1)_x");
        out.write(r, "identity_pointwise.csv", csv.str());

        // pointwise, random separable fields
        double worst_random = 0.0;
        for (int s = 0; s < 5; ++s) {
            const auto y = random_manufactured(I, T, config_.seed + s);
            const NormalStream rp(config_.seed, 0x2D2Dull + s);
            for (double lam : {1.0, 2.0, 4.0})
                for (int i = 0; i < 100; ++i) {
                    const double t = T * rp.uniform(2 * i), x = I.a + I.length() * rp.uniform(2 * i + 1);
                    worst_random = std::max(worst_random,
                                            std::abs(pointwise_identity_residual(y, WeightField{lam, 0.0, T}, t, x)));
                }
        }
        r.add("pointwise_random_fields", worst_random < 1e-6, worst_random, 1e-6);
        r.phases["pointwise"] = timer.lap();

        // integrated, deterministic
        const WeightField wb{config_.balance_lambda, 0.0, T};
        const Quadrature xq(I.a, I.b, 8, 16);
        const auto det = integrated_balance(default_manufactured(I, T), wb, I, xq);
        r.add("deterministic_balance", det.relative_residual() < 1e-5, det.relative_residual(), 1e-5);
        r.info("deterministic_balance_printed", det.relative_residual_printed());
        rep["deterministic_balance"] = to_json(det);

        const auto a2 = a2_cross_check(default_manufactured(I, T), wb, Quadrature(I.a, I.b, 4, 12),
                                       Quadrature(0.0, T, 4, 12));
        r.add("a2_cross_check", a2.relative_difference() < 1e-10, a2.relative_difference(), 1e-10);

        const auto bt = boundary_term_check(default_manufactured(I, T), wb, I);
        r.add("boundary_term_bound", bt.holds, bt.empirical_c, bt.explicit_c,
              fmt::format("A1 = {:.6e}, majorant = {:.6e}", bt.a1, bt.majorant));
        rep["boundary_term"] = {{"a1", bt.a1}, {"majorant", bt.majorant}, {"empirical_c", bt.empirical_c},
                                {"explicit_c", bt.explicit_c}};

        // integrated, stochastic: g = (1 + t/T) v_1, zero data, cutoff at T/8
        auto gm = [T](double t, std::span<double> o) {
            std::fill(o.begin(), o.end(), 0.0);
            o[0] = 1.0 + t / T;
        };
        const Cutoff chi(T / 8.0, T);
        auto stochastic = [&](int steps, int trials) {
            GalerkinSystem sys(sim(steps, trials), basis_, Forcing::modal(nullptr, gm));
            return integrated_balance(sys, InitialData::zero(config_.modes), chi, *xbasis_, wb, trials);
        };
        const auto base = stochastic(config_.balance_steps, config_.balance_trials);
        const auto fine = stochastic(2 * config_.balance_steps, 4 * config_.balance_trials);
        const double m0 = std::abs(base.mean[kResidual]) + 3.0 * base.stderr_[kResidual];
        const double m1 = std::abs(fine.mean[kResidual]) + 3.0 * fine.stderr_[kResidual];
        r.add("stochastic_balance_z", base.residual_z() <= 3.0, base.residual_z(), 3.0);
        r.add("stochastic_refinement_shrinks", m1 < m0, m1 / m0, 1.0, "(|mean| + 3 se) refined / base");
        r.info("stochastic_printed_group_z",
               base.stderr_[kResidualPrinted] > 0.0 ? std::abs(base.mean[kResidualPrinted]) / base.stderr_[kResidualPrinted]
                                                    : 0.0);
        r.phases["balance"] = timer.lap();
        rep["stochastic_balance"] = to_json(base);
        rep["stochastic_balance_refined"] = to_json(fine);
        rep["pointwise"] = {{"max_residual", worst}, {"max_residual_printed", worst_printed},
                            {"max_residual_random", worst_random}};
        rep["a2_cross_check"] = {{"table", a2.from_table}, {"groups", a2.from_groups}};
        r.report = rep;
        out.write_json(r, "identity.json", rep);
    }

    void carleman(SuiteResult& r, OutputDir& out)
    {
        const auto& I = config_.interval;
        const double T = config_.horizon;
        json rep;
        PhaseTimer timer;

        const auto audit = audit_coefficients(I.a, I.b, T, config_.audit_points, config_.audit_seed);
        json entries = json::array();
        for (const auto& e : audit.entries)
            entries.push_back({{"name", e.name},
                               {"reference", e.reference},
                               {"max_rel_diff", e.max_rel_diff},
                               {"agrees", e.agrees},
                               {"worst", {{"t", e.worst_t}, {"x", e.worst_x}, {"lambda", e.worst_lambda}}}});
        const auto disc = audit.discrepancies();
        r.add("audit_completed", audit.points == config_.audit_points, static_cast<double>(disc.size()), 0.0,
              "value: number of discrepancies in the report");
        r.info("audit_printed_consistent", audit.printed_consistent() ? 1.0 : 0.0);
        r.info("audit_F3_printed_vs_corrected", audit.entry("F3", "corrected").max_rel_diff);
        out.write_json(r, "coefficient_audit.json",
                       {{"points", audit.points}, {"tolerance", audit.tolerance}, {"entries", entries}});

        std::vector<double> lb_grid;
        for (int l = 1; l <= 12; ++l)
            lb_grid.push_back(l);
        const auto lb = coefficient_lower_bounds(I.a, I.b, T, lb_grid);
        double min_pos = INFINITY, h5_dev = 0.0;
        for (const auto& row : lb.rows) {
            if (std::isfinite(lb.empirical_lambda0) && row.lambda >= lb.empirical_lambda0)
                for (double v : row.min_ratio)
                    min_pos = std::min(min_pos, v);
            h5_dev = std::max(h5_dev, std::abs(row.min_ratio[4] - 32.0));
        }
        for (double lam : lb_grid)
            for (double t : {0.0, 0.3 * T, T})
                for (double x : {I.a, 0.5 * (I.a + I.b), I.b})
                    h5_dev = std::max(h5_dev, std::abs(coefficients(WeightField{lam, 0.0, T}, t, x).H5 / lam - 32.0));
        r.add("lower_bounds_positive", std::isfinite(lb.empirical_lambda0) && min_pos > 0.0, min_pos, 0.0,
              fmt::format("empirical lambda0 = {}", lb.empirical_lambda0));
        r.add("h5_over_lambda_exact", h5_dev == 0.0, h5_dev, 0.0);
        out.write_with(r, "coefficient_lower_bounds.csv", [&](std::ostream& os) {
            os << "lambda,H1,H2,H3,H4,H5,H3_corrected,all_positive\n";
            os.precision(17);
            for (const auto& row : lb.rows) {
                os << row.lambda;
                for (double v : row.min_ratio)
                    os << ',' << v;
                os << ',' << row.min_ratio_h3_corrected << ',' << (row.all_positive ? 1 : 0) << '\n';
            }
        });
        rep["coefficient_lambda0"] = number(lb.empirical_lambda0);
        r.phases["audit"] = timer.lap();

        // sweep over the manufactured corpus
        const auto sweep = carleman_sweep();
        bool finite = true;
        for (const auto& row : sweep.rows)
            finite = finite && !row.skipped && std::isfinite(row.ratio);
        r.add("sweep_ratios_finite", finite && sweep.pass, sweep.empirical_constant, 0.0,
              fmt::format("empirical lambda0 = {}, constant = {:.9e}", sweep.empirical_lambda0,
                          sweep.empirical_constant));

        const double kappa = 2.0;
        std::vector<ManufacturedField> scaled;
        for (const auto& y : manufactured_corpus(I, T))
            scaled.push_back(y.scaled(kappa));
        const auto sweep2 = verify_carleman(scaled, I, T, config_.carleman_lambdas, {}, config_.x0);
        double inv = 0.0;
        for (std::size_t i = 0; i < sweep.rows.size(); ++i)
            inv = std::max(inv, std::abs(sweep2.rows[i].ratio - sweep.rows[i].ratio) / std::abs(sweep.rows[i].ratio));
        r.add("amplitude_invariance", inv <= 1e-12, inv, 1e-12);

        const auto gpath = golden_path(config_);
        const json current = carleman_golden_json(sweep, config_);
        if (!std::filesystem::exists(gpath)) {
            r.add("golden_match", false, NAN, 1e-6, "golden file not found: " + gpath.string());
        } else {
            std::ifstream is(gpath);
            const json golden = json::parse(is);
            if (golden.at("lambdas") != current.at("lambdas") || golden.at("interval") != current.at("interval") ||
                golden.at("T") != current.at("T")) {
                r.add("golden_match", false, NAN, 1e-6, "golden file was recorded for a different configuration");
            } else {
                const double g = golden.at("empirical_constant").get<double>();
                double diff = std::abs(sweep.empirical_constant - g) / std::abs(g);
                for (const auto& [name, ratios] : golden.at("ratios").items())
                    for (std::size_t i = 0; i < ratios.size(); ++i)
                        diff = std::max(diff, std::abs(current["ratios"][name][i].get<double>() - ratios[i].get<double>()) /
                                                  std::abs(ratios[i].get<double>()));
                r.add("golden_match", diff <= 1e-6, diff, 1e-6, fmt::format("golden constant = {:.9e}", g));
            }
        }
        r.phases["sweep"] = timer.lap();
        rep["sweep"] = to_json(sweep);
        rep["sweep_summary"] = current;
        r.report = rep;
        out.write_json(r, "carleman.json", rep);
        out.write_with(r, "carleman_sweep.csv", [&](std::ostream& os) { sweep.write_csv(os); });
        emit_plot_data(sweep, "carleman", config_.hash(), out, r);
    }

    void revised(SuiteResult& r, OutputDir& out)
    {
        const double T = config_.horizon;
        // full system: y0 = v_1 and g = v_1
        auto gm = [](double, std::span<double> o) {
            std::fill(o.begin(), o.end(), 0.0);
            o[0] = 1.0;
        };
        GalerkinSystem sys(sim(config_.revised_steps, config_.revised_trials), basis_, Forcing::modal(nullptr, gm));
        InitialData init = InitialData::zero(config_.modes);
        init.c0[0] = 1.0;
        const double eps = config_.epsilon;
        const auto a = verify_revised_carleman(sys, init, eps, config_.revised_lambdas, config_.revised_trials, *xbasis_);
        const auto b =
            verify_revised_carleman(sys, init, 0.5 * eps, config_.revised_lambdas, config_.revised_trials, *xbasis_);
        bool dom = true;
        double worst_scale = 0.0;
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            dom = dom && a.rows[i].lhs_dominated && a.rows[i].rhs_dominated && b.rows[i].lhs_dominated &&
                  b.rows[i].rhs_dominated;
            worst_scale = std::max(worst_scale, std::abs(b.rows[i].tail_coefficient / a.rows[i].tail_coefficient - 16.0));
        }
        double max_ratio = 0.0;
        for (const auto& row : a.rows)
            max_ratio = std::max(max_ratio, row.rev.ratio);
        r.add("revised_pass", a.pass, max_ratio, a.constant,
              fmt::format("K = {:.6g}, z constant = {:.6e}", a.fold_factor, a.z_constant));
        double max_ratio_b = 0.0;
        for (const auto& row : b.rows)
            max_ratio_b = std::max(max_ratio_b, row.rev.ratio);
        r.add("revised_pass_half_epsilon", b.pass, max_ratio_b, b.constant);
        r.add("cutoff_domination", dom, dom ? 1.0 : 0.0, 1.0, "LHS_rev <= LHS_z and RHS_z <= K RHS_rev");
        r.add("tail_coefficient_scaling", worst_scale == 0.0, 16.0 + worst_scale, 16.0,
              "tail coefficient ratio eps/2 against eps");
        auto dump = [](const RevisedReport& rr) {
            json rows = json::array();
            for (const auto& row : rr.rows)
                rows.push_back({{"lambda", row.lambda},
                                {"tail_coefficient", row.tail_coefficient},
                                {"tail_integral", row.tail},
                                {"revised", to_json(row.rev)},
                                {"cutoff", to_json(row.z)},
                                {"lhs_dominated", row.lhs_dominated},
                                {"rhs_dominated", row.rhs_dominated}});
            return json{{"epsilon", rr.epsilon}, {"fold_factor", rr.fold_factor}, {"z_constant", number(rr.z_constant)},
                        {"constant", number(rr.constant)}, {"pass", rr.pass}, {"rows", rows}};
        };
        r.report = {{"epsilon", dump(a)}, {"half_epsilon", dump(b)}, {"T", T}};
        out.write_json(r, "revised.json", r.report);
        out.write_with(r, "revised_sweep.csv", [&](std::ostream& os) {
            os << "epsilon,lambda,tail_coefficient,tail_integral,ratio,ratio_se,z_ratio,z_ratio_se\n";
            os.precision(17);
            for (const auto* rr : {&a, &b})
                for (const auto& row : rr->rows)
                    os << rr->epsilon << ',' << row.lambda << ',' << row.tail_coefficient << ',' << row.tail << ','
                       << row.rev.ratio << ',' << row.rev.ratio_se << ',' << row.z.ratio << ',' << row.z.ratio_se
                       << '\n';
        });
    }

    void observability(SuiteResult& r, OutputDir& out)
    {
        const double amp = config_.obs_g_amplitude;
        auto gm = [amp](double, std::span<double> o) {
            std::fill(o.begin(), o.end(), 0.0);
            o[0] = amp;
        };
        GalerkinSystem sys(sim(config_.obs_steps, config_.obs_trials), basis_, Forcing::modal(nullptr, gm));
        ObservabilityConfig oc;
        oc.data = config_.obs_data;
        oc.trials = config_.obs_trials;
        oc.g_amplitude = amp;
        oc.data_seed = config_.obs_data_seed;
        const auto corpus = random_data_corpus(oc.data_seed, oc.data, config_.modes);
        const auto a = verify_observability(sys, oc, corpus);
        oc.trials *= 2;
        const auto b = verify_observability(sys, oc, corpus);
        const double rel = std::abs(b.constant / a.constant - 1.0);
        r.add("constant_finite", a.pass && std::isfinite(a.constant), a.constant, 0.0,
              fmt::format("worst datum {}", a.worst));
        r.add("constant_stable_2N", std::isfinite(rel) && rel <= 0.1, rel, 0.1);
        r.add("boundary_term_positive", a.boundary_positive && b.boundary_positive, 1.0, 0.0);
        r.info("boundary_only_constant", a.boundary_constant, "max E energy(T) / E int (y_xx(b)^2 + y_xxx(b)^2)");
        r.info("boundary_only_constant_2N", b.boundary_constant);
        r.report = {{"N", to_json(a.summary())}, {"2N", to_json(b.summary())}, {"relative_change", rel}};
        out.write_json(r, "observability.json", r.report);
        out.write_with(r, "observability_data.csv", [&](std::ostream& os) {
            os << "datum,lhs,boundary,boundary_se,rhs,ratio,ratio_se\n";
            os.precision(17);
            for (std::size_t d = 0; d < a.data.size(); ++d) {
                const auto& od = a.data[d];
                os << d << ',' << od.row.lhs << ',' << od.boundary << ',' << od.boundary_se << ',' << od.row.rhs << ','
                   << od.row.ratio << ',' << od.row.ratio_se << '\n';
            }
        });
    }

    RunConfig config_;
    std::shared_ptr<const ModalBasis> basis_;
    std::shared_ptr<const ModalBasis> xbasis_;
};

/// Trial `trial` of the additive-noise system g = v_1 under the config grid.
inline void export_trajectory(const RunConfig& c, std::uint64_t trial, std::ostream& os)
{
    c.validate();
    SimulationConfig s;
    s.interval = c.interval;
    s.horizon = c.horizon;
    s.modes = c.modes;
    s.steps = c.energy_steps;
    s.seed = c.seed;
    s.trials = 1;
    auto gm = [](double, std::span<double> o) {
        std::fill(o.begin(), o.end(), 0.0);
        o[0] = 1.0;
    };
    GalerkinSystem sys(s, std::make_shared<const ModalBasis>(c.interval, c.modes), Forcing::modal(nullptr, gm));
    InitialData init = InitialData::zero(c.modes);
    init.c0[0] = 1.0;
    write_trajectory_csv(os, sys.simulate(init, trial));
}

// ---------------------------------------------------------------------------
// Manifest

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<SuiteResult> suites;
    std::vector<std::pair<std::string, std::string>> files; // name, content hash

    bool pass() const
    {
        for (const auto& s : suites)
            if (!s.pass())
                return false;
        return true;
    }

    json to_json() const
    {
        json js = json::array();
        for (const auto& s : suites) {
            json checks = json::array();
            for (const auto& c : s.checks)
                checks.push_back(cli::to_json(c));
            js.push_back({{"name", s.name}, {"pass", s.pass()}, {"checks", checks}, {"files", s.files}});
        }
        json fs = json::array();
        for (const auto& [n, h] : files)
            fs.push_back({{"name", n}, {"fnv1a64", h}});
        return {{"tool", kToolName},
                {"version", kToolVersion},
                {"config_hash", config_hash},
                {"seed", seed},
                {"pass", pass()},
                {"cutoff_constants", {{"c1", Cutoff::c1}, {"c2", Cutoff::c2}}},
                {"suites", js},
                {"files", fs}};
    }
};

/// Runs the suites ("all" expands to every suite), writes reports, the
/// manifest, a plain-text summary and a timings sidecar.
inline RunManifest run_suite(const RunConfig& config, const std::string& suite,
                             const std::filesystem::path& out_dir)
{
    std::vector<std::string> names;
    if (suite == "all")
        names = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end())
        names = {suite};
    else
        throw ConfigError({"unknown suite '" + suite + "'"});
    Runner runner(config);
    OutputDir out(out_dir);
    RunManifest m;
    m.config_hash = hex64(config.hash());
    m.seed = config.seed;
    SuiteResult meta;
    out.write(meta, "config.ini", config.to_ini());
    for (const auto& n : names)
        m.suites.push_back(runner.run(n, out));
    for (const auto& [name, content] : out.files())
        m.files.emplace_back(name, hex64(fnv1a64(content)));

    std::ostringstream summary;
    for (const auto& s : m.suites) {
        summary << fmt::format("[{}] {}\n", s.pass() ? "PASS" : "FAIL", s.name);
        for (const auto& c : s.checks)
            summary << fmt::format("  {:<5} {:<36} {:.6e}{}\n", c.informational ? "info" : (c.pass ? "ok" : "FAIL"),
                                   c.name, c.value, c.detail.empty() ? "" : "  (" + c.detail + ")");
    }
    summary << fmt::format("overall: {}\n", m.pass() ? "PASS" : "FAIL");
    {
        std::ofstream os(out_dir / "summary.txt", std::ios::binary);
        os << summary.str();
    }
    {
        std::ofstream os(out_dir / "manifest.json", std::ios::binary);
        os << m.to_json().dump(2) << '\n';
    }
    json timings = json::object();
    for (const auto& s : m.suites) {
        timings[s.name]["total"] = s.seconds;
        for (const auto& [k, v] : s.phases)
            timings[s.name][k] = v;
    }
    std::ofstream(out_dir / "timings.json", std::ios::binary) << timings.dump(2) << '\n';
    return m;
}

} // namespace sbeam::cli
