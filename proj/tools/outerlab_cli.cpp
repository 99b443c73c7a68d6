// outerlab command-line driver.
//
// Exit codes: 0 all consistent, 1 violation, 2 runtime error, 3 config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "outerlab/errors.hpp"
#include "outerlab/experiments.hpp"
#include "outerlab/outer_eval.hpp"

using namespace outerlab;

namespace {

struct Globals {
    std::string config;
    std::string suite = "default";
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::size_t threads = 1;
};

SuiteConfig load_suite(const Globals& g) {
    SuiteConfig cfg = g.config.empty() ? builtin_suite(g.suite) : load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

const Scenario& pick(const SuiteConfig& cfg, const std::string& name) {
    if (cfg.scenarios.empty()) throw ConfigError("config has no scenarios");
    if (name.empty()) return cfg.scenarios.front();
    for (const auto& s : cfg.scenarios)
        if (s.name == name) return s;
    throw ConfigError("no scenario named '" + name + "'");
}

FamilySpec family_from(const std::string& family, const std::string& base, const std::vector<std::string>& params) {
    FamilySpec f{family, {}, base};
    for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + kv + "'");
        try {
            f.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("--param value is not a number: '" + kv + "'");
        }
    }
    return f;
}

int verdict_code(const std::vector<Report>& reports) {
    int code = 0;
    for (const auto& r : reports) {
        if (r.verdict == "error") code = 2;
        else if (r.verdict == "violation" && code == 0) code = 1;
    }
    return code;
}

void emit(const Globals& g, const std::vector<Report>& reports) {
    if (!g.out.empty()) write_reports(reports, g.out);
    if (g.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : reports) arr.push_back(report_json(r));
        std::cout << arr.dump(2) << "\n";
    } else {
        std::cout << summary_csv(reports);
    }
    for (const auto& r : reports)
        if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
}

std::vector<OscillationEstimate> read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read profile file '" + path + "'");
    std::vector<OscillationEstimate> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("radius", 0) == 0) continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell.empty() ? 0.0 : std::stod(cell));
        if (cells.size() < 2) throw ConfigError("profile rows need radius,nu[,standard_error]");
        OscillationEstimate e;
        e.ball = NonisotropicBall(SpherePoint::north(1), cells[0]);
        e.nu = cells[1];
        e.standard_error = cells.size() > 2 ? cells[2] : 0.0;
        out.push_back(e);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"outerlab: outer functions, mean oscillation and smoothness-drop exponents"};
    app.require_subcommand(1);
    Globals g;
    auto add_globals = [&](CLI::App* sub) {
        sub->add_option("--config", g.config, "Scenario config file");
        sub->add_option("--seed", g.seed, "Suite seed (overrides the config)");
        sub->add_option("--out", g.out, "Directory for summary.csv and per-scenario JSON reports");
        sub->add_option("--format", g.format, "Stdout format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", g.threads, "Worker threads (speed only; results do not change)");
    };

    auto* suite = app.add_subcommand("suite", "Run every scenario of a config or built-in suite");
    add_globals(suite);
    suite->add_option("--suite", g.suite, "Built-in suite when --config is absent (default, negative-control)");

    std::string scenario_name;
    auto* verify = app.add_subcommand("verify", "Run one scenario");
    add_globals(verify);
    verify->add_option("--suite", g.suite, "Built-in suite when --config is absent");
    verify->add_option("--scenario", scenario_name, "Scenario name (default: the first)");

    auto* osc = app.add_subcommand("oscillation", "Print the oscillation profile of one scenario");
    add_globals(osc);
    osc->add_option("--suite", g.suite, "Built-in suite when --config is absent");
    osc->add_option("--scenario", scenario_name, "Scenario name (default: the first)");

    std::string profile_path;
    bool weighted = false;
    auto* fit = app.add_subcommand("fit", "Fit the exponent of a radius,nu[,standard_error] CSV profile");
    add_globals(fit);
    fit->add_option("--input", profile_path, "Profile CSV")->required();
    fit->add_flag("--weighted", weighted, "Weight log residuals by (nu / se)^2");

    std::string family = "distance_power", base;
    std::vector<std::string> params;
    std::size_t n = 1, mc_count = 100000;
    std::vector<std::string> points;
    auto* eval = app.add_subcommand("eval", "Evaluate the outer function of a modulus family at points");
    add_globals(eval);
    eval->add_option("--family", family, "Modulus family");
    eval->add_option("--base", base, "Base family for lifted_1d");
    eval->add_option("--param", params, "Family parameter key=value (repeatable)");
    eval->add_option("--n", n, "Dimension");
    eval->add_option("--mc-count", mc_count, "Monte-Carlo samples per point (n >= 2)");
    eval->add_option("--point", points, "Point as 'Re,Im[,Re,Im...]' (repeatable)")->required();

    double l = std::ldexp(1.0, -8);
    std::vector<int> js{1, 2, 3, 4, 5};
    std::size_t count = 10000;
    auto* kc = app.add_subcommand("kernel-check", "Empirical constant of the kernel-difference bound");
    add_globals(kc);
    kc->add_option("--n", n, "Dimension (>= 2)");
    kc->add_option("--l", l, "Ball radius l(Q)");
    kc->add_option("--j", js, "Annulus indices");
    kc->add_option("--count", count, "Samples per annulus");

    std::size_t directions = 256, angles = 4096;
    auto* sc = app.add_subcommand("slice-check", "Slice constant B0 of the lifted outer function of a 1-D family");
    add_globals(sc);
    sc->add_option("--family", family, "1-D modulus family of g");
    sc->add_option("--param", params, "Family parameter key=value (repeatable)");
    sc->add_option("--n", n, "Dimension");
    sc->add_option("--directions", directions, "Directions");
    sc->add_option("--angles", angles, "Angular nodes (power of two)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        const std::uint64_t seed = g.seed.value_or(1);
        if (suite->parsed()) {
            const SuiteConfig cfg = load_suite(g);
            const SuiteResult res = run_suite(cfg, {g.threads});
            emit(g, res.reports);
            return res.exit_code;
        }
        if (verify->parsed()) {
            const SuiteConfig cfg = load_suite(g);
            const Scenario& s = pick(cfg, scenario_name);
            const std::vector<Report> reps{run_scenario(s, scenario_seed(s, cfg.seed), {g.threads})};
            emit(g, reps);
            return verdict_code(reps);
        }
        if (osc->parsed()) {
            const SuiteConfig cfg = load_suite(g);
            const Scenario& s = pick(cfg, scenario_name);
            const Report r = run_scenario(s, scenario_seed(s, cfg.seed), {g.threads});
            if (r.verdict == "error") throw Error(r.error);
            std::cout << "radius,nu,standard_error,samples,fallback\n";
            for (const auto& e : r.profile)
                std::cout << format_number(e.ball->radius) << "," << format_number(e.nu) << ","
                          << format_number(e.standard_error) << "," << e.sample_count << "," << (e.fallback ? 1 : 0)
                          << "\n";
            return 0;
        }
        if (fit->parsed()) {
            const auto prof = read_profile_csv(profile_path);
            FitOptions opt;
            opt.weighted = weighted;
            const ProfileFit pf = fit_exponent(prof, opt);
            std::cout << "slope,intercept,r_squared,halfwidth,used,dropped\n"
                      << format_number(pf.fit.slope) << "," << format_number(pf.fit.intercept) << ","
                      << format_number(pf.fit.r_squared) << "," << format_number(pf.fit.confidence_halfwidth) << ","
                      << pf.fit.radii.size() << "," << pf.dropped_zero.size() + pf.dropped_noise.size() << "\n";
            return 0;
        }
        if (eval->parsed()) {
            const ModulusProfile phi = make_modulus(family_from(family, base, params), n);
            std::unique_ptr<DiscOuterEvaluator> disc;
            std::unique_ptr<BallOuterEvaluator> ball;
            if (n == 1) disc = std::make_unique<DiscOuterEvaluator>(phi);
            else {
                BallOuterOptions bo;
                bo.mc_count = mc_count;
                ball = std::make_unique<BallOuterEvaluator>(phi, SeededSampler(seed, 0), bo);
            }
            std::cout << "point,re,im,exponent_se\n";
            for (const auto& p : points) {
                std::vector<double> xs;
                std::stringstream ss(p);
                std::string cell;
                while (std::getline(ss, cell, ',')) xs.push_back(std::stod(cell));
                if (xs.size() != 2 * n) throw ConfigError("--point needs 2n comma-separated reals");
                std::vector<cplx> z(n);
                for (std::size_t k = 0; k < n; ++k) z[k] = {xs[2 * k], xs[2 * k + 1]};
                cplx v;
                double se = 0.0;
                if (disc) v = disc_outer(*disc, z[0]);
                else {
                    const BallOuterValue bv = ball_outer(*ball, z);
                    v = bv.value;
                    se = bv.exponent_se();
                }
                std::cout << "\"" << p << "\"," << format_number(v.real()) << "," << format_number(v.imag()) << ","
                          << format_number(se) << "\n";
            }
            return 0;
        }
        if (kc->parsed()) {
            if (n < 2) n = 2;
            std::cout << "l,j,max_ratio\n";
            for (int j : js) {
                SeededSampler sm(seed, static_cast<std::uint64_t>(j));
                const auto r = kernel_diff_bound_check(NonisotropicBall(SpherePoint::north(n), l), j, count, sm);
                std::cout << format_number(l) << "," << j << "," << format_number(r.max_ratio) << "\n";
            }
            return 0;
        }
        if (sc->parsed()) {
            if (n < 2) throw ConfigError("slice-check needs --n >= 2");
            auto g1 = std::make_shared<const DiscOuterEvaluator>(make_modulus(family_from(family, "", params), 1));
            SeededSampler sm(seed, 0);
            SliceOptions opt;
            opt.directions = directions;
            opt.angles = angles;
            const SliceReport rep = slice_constant(lift_boundary(g1, n), n, sm, opt);
            std::cout << "b0,worst_direction,clamp_events\n"
                      << format_number(rep.b0) << "," << rep.worst_direction << "," << rep.clamp_events << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
