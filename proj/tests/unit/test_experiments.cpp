#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "outerlab/errors.hpp"
#include "outerlab/experiments.hpp"

using namespace outerlab;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(OUTERLAB_CLI) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("outerlab_test_" + name);
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* const kSmall = R"(suite = "small"
seed = 7
scenario "bal" {
  tag = balance
  alpha = 0.5
}
scenario "plq" {
  tag = P-lq
  q = 3
  radii = dyadic(3, 8)
}
scenario "b-short" {
  tag = B
  n = 1
  alpha = 0.5
  radii = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125]
  samples = 1000
  modulus { family = distance_power  beta = 0.5 }
}
)";

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(kSmall);
    CHECK(cfg.name == "small");
    CHECK(cfg.seed == 7);
    REQUIRE(cfg.scenarios.size() == 3);
    CHECK(cfg.scenarios[0].tag == "balance");
    CHECK(cfg.scenarios[1].q == 3.0);
    CHECK(cfg.scenarios[1].radii.size() == 6);
    CHECK(cfg.scenarios[1].radii.front() == 0.125);
    CHECK(cfg.scenarios[2].modulus.family == "distance_power");
    CHECK(cfg.scenarios[2].modulus.params.at("beta") == 0.5);
    CHECK(cfg.scenarios[2].radii.size() == 5);
    CHECK(parse_config("").scenarios.empty());
}

TEST_CASE("config round trip") {
    for (const char* name : {"default", "negative-control"}) {
        const auto a = builtin_suite(name);
        const std::string text = suite_to_config(a);
        const auto b = parse_config(text);
        CHECK(suite_to_config(b) == text);
        CHECK(b.scenarios.size() == a.scenarios.size());
    }
    const auto s = parse_config(kSmall);
    const auto echo = parse_config(scenario_to_config(s.scenarios[2], 99));
    REQUIRE(echo.scenarios.size() == 1);
    CHECK(echo.scenarios[0].seed == 99u);
    CHECK(echo.scenarios[0].radii == s.scenarios[2].radii);
}

TEST_CASE("config errors") {
    auto bad = [](const std::string& text) {
        INFO(text);
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    };
    bad("bogus = 1\n");
    bad("scenario \"a\" { tag = balance\n alpha = 0.5\n colour = 3 }");
    bad("scenario \"a\" { tag = balance alpha = 0.5 alpha = 0.6 }");
    bad("scenario \"a\" { tag = Z alpha = 0.5 }");
    bad("scenario \"a\" { tag = T1 n = 2 alpha = 0.5 modulus { family = constant } }");  // T1 needs p
    bad("scenario \"a\" { tag = balance alpha = 0.5 ");
    bad("scenario \"a\" { tag = B alpha = 0.5 modulus { family = nope } }");
    bad("scenario \"a\" { tag = balance alpha = 1.5 }");
    bad("scenario \"a\" { tag = balance alpha = 0.5 }\nscenario \"a\" { tag = balance alpha = 0.5 }");
    bad("scenario \"a\" { tag = P-lq q = 2 radii = [0.5, 0.9] }");
    bad("seed = -3\n");
    try {
        parse_config("suite = \"x\"\n\nwhatever = 2\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("shipped config files match the built-in suites") {
    const std::filesystem::path dir = OUTERLAB_CONFIG_DIR;
    CHECK(suite_to_config(load_config(dir / "default.conf")) == suite_to_config(builtin_suite("default")));
    CHECK(suite_to_config(load_config(dir / "negative-control.conf")) ==
          suite_to_config(builtin_suite("negative-control")));
    CHECK_THROWS_AS(builtin_suite("nope"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.conf"), ConfigError);
}

TEST_CASE("scenario seeds") {
    auto cfg = parse_config(kSmall);
    CHECK(scenario_seed(cfg.scenarios[0], 7) == scenario_seed(cfg.scenarios[0], 7));
    CHECK(scenario_seed(cfg.scenarios[0], 7) != scenario_seed(cfg.scenarios[1], 7));
    CHECK(scenario_seed(cfg.scenarios[0], 7) != scenario_seed(cfg.scenarios[0], 8));
    cfg.scenarios[0].seed = 5;
    CHECK(scenario_seed(cfg.scenarios[0], 7) == 5);
}

TEST_CASE("small suite: verdicts, determinism across threads, report echo") {
    const auto cfg = parse_config(kSmall);
    const auto one = run_suite(cfg, {1});
    const auto three = run_suite(cfg, {3});
    CHECK(summary_csv(one.reports) == summary_csv(three.reports));
    CHECK(one.exit_code == 0);
    for (const auto& r : one.reports) CHECK(r.verdict == "consistent");
    CHECK(one.reports[0].measured == 0.25);
    CHECK(one.reports[1].measured == doctest::Approx(2.0).epsilon(0.05));
    CHECK(one.reports[2].measured > 0.25 - 0.03);

    const auto j = report_json(one.reports[2]);
    const auto again = parse_config(j["config"].get<std::string>());
    REQUIRE(again.scenarios.size() == 1);
    const auto rerun = run_scenario(again.scenarios[0], *again.scenarios[0].seed);
    CHECK(format_number(rerun.measured) == format_number(one.reports[2].measured));
    CHECK(j["versions"].contains("outerlab"));
    CHECK(j["profile"].size() == 5);

    const auto dir = std::filesystem::temp_directory_path() / "outerlab_test_reports";
    std::filesystem::remove_all(dir);
    write_reports(one.reports, dir);
    CHECK(slurp(dir / "summary.csv") == summary_csv(one.reports));
    CHECK(std::filesystem::exists(dir / "b-short.json"));
}

TEST_CASE("csv formatting") {
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(std::nan("")).empty());
    Report r;
    r.scenario.name = "a,b";
    r.scenario.tag = "B";
    r.verdict = "inconclusive";
    CHECK(summary_csv({r}) == "scenario,theorem,predicted,measured,halfwidth,verdict\n\"a,b\",B,,,,inconclusive\n");
}

TEST_CASE("published examples: B and T2 scenarios are consistent") {
    const auto cfg = builtin_suite("default");
    for (const auto& s : cfg.scenarios) {
        if (s.name != "B-disc-power" && s.name != "T2-ball-power") continue;
        const auto r = run_scenario(s, scenario_seed(s, cfg.seed));
        CHECK(r.verdict == "consistent");
        CHECK(r.predicted == 0.25);
        CHECK(r.measured == doctest::Approx(0.5).epsilon(0.1));
    }
}

TEST_CASE("CLI exit codes") {
    const auto neg = run_cli("suite --suite negative-control");
    CHECK(neg.code == 1);
    CHECK(neg.out.find(",violation") != std::string::npos);

    const auto empty = temp_file("empty.conf", "suite = \"empty\"\nseed = 3\n");
    const auto e = run_cli("suite --config " + empty.string());
    CHECK(e.code == 0);
    CHECK(e.out == "scenario,theorem,predicted,measured,halfwidth,verdict\n");

    const auto broken = temp_file("broken.conf", "scenario \"x\" { tag = nope }\n");
    CHECK(run_cli("suite --config " + broken.string()).code == 3);
    CHECK(run_cli("suite --suite nope").code == 3);
    CHECK(run_cli("suite --bogus-flag").code == 3);

    const auto small = temp_file("small.conf", kSmall);
    const auto v = run_cli("verify --config " + small.string() + " --scenario bal --format json");
    CHECK(v.code == 0);
    CHECK(v.out.find("\"verdict\": \"consistent\"") != std::string::npos);

    const auto ev = run_cli("eval --family distance_power --param beta=1 --point 0.3,0");
    CHECK(ev.code == 0);
    CHECK(ev.out.find(",0.7,") != std::string::npos);
}
