#pragma once

// Declarative scenarios, the scenario runner, suites and report serialization.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "outerlab/boundary_data.hpp"
#include "outerlab/kernels.hpp"
#include "outerlab/oscillation.hpp"

namespace outerlab {

/// One verification run. Field names match the config keys (see README).
struct Scenario {
    std::string name;
    std::string tag;  // A B KVM T1 T2 T4-sharpness L2.2-kernel P-lq slice-B0 balance
    std::size_t n = 1;
    FamilySpec modulus{"constant", {}, {}};
    double floor = kDefaultFloor;
    std::optional<double> alpha;
    std::optional<double> p;
    std::optional<double> q;          // P-lq
    std::optional<double> eps;        // T4-sharpness: p2 = p/n + eps (diagnostics)
    double delta = 0.05;              // T4-sharpness margin above the predicted exponent
    std::optional<double> predicted;  // overrides the tag's prediction
    std::vector<double> radii;        // empty selects the tag default
    std::size_t samples = 0;          // per ball; 0 selects the adaptive rule
    std::size_t count_cap = 20000;
    std::optional<std::uint64_t> seed;
    double tolerance = 0.03;
    double max_halfwidth = 0.25;
    std::size_t min_scales = 4;
    bool weighted_fit = false;
    std::size_t nodes = 4096;
    std::string evaluator = "auto";  // auto | lift | ball_mc
    std::size_t mc_count = 20000;
    double dilation = 0.99;
    std::vector<int> j_values{1, 2, 3, 4, 5};
    std::vector<double> l_values;    // default {2^-6, 2^-8, 2^-10}
    std::size_t kernel_samples = 10000;
    double stability_factor = 20.0;
    std::size_t directions = 16;
    std::size_t angles = 1024;
    std::size_t norm_samples = 20000;
};

struct SuiteConfig {
    std::string name = "unnamed";
    std::uint64_t seed = 1;
    std::vector<Scenario> scenarios;
};

/// Parses the scenario config format. Unknown keys, malformed values and unknown
/// tags raise ConfigError with the offending line.
SuiteConfig parse_config(std::string_view text);
SuiteConfig load_config(const std::filesystem::path& path);

/// Canonical config text for one scenario; parse_config round-trips it.
std::string scenario_to_config(const Scenario& s, std::uint64_t effective_seed);
std::string suite_to_config(const SuiteConfig& suite);

/// Built-in suites: "default" and "negative-control".
SuiteConfig builtin_suite(std::string_view name);
std::string builtin_suite_text(std::string_view name);

/// Checks that the tag's required parameters are present and admissible.
void validate(const Scenario& s);

/// Seed of a scenario: its own `seed`, else the suite seed mixed with the scenario name.
std::uint64_t scenario_seed(const Scenario& s, std::uint64_t suite_seed);

struct Report {
    Scenario scenario;
    std::uint64_t seed = 0;
    std::string verdict;  // consistent | violation | inconclusive | error
    double predicted = std::numeric_limits<double>::quiet_NaN();
    double measured = std::numeric_limits<double>::quiet_NaN();
    double halfwidth = std::numeric_limits<double>::quiet_NaN();
    std::optional<ProfileFit> fit;
    std::vector<OscillationEstimate> profile;
    nlohmann::json diagnostics = nlohmann::json::object();
    std::string error;
    double wall_seconds = 0.0;
};

struct RunOptions {
    std::size_t threads = 1;
};

/// Runs one scenario. Module errors are reported as verdict "error" with the message;
/// the scenario is validated first (ConfigError propagates).
Report run_scenario(const Scenario& s, std::uint64_t seed, RunOptions options = {});

struct SuiteResult {
    std::vector<Report> reports;  // scenario order
    int exit_code = 0;            // 0 no violation or error, 1 violation, 2 error
};

/// Runs every scenario (in parallel across scenarios); reports keep config order.
SuiteResult run_suite(const SuiteConfig& suite, RunOptions options = {});

/// CSV summary: scenario,theorem,predicted,measured,halfwidth,verdict with 12
/// significant digits; NaN fields are left empty.
std::string summary_csv(const std::vector<Report>& reports);

nlohmann::json report_json(const Report& r);

/// Writes summary.csv and one <scenario>.json per report into dir.
void write_reports(const std::vector<Report>& reports, const std::filesystem::path& dir);

/// Fixed 12-significant-digit formatting used by every CSV writer.
std::string format_number(double v);

}  // namespace outerlab
