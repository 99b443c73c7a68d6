#include <charconv>
#include <cmath>
#include <fstream>

#include "outerlab/errors.hpp"
#include "outerlab/experiments.hpp"
#include "outerlab/simd/batch.hpp"
#include "outerlab/version.hpp"

namespace outerlab {

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, r.ptr);
}

std::string summary_csv(const std::vector<Report>& reports) {
    std::string out = "scenario,theorem,predicted,measured,halfwidth,verdict\n";
    for (const auto& r : reports) {
        out += csv_field(r.scenario.name) + "," + csv_field(r.scenario.tag) + "," + format_number(r.predicted) + "," +
               format_number(r.measured) + "," + format_number(r.halfwidth) + "," + r.verdict + "\n";
    }
    return out;
}

nlohmann::json report_json(const Report& r) {
    nlohmann::json j;
    j["scenario"] = r.scenario.name;
    j["theorem"] = r.scenario.tag;
    j["seed"] = r.seed;
    j["config"] = scenario_to_config(r.scenario, r.seed);
    j["predicted"] = number_or_null(r.predicted);
    j["measured"] = number_or_null(r.measured);
    j["halfwidth"] = number_or_null(r.halfwidth);
    j["verdict"] = r.verdict;
    if (!r.error.empty()) j["error"] = r.error;
    if (r.fit) {
        const auto& f = r.fit->fit;
        j["fit"] = {{"slope", f.slope},         {"intercept", f.intercept}, {"r_squared", f.r_squared},
                    {"radii", f.radii},         {"nu_values", f.nu_values}, {"confidence_halfwidth", f.confidence_halfwidth}};
    }
    nlohmann::json prof = nlohmann::json::array();
    for (const auto& e : r.profile) {
        prof.push_back({{"radius", e.ball ? e.ball->radius : 0.0},
                        {"nu", e.nu},
                        {"pivot", {e.pivot.real(), e.pivot.imag()}},
                        {"samples", e.sample_count},
                        {"standard_error", e.standard_error},
                        {"fallback", e.fallback}});
    }
    j["profile"] = prof;
    j["diagnostics"] = r.diagnostics;
    j["wall_seconds"] = r.wall_seconds;
    j["versions"] = {{"outerlab", kVersion},
                     {"compiler", __VERSION__},
                     {"simd", simd::backend_name(simd::active_backend())}};
    if (r.scenario.tag == "T1" || r.scenario.tag == "T2" || r.scenario.tag == "A" || r.scenario.tag == "B" ||
        r.scenario.tag == "KVM" || r.scenario.tag == "T4-sharpness")
        j["reading"] = "fitted slope >= predicted exponent is read as the bound holding asymptotically";
    return j;
}

void write_reports(const std::vector<Report>& reports, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "summary.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / "summary.csv").string());
        out << summary_csv(reports);
    }
    for (const auto& r : reports) {
        std::string file;
        for (char c : r.scenario.name) file += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
        std::ofstream out(dir / (file + ".json"), std::ios::binary);
        if (!out) throw Error("cannot write report for " + r.scenario.name);
        out << report_json(r).dump(2) << "\n";
    }
}

}  // namespace outerlab
