#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "outerlab/errors.hpp"
#include "outerlab/experiments.hpp"

namespace outerlab {

namespace {

struct Token {
    enum Kind { ident, number, string, punct, end } kind;
    std::string text;
    int line;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
        } else if (c == '"') {
            const std::size_t start = ++i;
            while (i < src.size() && src[i] != '"' && src[i] != '\n') ++i;
            if (i >= src.size() || src[i] != '"') throw ConfigError("line " + std::to_string(line) + ": unterminated string");
            out.push_back({Token::string, std::string(src.substr(start, i - start)), line});
            ++i;
        } else if (std::string_view("{}[](),=").find(c) != std::string_view::npos) {
            out.push_back({Token::punct, std::string(1, c), line});
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            const std::size_t start = i;
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '.' ||
                                      src[i] == '-' || src[i] == '+'))
                ++i;
            out.push_back({Token::number, std::string(src.substr(start, i - start)), line});
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = i;
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' ||
                                      src[i] == '-' || src[i] == '.'))
                ++i;
            out.push_back({Token::ident, std::string(src.substr(start, i - start)), line});
        } else {
            throw ConfigError("line " + std::to_string(line) + ": unexpected character '" + std::string(1, c) + "'");
        }
    }
    out.push_back({Token::end, "", line});
    return out;
}

struct Value {
    std::vector<std::string> items;  // scalars as text; lists expanded
    bool list = false;
    bool quoted = false;
    int line = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

    SuiteConfig parse() {
        SuiteConfig cfg;
        std::set<std::string> seen;
        while (peek().kind != Token::end) {
            const Token key = expect_ident();
            if (key.text == "scenario") {
                cfg.scenarios.push_back(parse_scenario());
                continue;
            }
            if (!seen.insert(key.text).second) fail(key.line, "duplicate key '" + key.text + "'");
            expect_punct("=");
            const Value v = parse_value();
            if (key.text == "suite") {
                cfg.name = scalar(v, key);
            } else if (key.text == "seed") {
                cfg.seed = to_u64(scalar(v, key), key.line);
            } else {
                fail(key.line, "unknown top-level key '" + key.text + "'");
            }
        }
        for (std::size_t i = 0; i < cfg.scenarios.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (cfg.scenarios[i].name == cfg.scenarios[j].name)
                    throw ConfigError("duplicate scenario name '" + cfg.scenarios[i].name + "'");
        return cfg;
    }

private:
    [[noreturn]] static void fail(int line, const std::string& msg) {
        throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }

    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    Token expect_ident() {
        Token t = next();
        if (t.kind != Token::ident) fail(t.line, "expected a key, found '" + t.text + "'");
        return t;
    }
    void expect_punct(const char* p) {
        Token t = next();
        if (t.kind != Token::punct || t.text != p)
            fail(t.line, std::string("expected '") + p + "', found '" + t.text + "'");
    }

    static double to_double(const std::string& s, int line) {
        double v = 0.0;
        const char* b = s.data();
        const char* e = b + s.size();
        if (!s.empty() && *b == '+') ++b;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e) fail(line, "expected a number, found '" + s + "'");
        return v;
    }
    static std::uint64_t to_u64(const std::string& s, int line) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "expected a nonnegative integer, found '" + s + "'");
        return v;
    }
    static std::size_t to_size(const std::string& s, int line) { return static_cast<std::size_t>(to_u64(s, line)); }
    static int to_int(const std::string& s, int line) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "expected an integer, found '" + s + "'");
        return v;
    }

    static const std::string& scalar(const Value& v, const Token& key) {
        if (v.list || v.items.size() != 1) fail(key.line, "key '" + key.text + "' expects a single value");
        return v.items.front();
    }

    Value parse_value() {
        Value v;
        Token t = next();
        v.line = t.line;
        if (t.kind == Token::punct && t.text == "[") {
            v.list = true;
            if (peek().kind == Token::punct && peek().text == "]") {
                next();
                return v;
            }
            for (;;) {
                Token item = next();
                if (item.kind != Token::number && item.kind != Token::ident && item.kind != Token::string)
                    fail(item.line, "bad list element '" + item.text + "'");
                v.items.push_back(item.text);
                Token sep = next();
                if (sep.kind == Token::punct && sep.text == "]") break;
                if (sep.kind != Token::punct || sep.text != ",") fail(sep.line, "expected ',' or ']' in list");
            }
            return v;
        }
        if (t.kind == Token::ident && t.text == "dyadic") {
            expect_punct("(");
            const int a = to_int(next().text, t.line);
            expect_punct(",");
            const int b = to_int(next().text, t.line);
            expect_punct(")");
            if (b < a) fail(t.line, "dyadic(a, b) needs a <= b");
            v.list = true;
            for (int k = a; k <= b; ++k) {
                char buf[64];
                auto r = std::to_chars(buf, buf + sizeof buf, std::ldexp(1.0, -k));
                v.items.emplace_back(buf, r.ptr);
            }
            return v;
        }
        if (t.kind != Token::number && t.kind != Token::ident && t.kind != Token::string)
            fail(t.line, "expected a value, found '" + t.text + "'");
        v.quoted = t.kind == Token::string;
        v.items.push_back(t.text);
        return v;
    }

    std::vector<double> doubles(const Value& v) {
        std::vector<double> out;
        for (const auto& s : v.items) out.push_back(to_double(s, v.line));
        return out;
    }

    FamilySpec parse_modulus() {
        FamilySpec m{"", {}, {}};
        std::set<std::string> seen;
        expect_punct("{");
        while (!(peek().kind == Token::punct && peek().text == "}")) {
            const Token key = expect_ident();
            if (!seen.insert(key.text).second) fail(key.line, "duplicate modulus key '" + key.text + "'");
            expect_punct("=");
            const Value v = parse_value();
            if (key.text == "family") {
                m.family = scalar(v, key);
            } else if (key.text == "base") {
                m.base = scalar(v, key);
            } else {
                m.params[key.text] = to_double(scalar(v, key), key.line);
            }
        }
        expect_punct("}");
        if (m.family.empty()) fail(peek().line, "modulus block needs a family");
        return m;
    }

    Scenario parse_scenario() {
        Token name = next();
        if (name.kind != Token::string && name.kind != Token::ident) fail(name.line, "scenario needs a name");
        Scenario s;
        s.name = name.text;
        std::set<std::string> seen;
        expect_punct("{");
        while (!(peek().kind == Token::punct && peek().text == "}")) {
            const Token key = expect_ident();
            if (!seen.insert(key.text).second) fail(key.line, "duplicate scenario key '" + key.text + "'");
            if (key.text == "modulus") {
                s.modulus = parse_modulus();
                continue;
            }
            expect_punct("=");
            const Value v = parse_value();
            const std::string& k = key.text;
            auto num = [&] { return to_double(scalar(v, key), key.line); };
            auto cnt = [&] { return to_size(scalar(v, key), key.line); };
            if (k == "tag") s.tag = scalar(v, key);
            else if (k == "n") s.n = cnt();
            else if (k == "floor") s.floor = num();
            else if (k == "alpha") s.alpha = num();
            else if (k == "p") s.p = num();
            else if (k == "q") s.q = num();
            else if (k == "eps") s.eps = num();
            else if (k == "delta") s.delta = num();
            else if (k == "predicted") s.predicted = num();
            else if (k == "radii") s.radii = doubles(v);
            else if (k == "samples") s.samples = cnt();
            else if (k == "count_cap") s.count_cap = cnt();
            else if (k == "seed") s.seed = to_u64(scalar(v, key), key.line);
            else if (k == "tolerance") s.tolerance = num();
            else if (k == "max_halfwidth") s.max_halfwidth = num();
            else if (k == "min_scales") s.min_scales = cnt();
            else if (k == "fit") {
                const std::string& f = scalar(v, key);
                if (f != "ols" && f != "weighted") fail(key.line, "fit must be 'ols' or 'weighted'");
                s.weighted_fit = f == "weighted";
            } else if (k == "nodes") s.nodes = cnt();
            else if (k == "evaluator") s.evaluator = scalar(v, key);
            else if (k == "mc_count") s.mc_count = cnt();
            else if (k == "dilation") s.dilation = num();
            else if (k == "j") {
                s.j_values.clear();
                for (const auto& it : v.items) s.j_values.push_back(to_int(it, v.line));
            } else if (k == "l") s.l_values = doubles(v);
            else if (k == "kernel_samples") s.kernel_samples = cnt();
            else if (k == "stability_factor") s.stability_factor = num();
            else if (k == "directions") s.directions = cnt();
            else if (k == "angles") s.angles = cnt();
            else if (k == "norm_samples") s.norm_samples = cnt();
            else fail(key.line, "unknown scenario key '" + k + "'");
        }
        expect_punct("}");
        try {
            validate(s);
        } catch (const ConfigError& e) {
            fail(name.line, "scenario '" + s.name + "': " + e.what());
        }
        return s;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string num_text(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string list_text(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num_text(v[i]);
    return out + "]";
}

}  // namespace

SuiteConfig parse_config(std::string_view text) { return Parser(text).parse(); }

SuiteConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string scenario_to_config(const Scenario& s, std::uint64_t effective_seed) {
    std::ostringstream o;
    o << "scenario \"" << s.name << "\" {\n";
    o << "  tag = " << s.tag << "\n";
    o << "  n = " << s.n << "\n";
    o << "  seed = " << effective_seed << "\n";
    o << "  floor = " << num_text(s.floor) << "\n";
    if (s.alpha) o << "  alpha = " << num_text(*s.alpha) << "\n";
    if (s.p) o << "  p = " << num_text(*s.p) << "\n";
    if (s.q) o << "  q = " << num_text(*s.q) << "\n";
    if (s.eps) o << "  eps = " << num_text(*s.eps) << "\n";
    if (s.predicted) o << "  predicted = " << num_text(*s.predicted) << "\n";
    o << "  delta = " << num_text(s.delta) << "\n";
    if (!s.radii.empty()) o << "  radii = " << list_text(s.radii) << "\n";
    o << "  samples = " << s.samples << "\n";
    o << "  count_cap = " << s.count_cap << "\n";
    o << "  tolerance = " << num_text(s.tolerance) << "\n";
    o << "  max_halfwidth = " << num_text(s.max_halfwidth) << "\n";
    o << "  min_scales = " << s.min_scales << "\n";
    o << "  fit = " << (s.weighted_fit ? "weighted" : "ols") << "\n";
    o << "  nodes = " << s.nodes << "\n";
    o << "  evaluator = " << s.evaluator << "\n";
    o << "  mc_count = " << s.mc_count << "\n";
    o << "  dilation = " << num_text(s.dilation) << "\n";
    o << "  j = [";
    for (std::size_t i = 0; i < s.j_values.size(); ++i) o << (i ? ", " : "") << s.j_values[i];
    o << "]\n";
    if (!s.l_values.empty()) o << "  l = " << list_text(s.l_values) << "\n";
    o << "  kernel_samples = " << s.kernel_samples << "\n";
    o << "  stability_factor = " << num_text(s.stability_factor) << "\n";
    o << "  directions = " << s.directions << "\n";
    o << "  angles = " << s.angles << "\n";
    o << "  norm_samples = " << s.norm_samples << "\n";
    o << "  modulus {\n    family = " << s.modulus.family << "\n";
    if (!s.modulus.base.empty()) o << "    base = " << s.modulus.base << "\n";
    for (const auto& [k, v] : s.modulus.params) o << "    " << k << " = " << num_text(v) << "\n";
    o << "  }\n}\n";
    return o.str();
}

std::string suite_to_config(const SuiteConfig& suite) {
    std::string out = "suite = \"" + suite.name + "\"\nseed = " + std::to_string(suite.seed) + "\n\n";
    for (const auto& s : suite.scenarios) out += scenario_to_config(s, scenario_seed(s, suite.seed)) + "\n";
    return out;
}

}  // namespace outerlab
