#include "outerlab/boundary_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "outerlab/errors.hpp"
#include "outerlab/outer_eval.hpp"

namespace outerlab {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double t) {
    t = std::remainder(t, 2.0 * kPi);
    return t == -kPi ? kPi : t;
}

double chord(double theta) { return 2.0 * std::abs(std::sin(theta / 2.0)); }

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double param(const FamilySpec& spec, const std::string& key, std::optional<double> fallback = std::nullopt) {
    auto it = spec.params.find(key);
    if (it != spec.params.end()) return it->second;
    if (fallback) return *fallback;
    throw ConfigError("modulus family '" + spec.family + "' requires parameter '" + key + "'");
}

void allow_only(const FamilySpec& spec, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : spec.params) {
        (void)v;
        bool ok = false;
        for (const char* a : keys) ok = ok || k == a;
        if (!ok) throw ConfigError("modulus family '" + spec.family + "': unknown parameter '" + k + "'");
    }
}

}  // namespace

ModulusProfile::ModulusProfile(std::size_t n, double floor, FamilySpec descriptor, SphereFn raw, AngleFn angular,
                               std::vector<double> breakpoints)
    : state_(std::make_shared<State>()) {
    if (n == 0) throw DomainError("ModulusProfile: dimension must be >= 1");
    if (!(floor > 0.0)) throw DomainError("ModulusProfile: floor must be positive");
    if (!raw && !angular) throw DomainError("ModulusProfile: no evaluator");
    if (angular && n != 1) throw DomainError("ModulusProfile: angular evaluator requires n = 1");
    if (!raw) raw = [angular](const SpherePoint& z) { return angular(std::arg(z[0])); };
    state_->n = n;
    state_->floor = floor;
    state_->descriptor = std::move(descriptor);
    state_->raw = std::move(raw);
    state_->angular = std::move(angular);
    std::sort(breakpoints.begin(), breakpoints.end());
    state_->breakpoints = std::move(breakpoints);
}

double ModulusProfile::clamp(double raw, bool* clamped) const {
    const bool hit = !(raw > state_->floor);
    if (hit) state_->clamps.fetch_add(1, std::memory_order_relaxed);
    if (clamped) *clamped = hit;
    return hit ? state_->floor : raw;
}

double ModulusProfile::evaluate(const SpherePoint& zeta, bool* clamped) const {
    if (zeta.dimension() != state_->n) throw DomainError("ModulusProfile: dimension mismatch");
    return clamp(state_->raw(zeta), clamped);
}

double ModulusProfile::log_at(const SpherePoint& zeta, bool* clamped) const {
    return std::log(evaluate(zeta, clamped));
}

double ModulusProfile::at_angle(double theta, bool* clamped) const {
    if (state_->n != 1) throw DomainError("ModulusProfile::at_angle requires n = 1");
    if (state_->angular) return clamp(state_->angular(theta), clamped);
    return evaluate(SpherePoint::on_circle(theta), clamped);
}

double ModulusProfile::log_at_angle(double theta, bool* clamped) const {
    return std::log(at_angle(theta, clamped));
}

ModulusProfile make_modulus(const FamilySpec& spec, std::size_t n, double floor) {
    if (n == 0) throw ConfigError("make_modulus: dimension must be >= 1");
    if (!(floor > 0.0 && floor < 1.0)) throw ConfigError("make_modulus: floor must lie in (0, 1)");
    const std::string& fam = spec.family;

    if (fam == "constant") {
        allow_only(spec, {"c"});
        const double c = param(spec, "c", 1.0);
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("constant: c must be positive");
        if (n == 1) return ModulusProfile(1, floor, spec, {}, [c](double) { return c; });
        return ModulusProfile(n, floor, spec, [c](const SpherePoint&) { return c; });
    }
    if (fam == "distance_power" || fam == "holder_cusp") {
        const bool cusp = fam == "holder_cusp";
        const char* key = cusp ? "alpha" : "beta";
        allow_only(spec, {key});
        const double e = param(spec, key);
        if (cusp && !(e > 0.0 && e < 1.0)) throw ConfigError("holder_cusp: alpha must lie in (0, 1)");
        if (!cusp && !(e > 0.0 && std::isfinite(e))) throw ConfigError("distance_power: beta must be positive");
        auto shape = [e, cusp](double d) {
            const double v = std::pow(d, e);
            return cusp ? std::min(1.0, v) : v;
        };
        if (n == 1) {
            std::vector<double> bp{0.0};
            if (cusp) bp.insert(bp.end(), {-kPi / 3.0, kPi / 3.0});
            return ModulusProfile(1, floor, spec, {}, [shape](double t) { return shape(chord(t)); }, bp);
        }
        return ModulusProfile(n, floor, spec, [shape](const SpherePoint& z) { return shape(std::abs(1.0 - z[0])); });
    }
    if (fam == "log_spike") {
        if (n != 1) throw ConfigError("log_spike is one-dimensional; use lifted_1d with base log_spike for n >= 2");
        allow_only(spec, {"gamma", "join_inner", "join_outer"});
        const double gamma = param(spec, "gamma");
        const double a = param(spec, "join_inner", kPi / 4.0);
        const double b = param(spec, "join_outer", kPi / 2.0);
        if (!(gamma > 0.0)) throw ConfigError("log_spike: gamma must be positive");
        if (!(a > 0.0 && a < b && b <= kPi)) throw ConfigError("log_spike: need 0 < join_inner < join_outer <= pi");
        const double cap = std::log(1.0 / floor);
        auto psi = [gamma, a, b, cap](double t) {
            const double x = std::abs(wrap_angle(t));
            const double chi = 1.0 - smooth_step((x - a) / (b - a));
            if (chi == 0.0) return 1.0;
            const double s = x > 0.0 ? std::min(std::pow(x, -gamma), cap) : cap;
            return std::exp(-chi * s);
        };
        const double kink = std::pow(cap, -1.0 / gamma);
        std::vector<double> bp{0.0};
        if (kink < a) bp.insert(bp.end(), {-kink, kink});
        return ModulusProfile(1, floor, spec, {}, psi, bp);
    }
    if (fam == "lifted_1d") {
        if (n < 2) throw ConfigError("lifted_1d requires n >= 2");
        if (spec.base.empty() || spec.base == "lifted_1d") throw ConfigError("lifted_1d: base must name a 1-D family");
        FamilySpec base_spec{spec.base, spec.params, {}};
        auto base = std::make_shared<const ModulusProfile>(make_modulus(base_spec, 1, floor));
        auto g = std::make_shared<const DiscOuterEvaluator>(*base);
        ModulusProfile out(n, floor, spec, [g](const SpherePoint& z) { return g->modulus(z[0]); });
        out.state_->base = base;
        out.state_->keep_alive = g;
        return out;
    }
    throw ConfigError("unknown modulus family '" + fam + "'");
}

HolderCertificate holder_constant_at(const ModulusProfile& phi, const SpherePoint& point, double alpha,
                                     std::size_t count, SeededSampler& sampler, std::size_t shells) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("holder_constant_at: alpha must lie in (0, 1)");
    if (shells == 0) throw DomainError("holder_constant_at: need at least one shell");
    const double f0 = phi(point);
    const std::size_t per = std::max<std::size_t>(1, count / shells);
    HolderCertificate cert{point, alpha, 0.0, 0, {}, {}};
    for (std::size_t k = 0; k < shells; ++k) {
        const double outer = std::ldexp(2.0, -static_cast<int>(k));
        const double inner = outer / 2.0;
        auto sub = sampler.substream(k);
        const NonisotropicBall q(point, outer);
        double shell_max = 0.0;
        std::size_t got = 0;
        while (got < per) {
            auto pts = sample_ball(q, per, sub, {CapMethod::automatic}).points;
            for (const auto& t : pts) {
                const double d = niso_distance(t, point);
                if (!(d > inner) || got >= per) continue;
                ++got;
                shell_max = std::max(shell_max, std::abs(phi(t) - f0) / std::pow(d, alpha));
            }
        }
        cert.sample_count += got;
        cert.shell_outer_radius.push_back(std::min(outer, 2.0));
        cert.shell_max.push_back(shell_max);
        cert.c0 = std::max(cert.c0, shell_max);
    }
    return cert;
}

LogNormEstimate log_lp_norm(const ModulusProfile& phi, double p, std::size_t count, SeededSampler& sampler) {
    if (!(p >= 1.0)) throw DomainError("log_lp_norm: p must be >= 1");
    if (count < 2) throw DomainError("log_lp_norm: need at least 2 samples");
    const auto pts = sample_sphere(phi.dimension(), count, sampler);
    double sum = 0.0, sumsq = 0.0, clamp_sum = 0.0;
    for (const auto& z : pts) {
        bool clamped = false;
        const double t = std::pow(std::abs(phi.log_at(z, &clamped)), p);
        sum += t;
        sumsq += t * t;
        if (clamped) clamp_sum += t;
    }
    const double nn = static_cast<double>(count);
    LogNormEstimate est;
    est.samples = count;
    est.value = sum / nn;
    est.standard_error = std::sqrt(std::max(0.0, sumsq / nn - est.value * est.value) / (nn - 1.0));
    est.clamp_fraction = sum > 0.0 ? clamp_sum / sum : 0.0;
    est.clamp_dominated = est.clamp_fraction > 0.01;
    return est;
}

double log_lp_norm_circle(const ModulusProfile& psi, double p, std::size_t nodes) {
    if (!(p >= 1.0)) throw DomainError("log_lp_norm_circle: p must be >= 1");
    if (nodes == 0 || psi.dimension() != 1) throw DomainError("log_lp_norm_circle: need n = 1 and nodes > 0");
    const double h = 2.0 * kPi / static_cast<double>(nodes);
    double s = 0.0;
    for (std::size_t j = 0; j < nodes; ++j)
        s += std::pow(std::abs(psi.log_at_angle(-kPi + (static_cast<double>(j) + 0.5) * h)), p);
    return s / static_cast<double>(nodes);
}

double slice_integral_along(const std::function<cplx(const SpherePoint&)>& f, const SpherePoint& xi,
                            std::size_t angles, double floor, std::uint64_t* clamp_events) {
    if (angles < 4 || (angles & (angles - 1)) != 0) throw DomainError("slice: angle count must be a power of two");
    const double h = 2.0 * kPi / static_cast<double>(angles);
    std::uint64_t clamps = 0;
    auto value = [&](double t) { return std::abs(f(xi.rotated(std::polar(1.0, t)))); };
    double s = 0.0;
    for (std::size_t j = 0; j < angles; ++j) {
        const double t = h * static_cast<double>(j);
        const double v = value(t);
        // Values at the floor come back from exp(log floor) with rounding; treat them as clamped.
        if (v > floor * (1.0 + 1e-9)) {
            s += h * std::abs(std::log(v));
            continue;
        }
        ++clamps;
        for (double off : {-h / 4.0, h / 4.0}) {
            double w = value(t + off);
            if (!(w > floor * (1.0 + 1e-9))) {
                ++clamps;
                w = floor;
            }
            s += 0.5 * h * std::abs(std::log(w));
        }
    }
    if (clamp_events) *clamp_events += clamps;
    return s;
}

SliceReport slice_constant(const std::function<cplx(const SpherePoint&)>& f, std::size_t n, SeededSampler& sampler,
                           SliceOptions options) {
    if (options.directions == 0) throw DomainError("slice_constant: need at least one direction");
    std::vector<SpherePoint> dirs;
    for (std::size_t k = 0; k < n && dirs.size() < options.directions; ++k) {
        std::vector<cplx> e(n, cplx{0.0, 0.0});
        e[k] = 1.0;
        dirs.emplace_back(std::move(e));
    }
    if (dirs.size() < options.directions) {
        auto rest = sample_sphere(n, options.directions - dirs.size(), sampler);
        dirs.insert(dirs.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
    }
    SliceReport rep;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double v = slice_integral_along(f, dirs[d], options.angles, options.floor, &rep.clamp_events);
        rep.per_direction.push_back(v);
        if (d == 0 || v > rep.b0) {
            rep.b0 = v;
            rep.worst_direction = d;
        }
    }
    rep.flagged = rep.clamp_events > 0;
    return rep;
}

}  // namespace outerlab
