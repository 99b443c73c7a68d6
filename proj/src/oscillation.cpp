#include "outerlab/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "outerlab/errors.hpp"
#include "outerlab/parallel.hpp"
#include "outerlab/simd/batch.hpp"

namespace outerlab {

namespace {

constexpr std::size_t kMaxIterations = 500;
constexpr double kTolerance = 1e-10;

double median_of(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}


// Damped Newton on the smooth L1 objective, used when Weiszfeld stalls in a
// nearly flat valley (near-collinear samples). Returns true once a step falls
// below tol; p is only ever moved to points with a lower objective.
bool newton_polish(std::span<const cplx> values, cplx& p, double tol, double eps) {
    auto objective = [&](cplx a) {
        double s = 0.0;
        for (const auto& v : values) s += std::abs(v - a);
        return s;
    };
    double f = objective(p);
    for (int it = 0; it < 100; ++it) {
        double gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
        for (const auto& v : values) {
            const cplx d = p - v;
            const double r = std::abs(d);
            if (r <= eps) return false;  // on a data point: the Hessian is undefined
            const double ux = d.real() / r, uy = d.imag() / r;
            gx += ux;
            gy += uy;
            hxx += (1.0 - ux * ux) / r;
            hxy -= ux * uy / r;
            hyy += (1.0 - uy * uy) / r;
        }
        const double reg = 1e-12 * (hxx + hyy);
        hxx += reg;
        hyy += reg;
        const double det = hxx * hyy - hxy * hxy;
        if (!(det > 0.0)) return false;
        cplx step{-(hyy * gx - hxy * gy) / det, -(hxx * gy - hxy * gx) / det};
        bool moved = false;
        for (int k = 0; k < 60; ++k) {
            const double fn = objective(p + step);
            if (fn <= f) {
                p += step;
                f = fn;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved || std::abs(step) <= tol) return true;
    }
    return false;
}

}  // namespace

double l1_objective(std::span<const cplx> values, cplx a) {
    if (values.empty()) return 0.0;
    std::vector<double> re(values.size()), im(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        re[i] = values[i].real();
        im[i] = values[i].imag();
    }
    return simd::abs_dev_sum(re, im, a) / static_cast<double>(values.size());
}

OscillationEstimate mean_oscillation(std::span<const cplx> values, std::size_t min_samples) {
    if (values.size() < std::max<std::size_t>(min_samples, 1))
        throw DomainError("mean_oscillation: need at least " + std::to_string(min_samples) + " samples");
    const std::size_t count = values.size();
    const double nn = static_cast<double>(count);
    std::vector<double> re(count), im(count);
    cplx mean{0.0, 0.0};
    for (std::size_t i = 0; i < count; ++i) {
        re[i] = values[i].real();
        im[i] = values[i].imag();
        mean += values[i];
    }
    mean /= nn;
    double spread = 0.0;
    for (const auto& v : values) spread = std::max(spread, std::abs(v - mean));

    OscillationEstimate est;
    est.sample_count = count;
    if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) {
        est.pivot = mean;
        est.nu = simd::abs_dev_sum(re, im, mean) / nn;
        return est;
    }

    auto objective = [&](cplx a) { return simd::abs_dev_sum(re, im, a) / nn; };
    const double eps = 1e-14 * spread;
    // Subgradient test at a data point x of multiplicity m: optimal iff |sum (x_i - x)/|x_i - x|| <= m.
    auto vertex_optimal = [&](cplx x) {
        const simd::WeiszfeldSums s = simd::weiszfeld_sums(re, im, x, eps);
        return std::abs(cplx{s.num_re, s.num_im} - x * s.den) <= static_cast<double>(s.coincident);
    };
    // Weiszfeld slows to a crawl when the median sits on a data point; test the nearest one now and then.
    auto nearest_value = [&](cplx a) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < count; ++i)
            if (std::abs(values[i] - a) < std::abs(values[best] - a)) best = i;
        return values[best];
    };
    cplx p = mean;
    bool converged = false;
    std::size_t it = 0;
    for (; it < kMaxIterations; ++it) {
        if (it % 25 == 24) {
            const cplx x = nearest_value(p);
            if (vertex_optimal(x)) {
                p = x;
                converged = true;
                break;
            }
        }
        const simd::WeiszfeldSums s = simd::weiszfeld_sums(re, im, p, eps);
        cplx next;
        if (s.den == 0.0) {
            converged = true;  // every value coincides with p
            break;
        }
        const cplx t{s.num_re / s.den, s.num_im / s.den};
        if (s.coincident == 0) {
            next = t;
        } else {
            // p sits on a data point of multiplicity m: optimal iff the pull of the
            // remaining points is at most m (subgradient condition), otherwise take the
            // modified step that moves off the point along the descent direction.
            const cplx pull = t * s.den - p * s.den;
            const double r = std::abs(pull);
            const double m = static_cast<double>(s.coincident);
            if (r <= m) {
                converged = true;
                break;
            }
            const double keep = m / r;
            next = (1.0 - keep) * t + keep * p;
        }
        const double step = std::abs(next - p);
        p = next;
        if (step <= kTolerance * spread) {
            converged = true;
            ++it;
            break;
        }
    }
    est.iterations = it;
    if (!converged) converged = newton_polish(values, p, kTolerance * spread, eps);
    if (!converged) {
        std::vector<double> cre(re), cim(im);
        const cplx med{median_of(std::move(cre)), median_of(std::move(cim))};
        cplx best = p;
        for (const cplx c : {med, mean})
            if (objective(c) < objective(best)) best = c;
        p = best;
        est.fallback = true;
    }
    if (objective(mean) < objective(p)) p = mean;
    est.pivot = p;
    est.nu = objective(p);
    double sq = 0.0;
    for (const auto& v : values) {
        const double d = std::abs(v - p) - est.nu;
        sq += d * d;
    }
    est.standard_error = count > 1 ? std::sqrt(sq / (nn - 1.0) / nn) : 0.0;
    return est;
}

std::size_t profile_sample_count(double radius, std::size_t n, const ProfileOptions& options) {
    if (options.count > 0) return options.count;
    const double want = 50.0 / std::pow(radius, static_cast<double>(n) / 2.0);
    const double capped = std::min(want, static_cast<double>(options.count_cap));
    return std::max<std::size_t>(1000, static_cast<std::size_t>(std::ceil(capped)));
}

std::vector<OscillationEstimate> oscillation_profile(const std::function<cplx(const SpherePoint&)>& f,
                                                     const SpherePoint& center, std::span<const double> radii,
                                                     const SeededSampler& sampler, ProfileOptions options) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0 && radii[i] <= 2.0)) throw DomainError("oscillation_profile: radii must lie in (0, 2]");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw DomainError("oscillation_profile: radii must strictly decrease");
    }
    std::vector<OscillationEstimate> out(radii.size());
    parallel_for(radii.size(), options.threads, [&](std::size_t i) {
        auto sub = sampler.substream(i);
        const NonisotropicBall q(center, radii[i]);
        const std::size_t count = profile_sample_count(radii[i], center.dimension(), options);
        const auto pts = sample_ball(q, count, sub).points;
        std::vector<cplx> vals(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = f(pts[k]);
        out[i] = mean_oscillation(vals);
        out[i].ball = q;
    });
    return out;
}

ProfileFit fit_exponent(std::span<const OscillationEstimate> profile, FitOptions options) {
    ProfileFit res;
    std::vector<double> x, y, w;
    for (const auto& e : profile) {
        if (!e.ball) throw DomainError("fit_exponent: estimate without a ball");
        const double r = e.ball->radius;
        if (!(e.nu > 0.0)) {
            res.dropped_zero.push_back(r);
            continue;
        }
        if (e.standard_error > options.noise_ratio * e.nu) {
            res.dropped_noise.push_back(r);
            continue;
        }
        x.push_back(r);
        y.push_back(e.nu);
        const double rel = e.standard_error / e.nu;
        w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1e12);
    }
    if (x.size() < options.min_scales)
        throw DomainError("fit_exponent: only " + std::to_string(x.size()) + " usable scales (need " +
                          std::to_string(options.min_scales) + ")");
    res.fit = options.weighted ? fit_power_law_weighted(x, y, w, options.min_scales)
                               : fit_power_law(x, y, options.min_scales);
    return res;
}

BalanceResult balance_exponents(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("balance_exponents: alpha must lie in (0, 1)");
    const double k = 2.0 / alpha - 1.0;
    auto gap = [&](double g) { return g - (1.0 - g * k); };
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    BalanceResult b;
    b.gamma = alpha / 2.0;
    b.gamma_bisection = 0.5 * (lo + hi);
    b.regime_small = std::min(alpha, b.gamma);
    b.regime_large = std::min(alpha, 1.0 - b.gamma * k);
    return b;
}

double theorem1_exponent(double alpha, double p, std::size_t n) {
    if (!(p > 1.0)) throw DomainError("theorem1_exponent: p must exceed 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("theorem1_exponent: alpha must lie in (0, 1)");
    if (n == 0) throw DomainError("theorem1_exponent: n must be >= 1");
    const double nd = static_cast<double>(n);
    const double direct = alpha * p / (p + nd);
    if (std::isinf(p)) return alpha;
    const double q = p / (p - 1.0);
    const double other = alpha / (nd + 1.0 - nd / q);
    if (std::abs(direct - other) > 1e-12 * std::max(1.0, std::abs(direct)))
        throw NumericalError("theorem1_exponent: the two exponent formulas disagree");
    return direct;
}

double kvm_exponent(double alpha, double p) {
    if (!(p > 1.0)) throw DomainError("kvm_exponent: p must exceed 1");
    const double q = p / (p - 1.0);
    return alpha / (2.0 - 1.0 / q);
}

P1Result p1_check(double p, std::size_t n, double eps) {
    if (n < 2) throw DomainError("p1_check: n must be >= 2");
    const double nd = static_cast<double>(n);
    if (!(p > nd)) throw DomainError("p1_check: p must exceed n");
    if (!(eps > 0.0)) throw DomainError("p1_check: eps must be positive");
    const double inv_q = 1.0 + 1.0 / p - 1.0 / (p / nd + eps);
    if (!(inv_q > 0.0) || !std::isfinite(inv_q)) throw DomainError("p1_check: q is undefined or nonpositive");
    P1Result r;
    r.q = 1.0 / inv_q;
    r.p1_definition = (nd - 2.0) - p * (r.q - 1.0) / r.q;
    r.p1_closed_form = nd * nd * eps / (p + nd * eps) - 1.0;
    if (std::abs(r.p1_definition - r.p1_closed_form) > 1e-12 * std::max(1.0, std::abs(r.p1_closed_form)))
        throw NumericalError("p1_check: definition and closed form disagree");
    if (!(r.p1_closed_form > -1.0)) throw NumericalError("p1_check: p1 <= -1");
    return r;
}

}  // namespace outerlab
