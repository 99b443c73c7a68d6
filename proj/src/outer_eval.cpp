#include "outerlab/outer_eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "outerlab/errors.hpp"
#include "outerlab/quadrature.hpp"

namespace outerlab {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double t) {
    t = std::remainder(t, 2.0 * kPi);
    return t == -kPi ? kPi : t;
}

// Kress sigmoidal map of [0, 2pi] onto itself with w^(k)(0) = 0 for k < p.
struct GradedMap {
    double p;
    double v(double t) const {
        const double s = (kPi - t) / kPi;
        return (1.0 / p - 0.5) * s * s * s + (1.0 / p) * (t - kPi) / kPi + 0.5;
    }
    double dv(double t) const {
        const double s = (kPi - t) / kPi;
        return -3.0 * (1.0 / p - 0.5) * s * s / kPi + 1.0 / (p * kPi);
    }
    void eval(double t, double& w, double& dw) const {
        const double a = std::pow(v(t), p);
        const double b = std::pow(v(2.0 * kPi - t), p);
        const double da = p * std::pow(v(t), p - 1.0) * dv(t);
        const double db = -p * std::pow(v(2.0 * kPi - t), p - 1.0) * dv(2.0 * kPi - t);
        w = 2.0 * kPi * a / (a + b);
        dw = 2.0 * kPi * (da * b - a * db) / ((a + b) * (a + b));
    }
};

boost::math::quadrature::tanh_sinh<double>& integrator() {
    thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    return ts;
}

std::uint64_t point_tag(std::span<const cplx> z) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (const auto& c : z) {
        h = mix64(h ^ std::bit_cast<std::uint64_t>(c.real()));
        h = mix64(h ^ std::bit_cast<std::uint64_t>(c.imag()));
    }
    return h;
}

}  // namespace

DiscOuterEvaluator::DiscOuterEvaluator(ModulusProfile psi, DiscOuterOptions options)
    : psi_(std::move(psi)), options_(options) {
    if (psi_.dimension() != 1) throw DomainError("DiscOuterEvaluator: profile must be one-dimensional");
    const std::size_t m = options_.nodes;
    if (m < 256 || (m & (m - 1)) != 0) throw DomainError("DiscOuterEvaluator: node count must be a power of two >= 256");
    if (!(options_.delta_min > 0.0 && options_.delta_min < 0.5)) throw DomainError("DiscOuterEvaluator: bad delta_min");
    if (options_.grading < 1) throw DomainError("DiscOuterEvaluator: grading must be >= 1");

    angles_.resize(m);
    cos_.resize(m);
    sin_.resize(m);
    weighted_log_.resize(m);
    const double h = 2.0 * kPi / static_cast<double>(m);
    const bool graded = !psi_.breakpoints().empty() && options_.grading > 1;
    // Cluster at the deepest breakpoint (the log singularity); kinks elsewhere are mild.
    double anchor = 0.0;
    if (graded) {
        double lowest = INFINITY;
        for (double b : psi_.breakpoints()) {
            const double v = psi_.at_angle(b);
            if (v < lowest || (v == lowest && std::abs(b) < std::abs(anchor))) {
                lowest = v;
                anchor = b;
            }
        }
    }
    std::vector<double> mapped(m);
    const GradedMap map{static_cast<double>(options_.grading)};
    for (std::size_t j = 0; j < m; ++j) {
        const double t = h * static_cast<double>(j);
        double w = t, dw = 1.0;
        if (graded) map.eval(t, w, dw);
        mapped[j] = w;
        const double theta = anchor + w;
        angles_[j] = theta;
        cos_[j] = std::cos(theta);
        sin_[j] = std::sin(theta);
        const double weight = h * dw / (2.0 * kPi);
        weighted_log_[j] = weight > 0.0 ? weight * psi_.log_at_angle(theta) : 0.0;
        if (!std::isfinite(weighted_log_[j])) throw NumericalError("DiscOuterEvaluator: non-finite log psi at a node");
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double next = j + 1 < m ? mapped[j + 1] : 2.0 * kPi;
        max_gap_ = std::max(max_gap_, next - mapped[j]);
    }
}

bool DiscOuterEvaluator::needs_adaptive(cplx z) const {
    return 1.0 - std::abs(z) < options_.adaptive_threshold * max_gap_;
}

cplx DiscOuterEvaluator::exponent_trapezoid(cplx z) const {
    return simd::herglotz_sum(z, cos_, sin_, weighted_log_);
}

cplx DiscOuterEvaluator::exponent_adaptive(cplx z) const {
    return adaptive(std::abs(z), std::arg(z), false);
}

cplx DiscOuterEvaluator::adaptive(double rho, double theta, bool real_only) const {
    const double delta = 1.0 - rho;
    const bool subtract = rho > 0.5;
    const double lref = subtract ? psi_.log_at_angle(theta) : 0.0;

    std::vector<double> cuts{-kPi, 0.0, kPi};
    double nearest = kPi;
    for (double b : psi_.breakpoints()) {
        const double u = wrap_angle(b - theta);
        if (std::abs(u) > 0.0) nearest = std::min(nearest, std::abs(u));
        cuts.push_back(u);
    }
    if (delta > 0.0)
        for (double k : {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0})
            if (k * delta < kPi) cuts.insert(cuts.end(), {-k * delta, k * delta});
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pts;
    for (double c : cuts)
        if (pts.empty() || c - pts.back() > 1e-14) pts.push_back(c);
    if (pts.back() < kPi) pts.back() = kPi;

    // On the circle the conjugate kernel -cot(u/2) multiplies a difference that
    // vanishes at u = 0; freeze u inside a tiny window to avoid cancellation.
    const double eta = delta > 0.0 ? 0.0 : std::max(1e-13, std::min(1e-6, 1e-3 * nearest));
    const double tol = options_.adaptive_tolerance;

    auto diff = [&](double u) { return psi_.log_at_angle(theta + u) - lref; };
    auto denom = [&](double u) {
        const double s = std::sin(u / 2.0);
        return delta * delta + 4.0 * rho * s * s;
    };
    auto re_part = [&](double u) {
        if (delta == 0.0) return 0.0;
        return delta * (2.0 - delta) / denom(u) * diff(u);
    };
    auto im_part = [&](double u) {
        if (std::abs(u) < eta) u = std::copysign(eta, u == 0.0 ? 1.0 : u);
        return -2.0 * rho * std::sin(u) / denom(u) * diff(u);
    };

    auto& ts = integrator();
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (delta > 0.0) re += ts.integrate([&](double u, double) { return re_part(u); }, a, b, tol);
        if (!real_only) im += ts.integrate([&](double u, double) { return im_part(u); }, a, b, tol);
    }
    return {lref + re / (2.0 * kPi), im / (2.0 * kPi)};
}

cplx DiscOuterEvaluator::exponent(cplx z) const {
    const double r = std::abs(z);
    if (!(r <= 1.0 - options_.delta_min))
        throw DomainError("disc_outer: |z| exceeds 1 - delta_min; use boundary_value or closure_value for radial limits");
    return needs_adaptive(z) ? exponent_adaptive(z) : exponent_trapezoid(z);
}

cplx DiscOuterEvaluator::boundary_exponent(double theta) const { return adaptive(1.0, theta, false); }

cplx DiscOuterEvaluator::closure_value(cplx z) const {
    const double r = std::abs(z);
    if (r > 1.0 + 1e-12) throw DomainError("closure_value: point outside the closed disc");
    if (r > 1.0 - options_.delta_min) return boundary_value(std::arg(z));
    return std::exp(exponent(z));
}

double DiscOuterEvaluator::modulus(cplx z) const {
    const double r = std::abs(z);
    if (r > 1.0 + 1e-12) throw DomainError("modulus: point outside the closed disc");
    if (r > 1.0 - options_.delta_min) return psi_.at_angle(std::arg(z));
    if (needs_adaptive(z)) return std::exp(adaptive(r, std::arg(z), true).real());
    return std::exp(exponent_trapezoid(z).real());
}

cplx disc_outer(const DiscOuterEvaluator& ev, cplx z) { return std::exp(ev.exponent(z)); }

BallOuterEvaluator::BallOuterEvaluator(ModulusProfile phi, SeededSampler sampler, BallOuterOptions options)
    : phi_(std::move(phi)), sampler_(std::move(sampler)), options_(options) {
    if (options_.mc_count < 2) throw DomainError("BallOuterEvaluator: mc_count must be >= 2");
    if (!(options_.delta_min > 0.0 && options_.delta_min < 1.0)) throw DomainError("BallOuterEvaluator: bad delta_min");
    if (!(options_.mixture_uniform_weight > 0.0 && options_.mixture_uniform_weight <= 1.0))
        throw DomainError("BallOuterEvaluator: mixture_uniform_weight must lie in (0, 1]");
    if (options_.reuse == SampleReuse::common) {
        auto sub = sampler_.substream(0);
        const auto pts = sample_sphere(phi_.dimension(), options_.mc_count, sub);
        auto soa = std::make_shared<simd::SoaPoints>(phi_.dimension(), pts.size());
        auto logs = std::make_shared<std::vector<double>>(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t k = 0; k < phi_.dimension(); ++k) soa->set(i, k, pts[i][k]);
            (*logs)[i] = phi_.log_at(pts[i]);
        }
        common_points_ = std::move(soa);
        common_logs_ = std::move(logs);
    }
}

BallOuterValue BallOuterEvaluator::finish(simd::KernelMoments m, std::size_t count) const {
    const double nn = static_cast<double>(count);
    const cplx mean = m.sum / nn;
    const double var_re = std::max(0.0, m.sumsq_re / nn - mean.real() * mean.real()) * nn / (nn - 1.0);
    const double var_im = std::max(0.0, m.sumsq_im / nn - mean.imag() * mean.imag()) * nn / (nn - 1.0);
    BallOuterValue out;
    out.exponent = mean;
    out.value = std::exp(mean);
    out.se_re = std::sqrt(var_re / nn);
    out.se_im = std::sqrt(var_im / nn);
    return out;
}

BallOuterValue BallOuterEvaluator::evaluate(std::span<const cplx> z) const {
    const std::size_t n = phi_.dimension();
    if (z.size() != n) throw DomainError("ball_outer: dimension mismatch");
    const double r = norm(z);
    if (!(r <= 1.0 - options_.delta_min)) throw DomainError("ball_outer: |z| exceeds 1 - delta_min");
    if (common_points_) {
        return finish(simd::ball_herglotz_moments(z, *common_points_, *common_logs_), common_points_->count);
    }

    auto sub = sampler_.substream(point_tag(z));
    const std::size_t total = options_.mc_count;
    std::vector<SpherePoint> pts;
    std::vector<double> weight;
    const bool mixture = options_.importance && r > options_.importance_radius;
    if (!mixture) {
        pts = sample_sphere(n, total, sub);
        weight.assign(total, 1.0);
    } else {
        std::vector<cplx> dir(z.begin(), z.end());
        for (auto& c : dir) c /= r;
        const SpherePoint center(std::move(dir));
        const double rc = std::min(2.0, options_.cap_scale * (1.0 - r));
        const double sc = cap_measure_quadrature(n, rc);
        const double wu = options_.mixture_uniform_weight;
        const auto nu = static_cast<std::size_t>(std::llround(wu * static_cast<double>(total)));
        pts = sample_sphere(n, nu, sub);
        auto cap = sample_ball(NonisotropicBall(center, rc), total - nu, sub, {CapMethod::direct}).points;
        pts.insert(pts.end(), std::make_move_iterator(cap.begin()), std::make_move_iterator(cap.end()));
        weight.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const bool in_cap = niso_distance(pts[i], center) <= rc;
            weight[i] = 1.0 / (wu + (in_cap ? (1.0 - wu) / sc : 0.0));
        }
    }
    simd::SoaPoints soa(n, pts.size());
    std::vector<double> values(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) soa.set(i, k, pts[i][k]);
        values[i] = weight[i] * phi_.log_at(pts[i]);
    }
    return finish(simd::ball_herglotz_moments(z, soa, values), pts.size());
}

BallOuterValue ball_outer(const BallOuterEvaluator& ev, std::span<const cplx> z) {
    BallOuterValue v = ev.evaluate(z);
    if (!(v.exponent_se() <= ev.options().se_cap))
        throw NumericalError("ball_outer: exponent standard error " + std::to_string(v.exponent_se()) +
                             " exceeds the cap; raise mc_count or enable importance sampling");
    if (!(std::abs(v.value) > 0.0) || !std::isfinite(std::abs(v.value)))
        throw NumericalError("ball_outer: exponent out of floating-point range");
    return v;
}

BoundaryFunction radial_dilate(InteriorFunction f, double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("radial_dilate: r must lie in (0, 1)");
    return [f = std::move(f), r](const SpherePoint& xi) {
        std::vector<cplx> z(xi.coords().begin(), xi.coords().end());
        for (auto& c : z) c *= r;
        return f(z);
    };
}

RadialLimit radial_limit(const InteriorFunction& f, const SpherePoint& xi, RadialLimitOptions options) {
    if (options.k_min < 1 || options.k_max < options.k_min) throw DomainError("radial_limit: bad k range");
    RadialLimit out;
    std::vector<cplx> z(xi.dimension());
    bool have = false;
    for (int k = options.k_min; k <= options.k_max; ++k) {
        const double r = 1.0 - std::ldexp(1.0, -k);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = r * xi[i];
        cplx v;
        try {
            v = f(z);
        } catch (const DomainError&) {
            break;
        }
        ++out.steps;
        if (have && std::abs(v - out.value) < options.tolerance * std::max(1.0, std::abs(v))) {
            out.value = v;
            out.r = r;
            out.converged = true;
            return out;
        }
        out.value = v;
        out.r = r;
        have = true;
    }
    if (!have) throw DomainError("radial_limit: no admissible dilate");
    return out;
}

BoundaryFunction boundary_from_interior(InteriorFunction f, RadialLimitOptions options,
                                        std::shared_ptr<std::atomic<std::size_t>> failures) {
    return [f = std::move(f), options, failures](const SpherePoint& xi) {
        const RadialLimit lim = radial_limit(f, xi, options);
        if (!lim.converged && failures) failures->fetch_add(1, std::memory_order_relaxed);
        return lim.value;
    };
}

InteriorFunction lift_to_ball(std::shared_ptr<const DiscOuterEvaluator> g, std::size_t n) {
    if (n < 2) throw DomainError("lift_to_ball: n must be >= 2");
    return [g = std::move(g), n](std::span<const cplx> z) {
        if (z.size() != n) throw DomainError("lift_to_ball: dimension mismatch");
        if (!(norm(z) < 1.0)) throw DomainError("lift_to_ball: point outside the open ball");
        return g->closure_value(z[0]);
    };
}

BoundaryFunction lift_boundary(std::shared_ptr<const DiscOuterEvaluator> g, std::size_t n) {
    if (n < 2) throw DomainError("lift_boundary: n must be >= 2");
    return [g = std::move(g), n](const SpherePoint& zeta) {
        if (zeta.dimension() != n) throw DomainError("lift_boundary: dimension mismatch");
        return g->closure_value(zeta[0]);
    };
}

double slice_integral(const std::function<double(cplx)>& F, std::size_t n, SliceGrid grid) {
    if (n < 2) throw DomainError("slice_integral: requires n >= 2");
    if (grid.radial < 2 || grid.angular < 4) throw DomainError("slice_integral: grid too coarse");
    const QuadratureRule rule = gauss_legendre(grid.radial, 0.0, 1.0);
    const double h = 2.0 * kPi / static_cast<double>(grid.angular);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double r = rule.nodes[i];
        const double w = rule.weights[i] * r * std::pow(1.0 - r * r, static_cast<double>(n) - 2.0) * h;
        double ring = 0.0;
        for (std::size_t j = 0; j < grid.angular; ++j)
            ring += F(std::polar(r, h * (static_cast<double>(j) + 0.5)));
        num += w * ring;
        den += w * static_cast<double>(grid.angular);
    }
    return num / den;
}

}  // namespace outerlab
