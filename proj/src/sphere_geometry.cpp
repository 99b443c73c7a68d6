#include "outerlab/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "outerlab/errors.hpp"
#include "outerlab/quadrature.hpp"

namespace outerlab {

namespace {

void require_same_dimension(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DomainError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
    }
}

std::vector<cplx> gaussian_unit_vector(std::size_t n, SeededSampler& sampler) {
    std::vector<cplx> v(n);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (auto& c : v) {
            const double re = sampler.normal();
            const double im = sampler.normal();
            c = {re, im};
            sq += re * re + im * im;
        }
    } while (sq == 0.0);
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& c : v) c *= inv;
    return v;
}

// Largest value of 1 - |lambda|^2 over the lens {|1 - lambda| <= r, |lambda| <= 1}.
double lens_weight_max(double r) { return r >= 1.0 ? 1.0 : 1.0 - (1.0 - r) * (1.0 - r); }

struct LensBox {
    double x_lo, x_hi, y_half;
    double area() const { return (x_hi - x_lo) * 2.0 * y_half; }
};

LensBox lens_box(double r) { return {std::max(-1.0, 1.0 - r), 1.0, std::min(r, 1.0)}; }

// Arc half-width on T: |1 - e^{i theta}| <= r  <=>  |theta| <= 2 asin(r / 2).
double arc_half_width(double r) { return 2.0 * std::asin(std::min(r, 2.0) / 2.0); }

}  // namespace

cplx inner(std::span<const cplx> u, std::span<const cplx> v) {
    require_same_dimension(u.size(), v.size(), "inner");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * std::conj(v[i]);
    return s;
}

double norm(std::span<const cplx> z) {
    double s = 0.0;
    for (const auto& c : z) s += std::norm(c);
    return std::sqrt(s);
}

SpherePoint::SpherePoint(std::vector<cplx> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw DomainError("SpherePoint: dimension must be at least 1");
    const double len = norm(coords_);
    if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("SpherePoint: cannot normalize a zero or non-finite vector");
    for (auto& c : coords_) c /= len;
}

SpherePoint SpherePoint::north(std::size_t n) {
    if (n == 0) throw DomainError("SpherePoint::north: dimension must be at least 1");
    std::vector<cplx> c(n, cplx{0.0, 0.0});
    c[0] = 1.0;
    return SpherePoint(std::move(c), Trusted{});
}

SpherePoint SpherePoint::on_circle(double theta) {
    return SpherePoint(std::vector<cplx>{std::polar(1.0, theta)}, Trusted{});
}

SpherePoint SpherePoint::rotated(cplx lambda) const {
    std::vector<cplx> c(coords_);
    for (auto& x : c) x *= lambda;
    return SpherePoint(std::move(c));
}

double niso_distance(const SpherePoint& u, const SpherePoint& v) {
    require_same_dimension(u.dimension(), v.dimension(), "niso_distance");
    return std::abs(1.0 - inner(u.coords(), v.coords()));
}

NonisotropicBall::NonisotropicBall(SpherePoint c, double r) : center(std::move(c)), radius(r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("NonisotropicBall: radius must be finite and nonnegative");
    radius = std::min(r, 2.0);
}

bool ball_contains(const NonisotropicBall& q, const SpherePoint& z) {
    return niso_distance(z, q.center) <= q.radius;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeededSampler::SeededSampler(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    const std::uint64_t a = mix64(seed);
    const std::uint64_t b = mix64(stream_id ^ 0x5851f42d4c957f2dULL);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
}

SeededSampler SeededSampler::substream(std::uint64_t tag) const {
    return SeededSampler(seed_, mix64(stream_id_ * 0x100000001b3ULL + mix64(tag)));
}

double SeededSampler::uniform() { return std::generate_canonical<double, 53>(engine_); }

double SeededSampler::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededSampler::normal() { return gauss_(engine_); }

std::vector<SpherePoint> sample_sphere(std::size_t n, std::size_t count, SeededSampler& sampler) {
    if (n == 0) throw DomainError("sample_sphere: dimension must be at least 1");
    std::vector<SpherePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(gaussian_unit_vector(n, sampler));
    return out;
}

CapFrame::CapFrame(const SpherePoint& target) {
    const auto c = target.coords();
    const double phi = std::abs(c[0]) > 0.0 ? std::arg(c[0]) : 0.0;
    phase_ = std::polar(1.0, phi);
    std::vector<cplx> w(c.begin(), c.end());
    for (auto& x : w) x = -x;
    w[0] += phase_;
    if (norm(w) > 1e-15) w_ = std::move(w);
}

SpherePoint CapFrame::apply(std::span<const cplx> z) const {
    std::vector<cplx> v(z.begin(), z.end());
    for (auto& x : v) x *= phase_;
    if (!w_.empty()) {
        cplx wv{0.0, 0.0};
        double ww = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            wv += std::conj(w_[i]) * v[i];
            ww += std::norm(w_[i]);
        }
        const cplx s = 2.0 * wv / ww;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= s * w_[i];
    }
    return SpherePoint(std::move(v));
}

Unitary Unitary::haar(std::size_t n, SeededSampler& sampler) {
    Unitary u;
    u.n_ = n;
    // Columns of a complex Ginibre matrix, orthonormalized by modified Gram-Schmidt.
    std::vector<std::vector<cplx>> cols(n, std::vector<cplx>(n));
    for (auto& col : cols)
        for (auto& x : col) x = {sampler.normal(), sampler.normal()};
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            const cplx proj = inner(cols[k], cols[j]);
            for (std::size_t i = 0; i < n; ++i) cols[k][i] -= proj * cols[j][i];
        }
        const double len = norm(cols[k]);
        for (auto& x : cols[k]) x /= len;
    }
    u.m_.resize(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) u.m_[r * n + c] = cols[c][r];
    return u;
}

std::vector<cplx> Unitary::apply(std::span<const cplx> z) const {
    require_same_dimension(z.size(), n_, "Unitary::apply");
    std::vector<cplx> out(n_, cplx{0.0, 0.0});
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < n_; ++c) out[r] += m_[r * n_ + c] * z[c];
    return out;
}

SpherePoint Unitary::apply(const SpherePoint& z) const { return SpherePoint(apply(z.coords())); }

namespace {

// Direct parametrization of sigma restricted to Q(north, r), rotated onto the center.
BallSample sample_cap_direct(const NonisotropicBall& q, std::size_t count, SeededSampler& sampler) {
    const std::size_t n = q.dimension();
    const double r = q.radius;
    const CapFrame frame(q.center);
    BallSample out;
    out.method_used = CapMethod::direct;
    out.points.reserve(count);
    if (n == 1) {
        const double half = arc_half_width(r);
        for (std::size_t i = 0; i < count; ++i) {
            const double theta = sampler.uniform(-half, half);
            const cplx z = std::polar(1.0, theta);
            out.points.push_back(frame.apply(std::span<const cplx>(&z, 1)));
        }
        return out;
    }
    const LensBox box = lens_box(r);
    const double wmax = lens_weight_max(r);
    const int fiber_power = static_cast<int>(n) - 2;
    std::size_t trials = 0;
    std::vector<cplx> z(n);
    while (out.points.size() < count) {
        ++trials;
        const cplx lambda{sampler.uniform(box.x_lo, box.x_hi), sampler.uniform(-box.y_half, box.y_half)};
        const double mod2 = std::norm(lambda);
        if (mod2 > 1.0 || std::abs(1.0 - lambda) > r) continue;
        const double w = 1.0 - mod2;
        if (fiber_power > 0 && sampler.uniform() > std::pow(w / wmax, fiber_power)) continue;
        const auto fiber = gaussian_unit_vector(n - 1, sampler);
        const double scale = std::sqrt(std::max(0.0, w));
        z[0] = lambda;
        for (std::size_t k = 1; k < n; ++k) z[k] = scale * fiber[k - 1];
        out.points.push_back(frame.apply(z));
    }
    out.acceptance_rate = static_cast<double>(count) / static_cast<double>(std::max<std::size_t>(trials, 1));
    return out;
}

BallSample sample_ball_rejection(const NonisotropicBall& q, std::size_t count, SeededSampler& sampler,
                                 double floor) {
    const std::size_t n = q.dimension();
    BallSample out;
    out.method_used = CapMethod::rejection;
    out.points.reserve(count);
    const auto min_trials = static_cast<std::size_t>(std::ceil(1.0 / floor));
    std::size_t trials = 0;
    while (out.points.size() < count) {
        SpherePoint p(gaussian_unit_vector(n, sampler));
        ++trials;
        if (ball_contains(q, p)) out.points.push_back(std::move(p));
        if (trials >= min_trials &&
            static_cast<double>(out.points.size()) < floor * static_cast<double>(trials)) {
            throw NumericalError("sample_ball: rejection acceptance rate " +
                                 std::to_string(static_cast<double>(out.points.size()) / trials) +
                                 " is below the floor; use the direct cap parametrization (CapMethod::direct)");
        }
    }
    out.acceptance_rate = static_cast<double>(count) / static_cast<double>(trials);
    return out;
}

}  // namespace

BallSample sample_ball(const NonisotropicBall& q, std::size_t count, SeededSampler& sampler,
                       BallSampleOptions options) {
    if (!(q.radius > 0.0)) throw DomainError("sample_ball: radius must be positive");
    if (q.radius >= 2.0) {
        BallSample out;
        out.points = sample_sphere(q.dimension(), count, sampler);
        out.acceptance_rate = 1.0;
        out.method_used = CapMethod::rejection;
        return out;
    }
    CapMethod method = options.method;
    if (method == CapMethod::automatic) method = q.radius >= 1.0 ? CapMethod::rejection : CapMethod::direct;
    if (method == CapMethod::rejection) return sample_ball_rejection(q, count, sampler, options.acceptance_floor);
    return sample_cap_direct(q, count, sampler);
}

MeasureEstimate ball_measure(const NonisotropicBall& q, std::size_t count, SeededSampler& sampler,
                             MeasureMethod method) {
    if (count < 1000) throw DomainError("ball_measure: count must be at least 1000");
    if (q.radius <= 0.0) return {0.0, 0.0};
    if (q.radius >= 2.0) return {1.0, 0.0};
    const std::size_t n = q.dimension();
    const double r = q.radius;
    const double dn = static_cast<double>(count);
    if (method == MeasureMethod::hit_or_miss) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const SpherePoint p(gaussian_unit_vector(n, sampler));
            if (ball_contains(q, p)) ++hits;
        }
        const double p = static_cast<double>(hits) / dn;
        return {p, std::sqrt(p * (1.0 - p) / dn)};
    }
    // Cap estimator; sigma is rotation invariant so the center is irrelevant.
    double sum = 0.0;
    double sumsq = 0.0;
    double scale = 0.0;
    if (n == 1) {
        const double b = std::min(std::numbers::pi, std::numbers::pi * r / 2.0);
        scale = b / std::numbers::pi;
        for (std::size_t i = 0; i < count; ++i) {
            const double theta = sampler.uniform(-b, b);
            const double y = 2.0 * std::abs(std::sin(theta / 2.0)) <= r ? 1.0 : 0.0;
            sum += y;
            sumsq += y * y;
        }
    } else {
        const LensBox box = lens_box(r);
        const int fiber_power = static_cast<int>(n) - 2;
        scale = static_cast<double>(n - 1) / std::numbers::pi * box.area();
        for (std::size_t i = 0; i < count; ++i) {
            const cplx lambda{sampler.uniform(box.x_lo, box.x_hi), sampler.uniform(-box.y_half, box.y_half)};
            const double mod2 = std::norm(lambda);
            double y = 0.0;
            if (mod2 <= 1.0 && std::abs(1.0 - lambda) <= r) y = std::pow(1.0 - mod2, fiber_power);
            sum += y;
            sumsq += y * y;
        }
    }
    const double mean = sum / dn;
    const double var = std::max(0.0, sumsq / dn - mean * mean);
    return {scale * mean, scale * std::sqrt(var / (dn - 1.0))};
}

double cap_measure_quadrature(std::size_t n, double radius) {
    if (n == 0) throw DomainError("cap_measure_quadrature: dimension must be at least 1");
    if (radius <= 0.0) return 0.0;
    if (radius >= 2.0) return 1.0;
    if (n == 1) return arc_half_width(radius) / std::numbers::pi;
    // Polar coordinates around lambda = 1: lambda = 1 - rho e^{i psi}, |lambda| <= 1 iff cos psi >= rho / 2,
    // and 1 - |lambda|^2 = 2 rho cos psi - rho^2.
    const auto outer = gauss_legendre(96, 0.0, radius);
    const int fiber_power = static_cast<int>(n) - 2;
    double total = 0.0;
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
        const double rho = outer.nodes[i];
        const double a = std::acos(rho / 2.0);
        double inner_sum = 2.0 * a;
        if (fiber_power > 0) {
            const auto ang = gauss_legendre(64, -a, a);
            inner_sum = 0.0;
            for (std::size_t k = 0; k < ang.nodes.size(); ++k)
                inner_sum += ang.weights[k] *
                             std::pow(std::max(0.0, 2.0 * rho * std::cos(ang.nodes[k]) - rho * rho), fiber_power);
        }
        total += outer.weights[i] * rho * inner_sum;
    }
    return static_cast<double>(n - 1) / std::numbers::pi * total;
}

}  // namespace outerlab
