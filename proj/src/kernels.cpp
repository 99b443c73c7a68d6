#include "outerlab/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "outerlab/errors.hpp"

namespace outerlab {

namespace {

cplx one_minus_inner(std::span<const cplx> z, const SpherePoint& xi, double delta_min) {
    if (z.size() != xi.dimension()) throw DomainError("kernel: dimension mismatch between z and xi");
    const double len = norm(z);
    if (!(len <= 1.0 - delta_min))
        throw DomainError("kernel: |z| = " + std::to_string(len) + " is not inside the ball |z| <= 1 - delta_min");
    return 1.0 - inner(z, xi.coords());
}

}  // namespace

cplx cauchy_kernel(std::span<const cplx> z, const SpherePoint& xi, double delta_min) {
    const cplx w = one_minus_inner(z, xi, delta_min);
    return std::exp(-static_cast<double>(xi.dimension()) * std::log(w));
}

cplx herglotz_kernel(std::span<const cplx> z, const SpherePoint& xi, double delta_min) {
    return 2.0 * cauchy_kernel(z, xi, delta_min) - 1.0;
}

double im_cauchy(std::span<const cplx> z, const SpherePoint& xi, double delta_min) {
    return 2.0 * cauchy_kernel(z, xi, delta_min).imag();
}

double poisson_disc(double r, double theta) {
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("poisson_disc: r must lie in [0, 1)");
    const double s = std::sin(theta / 2.0);
    return (1.0 - r) * (1.0 + r) / ((1.0 - r) * (1.0 - r) + 4.0 * r * s * s);
}

double poisson_lq_norm_q(double q, double r) {
    if (!(q >= 1.0)) throw DomainError("poisson_lq_norm_q: q must be >= 1");
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("poisson_lq_norm_q: r must lie in [0, 1)");
    std::size_t m = 16;
    while (static_cast<double>(m) < 16.0 / (1.0 - r)) m *= 2;
    auto trapezoid = [&](std::size_t nodes) {
        const double h = 2.0 * std::numbers::pi / static_cast<double>(nodes);
        double s = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) s += std::pow(poisson_disc(r, h * static_cast<double>(j)), q);
        return s * h;
    };
    double prev = trapezoid(m);
    for (int level = 0; level < 12; ++level) {
        m *= 2;
        const double next = trapezoid(m);
        if (std::abs(next - prev) <= 1e-13 * std::abs(next)) return next;
        prev = next;
    }
    throw NumericalError("poisson_lq_norm_q: trapezoid refinement did not converge");
}

ExponentFit poisson_lq_scaling(double q, std::span<const double> radii) {
    if (radii.size() < 3) throw DomainError("poisson_lq_scaling: need at least 3 radii");
    std::vector<double> x;
    std::vector<double> y;
    for (double r : radii) {
        x.push_back(1.0 / (1.0 - r));
        y.push_back(poisson_lq_norm_q(q, r));
    }
    return fit_power_law(x, y, 3);
}

double kernel_diff_ratio(const SpherePoint& z, const SpherePoint& xi, double l, int j) {
    if (!(l > 0.0)) throw DomainError("kernel_diff_ratio: l must be positive");
    const std::size_t n = z.dimension();
    const double delta = l * 1e-3;
    const double delta_min = delta / 2.0;
    std::vector<cplx> zin(z.coords().begin(), z.coords().end());
    for (auto& c : zin) c *= 1.0 - delta;
    std::vector<cplx> pole(n, cplx{0.0, 0.0});
    pole[0] = 1.0 - delta;
    const double diff = std::abs(im_cauchy(zin, xi, delta_min) - im_cauchy(pole, xi, delta_min));
    const double scale = std::ldexp(l, j);
    return diff * std::pow(scale, static_cast<double>(n + 1)) / l;
}

KernelDiffReport kernel_diff_bound_check(const NonisotropicBall& q, int j, std::size_t count, SeededSampler& sampler) {
    const std::size_t n = q.dimension();
    if (niso_distance(q.center, SpherePoint::north(n)) > 1e-12)
        throw DomainError("kernel_diff_bound_check: Q must be centered at (1, 0, ..., 0)");
    if (j < 1) throw DomainError("kernel_diff_bound_check: annulus index must be >= 1");
    const double l = q.radius;
    const double inner_r = std::ldexp(l, j);
    const double outer_r = std::ldexp(l, j + 1);
    if (!(l > 0.0)) throw DomainError("kernel_diff_bound_check: l(Q) must be positive");
    if (outer_r > 2.0) throw DomainError("kernel_diff_bound_check: annulus is empty (2^{j+1} l(Q) > 2)");

    auto z_sampler = sampler.substream(1);
    auto xi_sampler = sampler.substream(2);
    const auto zs = sample_ball(q, count, z_sampler, {CapMethod::direct}).points;
    const NonisotropicBall outer(SpherePoint::north(n), outer_r);
    std::vector<SpherePoint> xis;
    xis.reserve(count);
    while (xis.size() < count) {
        auto batch = sample_ball(outer, count, xi_sampler, {CapMethod::direct}).points;
        for (auto& p : batch) {
            const double d = niso_distance(p, outer.center);
            if (d > inner_r && d < outer_r && xis.size() < count) xis.push_back(std::move(p));
        }
    }
    KernelDiffReport report;
    report.radius = l;
    report.j = j;
    report.samples = count;
    for (std::size_t i = 0; i < count; ++i)
        report.max_ratio = std::max(report.max_ratio, kernel_diff_ratio(zs[i], xis[i], l, j));
    return report;
}

}  // namespace outerlab
