#pragma once

// Cauchy, Herglotz-type and Poisson kernels of the unit ball / disc, plus the
// numerical checks built on them.

#include <cstddef>
#include <span>
#include <vector>

#include "outerlab/power_fit.hpp"
#include "outerlab/sphere_geometry.hpp"

namespace outerlab {

/// Interior points must satisfy |z| <= 1 - delta_min so that 1 - <z, xi> stays away from 0.
inline constexpr double kDefaultDeltaMin = 1e-8;

/// C(z, xi) = (1 - <z, xi>)^{-n}, principal branch via exp(-n log(1 - <z, xi>)).
cplx cauchy_kernel(std::span<const cplx> z, const SpherePoint& xi, double delta_min = kDefaultDeltaMin);

/// 2 C(z, xi) - 1.
cplx herglotz_kernel(std::span<const cplx> z, const SpherePoint& xi, double delta_min = kDefaultDeltaMin);

/// Im(2 C(z, xi) - 1).
double im_cauchy(std::span<const cplx> z, const SpherePoint& xi, double delta_min = kDefaultDeltaMin);

/// P_r(theta) = (1 - r^2) / (1 + r^2 - 2 r cos theta), normalized so that (1/2pi) int P_r = 1.
double poisson_disc(double r, double theta);

/// int_0^{2pi} P_r(theta)^q d theta (unnormalized), by periodic trapezoid refined to 1e-13.
double poisson_lq_norm_q(double q, double r);

/// Fits the growth exponent of int P_r^q in 1 / (1 - r); the slope should approach q - 1.
ExponentFit poisson_lq_scaling(double q, std::span<const double> radii);

/// |Im(2C(z',xi)-1) - Im(2C(1',xi)-1)| (2^j l)^{n+1} / l, where z' = (1 - delta) z,
/// 1' = (1 - delta)(1, 0, ..., 0) and delta = l * 1e-3.
double kernel_diff_ratio(const SpherePoint& z, const SpherePoint& xi, double l, int j);

struct KernelDiffReport {
    double radius = 0.0;  // l(Q)
    int j = 0;
    std::size_t samples = 0;
    double max_ratio = 0.0;
};

/// Empirical maximum of kernel_diff_ratio over `count` pairs (z uniform in Q, xi uniform in
/// the annulus 2^j l < d(xi, 1) < 2^{j+1} l). Q must be centered at (1, 0, ..., 0).
KernelDiffReport kernel_diff_bound_check(const NonisotropicBall& q, int j, std::size_t count, SeededSampler& sampler);

}  // namespace outerlab
