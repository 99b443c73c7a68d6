#pragma once

// Outer functions on the disc and on the ball, radial dilation, the lift
// f0(z) = g(z_1), and the slice-integration formula.

#include <atomic>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "outerlab/boundary_data.hpp"
#include "outerlab/kernels.hpp"
#include "outerlab/simd/batch.hpp"
#include "outerlab/sphere_geometry.hpp"

namespace outerlab {

using InteriorFunction = std::function<cplx(std::span<const cplx>)>;
using BoundaryFunction = std::function<cplx(const SpherePoint&)>;

struct DiscOuterOptions {
    std::size_t nodes = 4096;  // power of two, >= 256
    double delta_min = kDefaultDeltaMin;
    int grading = 6;                  // order of the node-clustering map at the deepest breakpoint
    double adaptive_threshold = 8.0;  // switch to adaptive once 1 - |z| < threshold * max node gap
    double adaptive_tolerance = 1e-11;
};

/// Evaluator of O_psi(z) = exp[(1/2pi) int (e^{it} + z)/(e^{it} - z) log psi(e^{it}) dt].
///
/// Interior points use a trapezoid rule on a graded grid that clusters nodes at
/// the breakpoint where psi is smallest; near-boundary and boundary points use adaptive
/// tanh-sinh quadrature on the subtracted integrand. Immutable after construction.
class DiscOuterEvaluator {
public:
    explicit DiscOuterEvaluator(ModulusProfile psi, DiscOuterOptions options = {});

    const ModulusProfile& profile() const noexcept { return psi_; }
    const DiscOuterOptions& options() const noexcept { return options_; }
    std::size_t nodes() const noexcept { return angles_.size(); }
    std::span<const double> node_angles() const noexcept { return angles_; }
    double max_node_gap() const noexcept { return max_gap_; }

    /// Herglotz integral (the log of the outer function) at |z| <= 1 - delta_min.
    cplx exponent(cplx z) const;
    cplx exponent_trapezoid(cplx z) const;
    cplx exponent_adaptive(cplx z) const;
    /// Radial limit of the exponent at e^{i theta}: log psi(theta) + i * conjugate function.
    cplx boundary_exponent(double theta) const;

    cplx operator()(cplx z) const { return std::exp(exponent(z)); }
    cplx boundary_value(double theta) const { return std::exp(boundary_exponent(theta)); }
    /// Any |z| <= 1; points within delta_min of T are evaluated on T.
    cplx closure_value(cplx z) const;
    /// |O_psi(z)| = exp(Poisson integral of log psi), |z| <= 1.
    double modulus(cplx z) const;

private:
    bool needs_adaptive(cplx z) const;
    cplx adaptive(double rho, double theta, bool real_only) const;

    ModulusProfile psi_;
    DiscOuterOptions options_;
    std::vector<double> angles_;
    std::vector<double> cos_;
    std::vector<double> sin_;
    std::vector<double> weighted_log_;
    double max_gap_ = 0.0;
};

/// exp of the Herglotz integral; throws DomainError when |z| > 1 - delta_min
/// (use boundary_value / closure_value for radial limits).
cplx disc_outer(const DiscOuterEvaluator& ev, cplx z);

enum class SampleReuse { per_point, common };

struct BallOuterOptions {
    std::size_t mc_count = 100000;
    double delta_min = kDefaultDeltaMin;
    double se_cap = 0.05;       // max allowed |standard error| of the exponent
    bool importance = false;    // mixture sampling for |z| > importance_radius
    double importance_radius = 0.9;
    double mixture_uniform_weight = 0.5;
    double cap_scale = 4.0;     // cap radius = cap_scale * (1 - |z|)
    SampleReuse reuse = SampleReuse::per_point;
};

struct BallOuterValue {
    cplx value;
    cplx exponent;
    double se_re = 0.0;
    double se_im = 0.0;

    double exponent_se() const { return std::hypot(se_re, se_im); }
    double modulus() const { return std::abs(value); }
    /// Im of the exponent integral.
    double phase() const { return exponent.imag(); }
};

/// Monte-Carlo evaluator of f(z) = exp[int (2C(z, xi) - 1) log phi(xi) d sigma(xi)].
class BallOuterEvaluator {
public:
    BallOuterEvaluator(ModulusProfile phi, SeededSampler sampler, BallOuterOptions options = {});

    const ModulusProfile& profile() const noexcept { return phi_; }
    const BallOuterOptions& options() const noexcept { return options_; }
    BallOuterValue evaluate(std::span<const cplx> z) const;

private:
    BallOuterValue finish(simd::KernelMoments m, std::size_t count) const;

    ModulusProfile phi_;
    SeededSampler sampler_;
    BallOuterOptions options_;
    std::shared_ptr<const simd::SoaPoints> common_points_;
    std::shared_ptr<const std::vector<double>> common_logs_;
};

/// Throws NumericalError when the exponent standard error exceeds the cap.
BallOuterValue ball_outer(const BallOuterEvaluator& ev, std::span<const cplx> z);

/// xi -> f(r xi), 0 < r < 1.
BoundaryFunction radial_dilate(InteriorFunction f, double r);

struct RadialLimitOptions {
    int k_min = 2;
    int k_max = 40;
    double tolerance = 1e-10;  // relative to max(1, |f|)
};

struct RadialLimit {
    cplx value;
    double r = 0.0;
    int steps = 0;
    bool converged = false;
};

/// Evaluates f((1 - 2^{-k}) xi) for k = k_min, k_min + 1, ... and stops once successive
/// dilates differ by less than the tolerance.
RadialLimit radial_limit(const InteriorFunction& f, const SpherePoint& xi, RadialLimitOptions options = {});

/// Boundary values of an interior evaluator through radial_limit. Non-converged limits
/// are counted in `failures` when given.
BoundaryFunction boundary_from_interior(InteriorFunction f, RadialLimitOptions options = {},
                                        std::shared_ptr<std::atomic<std::size_t>> failures = nullptr);

/// f0(z_1, ..., z_n) = g(z_1) on the open ball, n >= 2.
InteriorFunction lift_to_ball(std::shared_ptr<const DiscOuterEvaluator> g, std::size_t n);

/// Boundary values of the lift on S^n (g evaluated on the closed disc).
BoundaryFunction lift_boundary(std::shared_ptr<const DiscOuterEvaluator> g, std::size_t n);

struct SliceGrid {
    std::size_t radial = 64;
    std::size_t angular = 256;
};

/// c_n int_0^1 int_0^{2pi} r (1 - r^2)^{n-2} F(r e^{i beta}) d beta dr = int_{S^n} F(zeta_1) d sigma,
/// with c_n fixed by the F = 1 normalization of the same rule. Requires n >= 2.
double slice_integral(const std::function<double(cplx)>& F, std::size_t n, SliceGrid grid = {});

}  // namespace outerlab
