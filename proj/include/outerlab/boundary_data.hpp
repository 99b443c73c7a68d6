#pragma once

// Boundary modulus profiles phi and the hypothesis functionals measured on them.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "outerlab/sphere_geometry.hpp"

namespace outerlab {

inline constexpr double kDefaultFloor = 1e-12;

/// Names a profile family and its parameters. For `lifted_1d`, `base` names the
/// one-dimensional family and `params` carries the base parameters.
struct FamilySpec {
    std::string family;
    std::map<std::string, double> params;
    std::string base;
};

/// Positive boundary modulus on S^n (on T when n = 1), clamped below at `floor`.
///
/// Instances are cheap to copy; copies share one clamp-event counter.
class ModulusProfile {
public:
    using SphereFn = std::function<double(const SpherePoint&)>;
    using AngleFn = std::function<double(double)>;

    /// `raw` is the unclamped modulus. `angular` (n = 1 only) evaluates by angle.
    /// `breakpoints` lists angles where an n = 1 profile is singular or kinked.
    ModulusProfile(std::size_t n, double floor, FamilySpec descriptor, SphereFn raw, AngleFn angular = {},
                   std::vector<double> breakpoints = {});

    double operator()(const SpherePoint& zeta) const { return evaluate(zeta, nullptr); }
    double evaluate(const SpherePoint& zeta, bool* clamped) const;
    double log_at(const SpherePoint& zeta, bool* clamped = nullptr) const;

    /// n = 1 profiles: psi(e^{i theta}).
    double at_angle(double theta, bool* clamped = nullptr) const;
    double log_at_angle(double theta, bool* clamped = nullptr) const;

    std::size_t dimension() const noexcept { return state_->n; }
    double floor() const noexcept { return state_->floor; }
    const FamilySpec& descriptor() const noexcept { return state_->descriptor; }
    const std::vector<double>& breakpoints() const noexcept { return state_->breakpoints; }
    std::uint64_t clamp_events() const noexcept { return state_->clamps.load(std::memory_order_relaxed); }

    /// The one-dimensional profile behind a `lifted_1d` profile, if any.
    const ModulusProfile* base() const noexcept { return state_->base.get(); }

private:
    friend ModulusProfile make_modulus(const FamilySpec&, std::size_t, double);

    struct State {
        std::size_t n;
        double floor;
        FamilySpec descriptor;
        SphereFn raw;
        AngleFn angular;
        std::vector<double> breakpoints;
        std::shared_ptr<const ModulusProfile> base;
        std::shared_ptr<const void> keep_alive;
        mutable std::atomic<std::uint64_t> clamps{0};
    };
    double clamp(double raw, bool* clamped) const;

    std::shared_ptr<State> state_;
};

/// Families:
///   constant        c > 0
///   distance_power  max(floor, d(zeta, 1)^beta), beta > 0
///   holder_cusp     max(floor, min(1, d(zeta, 1)^alpha)), alpha in (0, 1)
///   log_spike       (n = 1) exp(-chi(theta) min(|theta|^-gamma, log(1/floor))), gamma > 0,
///                   chi a smooth cutoff equal to 1 on |theta| <= join_inner and 0 beyond join_outer
///   lifted_1d       (n >= 2) |g(zeta_1)| with g the disc outer function of the base family
/// Throws ConfigError for unknown families or invalid parameters.
ModulusProfile make_modulus(const FamilySpec& spec, std::size_t n, double floor = kDefaultFloor);

struct HolderCertificate {
    SpherePoint point;
    double alpha;
    double c0;
    std::size_t sample_count;
    /// Per dyadic shell (outer radius 2^{1-k}): the largest observed ratio.
    std::vector<double> shell_outer_radius;
    std::vector<double> shell_max;
};

/// c0 = max |phi(t) - phi(point)| / d(t, point)^alpha over samples stratified in dyadic shells
/// 2^{-k} < d <= 2^{1-k}, k = 0..shells-1.
HolderCertificate holder_constant_at(const ModulusProfile& phi, const SpherePoint& point, double alpha,
                                     std::size_t count, SeededSampler& sampler, std::size_t shells = 24);

struct LogNormEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
    double clamp_fraction = 0.0;   // share of the estimate contributed by clamped samples
    bool clamp_dominated = false;  // clamp_fraction > 1%
};

/// Monte-Carlo estimate of B_p = int |log phi|^p d sigma.
LogNormEstimate log_lp_norm(const ModulusProfile& phi, double p, std::size_t count, SeededSampler& sampler);

/// (1/2pi) int_0^{2pi} |log psi|^p for an n = 1 profile by midpoint rule with `nodes` nodes.
double log_lp_norm_circle(const ModulusProfile& psi, double p, std::size_t nodes);

struct SliceReport {
    double b0 = 0.0;
    std::size_t worst_direction = 0;
    std::vector<double> per_direction;
    std::uint64_t clamp_events = 0;
    bool flagged = false;
};

struct SliceOptions {
    std::size_t directions = 256;
    std::size_t angles = 4096;  // power of two
    double floor = kDefaultFloor;
};

/// Empirical sup over directions xi of int_0^{2pi} |log |f(xi e^{i theta})|| d theta.
/// Directions: (1,0,...,0), the remaining coordinate axes, then uniform samples.
SliceReport slice_constant(const std::function<cplx(const SpherePoint&)>& f, std::size_t n, SeededSampler& sampler,
                           SliceOptions options = {});

/// int_0^{2pi} |log max(floor, |f(xi e^{i theta})|)| d theta along one direction.
double slice_integral_along(const std::function<cplx(const SpherePoint&)>& f, const SpherePoint& xi,
                            std::size_t angles, double floor, std::uint64_t* clamp_events = nullptr);

}  // namespace outerlab
