#pragma once

// Mean oscillation nu(f, Q) through the geometric median, oscillation profiles
// over dyadic balls, exponent fits and the exponent algebra of the smoothness-drop
// theorems.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "outerlab/power_fit.hpp"
#include "outerlab/sphere_geometry.hpp"

namespace outerlab {

struct OscillationEstimate {
    std::optional<NonisotropicBall> ball;
    double nu = 0.0;
    cplx pivot{0.0, 0.0};
    std::size_t sample_count = 0;
    double standard_error = 0.0;  // sd(|v - pivot|) / sqrt(N)
    std::size_t iterations = 0;
    bool fallback = false;        // Weiszfeld did not converge; best of median / mean / last iterate
};

/// (1/N) sum |v_i - a|.
double l1_objective(std::span<const cplx> values, cplx a);

/// nu = min_a (1/N) sum |v_i - a|, with a the geometric median (Weiszfeld, mean-seeded,
/// tolerance 1e-10 relative to the sample spread, at most 500 iterations).
/// Requires at least `min_samples` values.
OscillationEstimate mean_oscillation(std::span<const cplx> values, std::size_t min_samples = 30);

struct ProfileOptions {
    std::size_t count = 0;       // samples per ball; 0 selects max(1000, min(cap, 50 / r^{n/2}))
    std::size_t count_cap = 20000;
    std::size_t threads = 1;
};

/// Samples count_for(r) points uniformly in Q(center, r) for each radius and measures nu.
/// Radii must be strictly decreasing and lie in (0, 2]. Radius i uses sampler.substream(i).
std::vector<OscillationEstimate> oscillation_profile(const std::function<cplx(const SpherePoint&)>& f,
                                                     const SpherePoint& center, std::span<const double> radii,
                                                     const SeededSampler& sampler, ProfileOptions options = {});

std::size_t profile_sample_count(double radius, std::size_t n, const ProfileOptions& options);

struct FitOptions {
    bool weighted = false;     // weights nu^2 / se^2 on squared log residuals
    double noise_ratio = 1.0 / 3.0;
    std::size_t min_scales = 4;
};

struct ProfileFit {
    ExponentFit fit;
    std::vector<double> dropped_zero;   // radii with nu = 0
    std::vector<double> dropped_noise;  // radii whose standard error exceeds noise_ratio * nu
};

/// OLS of log nu against log radius on the usable scales. Throws DomainError when fewer
/// than min_scales remain.
ProfileFit fit_exponent(std::span<const OscillationEstimate> profile, FitOptions options = {});

struct BalanceResult {
    double gamma;              // alpha / 2
    double gamma_bisection;    // root of gamma - (1 - gamma (2/alpha - 1)) found numerically
    double regime_small;       // exponent of l in C l^alpha + phi(1) at l^gamma = K phi(1): min(alpha, gamma)
    double regime_large;       // exponent of l in C l^alpha + C l / phi(1)^{2/alpha-1}: min(alpha, 1 - gamma (2/alpha - 1))
};

/// Balances the two regime bounds of the pointwise estimate. Throws DomainError unless 0 < alpha < 1.
BalanceResult balance_exponents(double alpha);

/// alpha p / (p + n); checks agreement with alpha / (n + 1 - n/q), q = p/(p-1), to 1e-12.
double theorem1_exponent(double alpha, double p, std::size_t n);

/// alpha / (2 - 1/q), q = p/(p-1).
double kvm_exponent(double alpha, double p);

struct P1Result {
    double q;
    double p1_definition;   // (n - 2) - p (q - 1) / q
    double p1_closed_form;  // n^2 eps / (p + n eps) - 1
};

/// q from 1 + 1/p = 1/q + 1/(p/n + eps). Requires p > n >= 2 and eps > 0; throws DomainError
/// when q is undefined or nonpositive and NumericalError if the two routes disagree or p1 <= -1.
P1Result p1_check(double p, std::size_t n, double eps);

}  // namespace outerlab
