#pragma once

// Points, nonisotropic balls and seeded sampling on the complex unit sphere
// S^n = {z in C^n : |z| = 1}. The unit circle T is the case n = 1.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace outerlab {

using cplx = std::complex<double>;

/// Hermitian inner product <u, v> = sum_i u_i conj(v_i).
cplx inner(std::span<const cplx> u, std::span<const cplx> v);

/// Euclidean norm of a complex vector.
double norm(std::span<const cplx> z);

/// A point of S^n. Coordinates are renormalized on construction.
class SpherePoint {
public:
    explicit SpherePoint(std::vector<cplx> coords);

    /// The distinguished point (1, 0, ..., 0).
    static SpherePoint north(std::size_t n);
    /// e^{i theta} on T (n = 1).
    static SpherePoint on_circle(double theta);

    std::size_t dimension() const noexcept { return coords_.size(); }
    std::span<const cplx> coords() const noexcept { return coords_; }
    const cplx& operator[](std::size_t i) const { return coords_[i]; }

    /// Multiplies every coordinate by the scalar lambda in T.
    SpherePoint rotated(cplx lambda) const;

private:
    struct Trusted {};
    SpherePoint(std::vector<cplx> coords, Trusted) : coords_(std::move(coords)) {}
    friend class CapFrame;
    friend class Unitary;

    std::vector<cplx> coords_;
};

/// d(u, v) = |1 - <u, v>|. Throws DomainError on dimension mismatch.
double niso_distance(const SpherePoint& u, const SpherePoint& v);

/// Q = {z in S^n : d(z, center) <= radius}. Radii above 2 are clamped to 2 (the whole sphere).
struct NonisotropicBall {
    NonisotropicBall(SpherePoint c, double r);

    SpherePoint center;
    double radius;

    std::size_t dimension() const noexcept { return center.dimension(); }
};

bool ball_contains(const NonisotropicBall& q, const SpherePoint& z);

/// Reproducible random source identified by (seed, stream_id).
///
/// Two samplers with the same pair produce the same sequence. Parallel work
/// derives independent substreams with `substream(tag)` instead of sharing one
/// sampler, so results never depend on scheduling.
class SeededSampler {
public:
    explicit SeededSampler(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    SeededSampler substream(std::uint64_t tag) const;

    double uniform();                    // [0, 1)
    double uniform(double lo, double hi);
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// splitmix64 finalizer; used to mix stream identifiers.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Uniform sample of the rotation-invariant probability measure sigma on S^n.
std::vector<SpherePoint> sample_sphere(std::size_t n, std::size_t count, SeededSampler& sampler);

/// A unitary map of C^n sending (1, 0, ..., 0) to a chosen point.
class CapFrame {
public:
    explicit CapFrame(const SpherePoint& target);
    SpherePoint apply(std::span<const cplx> z) const;

private:
    std::vector<cplx> w_;  // Householder vector, empty when the reflection is trivial
    cplx phase_;
};

/// Dense n x n unitary matrix; `haar` draws from the Haar measure.
class Unitary {
public:
    static Unitary haar(std::size_t n, SeededSampler& sampler);
    std::size_t dimension() const noexcept { return n_; }
    SpherePoint apply(const SpherePoint& z) const;
    std::vector<cplx> apply(std::span<const cplx> z) const;

private:
    std::size_t n_ = 0;
    std::vector<cplx> m_;  // row-major
};

enum class CapMethod { automatic, rejection, direct };

struct BallSampleOptions {
    CapMethod method = CapMethod::automatic;
    double acceptance_floor = 1e-6;
};

struct BallSample {
    std::vector<SpherePoint> points;
    double acceptance_rate = 1.0;
    CapMethod method_used = CapMethod::direct;
};

/// Uniform sample of sigma restricted to Q.
///
/// `rejection` filters sample_sphere output and fails with NumericalError once the
/// observed acceptance rate drops below the floor. `direct` draws the first
/// coordinate in the rotated frame from its disc marginal and fills the fiber
/// uniformly, which stays cheap for tiny radii. `automatic` picks rejection for
/// radius >= 1 and the direct parametrization otherwise.
BallSample sample_ball(const NonisotropicBall& q, std::size_t count, SeededSampler& sampler,
                       BallSampleOptions options = {});

struct MeasureEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

enum class MeasureMethod { automatic, hit_or_miss, cap };

/// Monte-Carlo estimate of sigma(Q). `hit_or_miss` counts sphere samples inside Q;
/// `cap` integrates the first-coordinate marginal over a bounding box of the cap
/// and keeps relative precision at small radii. Requires count >= 1000.
MeasureEstimate ball_measure(const NonisotropicBall& q, std::size_t count, SeededSampler& sampler,
                             MeasureMethod method = MeasureMethod::automatic);

/// sigma(Q_r) by deterministic two-dimensional quadrature of the first-coordinate
/// marginal. Used for importance weights and as a test reference.
double cap_measure_quadrature(std::size_t n, double radius);

}  // namespace outerlab
