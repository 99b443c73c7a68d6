#pragma once

// Data-parallel inner loops shared by the quadrature and Monte-Carlo engines.
//
// Every kernel has a scalar reference implementation and an AVX2/FMA variant.
// The variant is chosen once at startup from CPUID; OUTERLAB_SIMD=scalar|avx2
// overrides the choice and set_backend() switches it at runtime (tests use this
// to compare both paths on identical inputs). The two paths differ only in
// summation order.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace outerlab::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

bool avx2_supported() noexcept;
Backend active_backend() noexcept;
/// Throws std::runtime_error when the requested backend is not available on this CPU.
void set_backend(Backend backend);
const char* backend_name(Backend backend) noexcept;

/// Structure-of-arrays storage for `count` points of C^n, coordinate-major:
/// coordinate k of point i lives at [k * count + i].
struct SoaPoints {
    std::size_t n = 0;
    std::size_t count = 0;
    std::vector<double> re;
    std::vector<double> im;

    SoaPoints() = default;
    SoaPoints(std::size_t dim, std::size_t cnt) : n(dim), count(cnt), re(dim * cnt), im(dim * cnt) {}
    void set(std::size_t i, std::size_t k, cplx v) {
        re[k * count + i] = v.real();
        im[k * count + i] = v.imag();
    }
};

/// sum_j weight_j (e_j + z) / (e_j - z) with e_j = cos_j + i sin_j.
cplx herglotz_sum(cplx z, std::span<const double> cos, std::span<const double> sin,
                  std::span<const double> weight);

struct KernelMoments {
    cplx sum{0.0, 0.0};
    double sumsq_re = 0.0;
    double sumsq_im = 0.0;
};

/// Moments of t_i = (2 (1 - <z, xi_i>)^{-n} - 1) value_i over the sample xi.
/// The power is formed by repeated complex multiplication.
KernelMoments ball_herglotz_moments(std::span<const cplx> z, const SoaPoints& xi, std::span<const double> value);

/// sum_i |v_i - pivot|.
double abs_dev_sum(std::span<const double> re, std::span<const double> im, cplx pivot);

struct WeiszfeldSums {
    double num_re = 0.0;
    double num_im = 0.0;
    double den = 0.0;
    std::size_t coincident = 0;  // points with |v_i - pivot| <= eps, excluded from the sums
};

/// Weighted sums for one Weiszfeld step: sum v_i / |v_i - p| and sum 1 / |v_i - p|.
WeiszfeldSums weiszfeld_sums(std::span<const double> re, std::span<const double> im, cplx pivot, double eps);

namespace detail {

struct Table {
    cplx (*herglotz_sum)(cplx, const double*, const double*, const double*, std::size_t);
    KernelMoments (*ball_herglotz_moments)(const cplx*, std::size_t, const double*, const double*, std::size_t,
                                           const double*);
    double (*abs_dev_sum)(const double*, const double*, std::size_t, cplx);
    WeiszfeldSums (*weiszfeld_sums)(const double*, const double*, std::size_t, cplx, double);
};

const Table& scalar_table() noexcept;
const Table* avx2_table() noexcept;  // nullptr when not compiled in

}  // namespace detail

}  // namespace outerlab::simd
