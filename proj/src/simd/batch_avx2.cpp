// Compiled with -mavx2 -mfma; only reached when CPUID reports both.

#include "outerlab/simd/batch.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace outerlab::simd::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cplx herglotz_sum_avx2(cplx z, const double* c, const double* s, const double* w, std::size_t m) {
    const __m256d zr = _mm256_set1_pd(z.real());
    const __m256d zi = _mm256_set1_pd(z.imag());
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        const __m256d cj = _mm256_loadu_pd(c + j);
        const __m256d sj = _mm256_loadu_pd(s + j);
        const __m256d wj = _mm256_loadu_pd(w + j);
        const __m256d nr = _mm256_add_pd(cj, zr);
        const __m256d ni = _mm256_add_pd(sj, zi);
        const __m256d dr = _mm256_sub_pd(cj, zr);
        const __m256d di = _mm256_sub_pd(sj, zi);
        const __m256d den = _mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di));
        const __m256d inv = _mm256_div_pd(wj, den);
        const __m256d qr = _mm256_fmadd_pd(nr, dr, _mm256_mul_pd(ni, di));
        const __m256d qi = _mm256_fmsub_pd(ni, dr, _mm256_mul_pd(nr, di));
        acc_re = _mm256_fmadd_pd(qr, inv, acc_re);
        acc_im = _mm256_fmadd_pd(qi, inv, acc_im);
    }
    double re = hsum(acc_re);
    double im = hsum(acc_im);
    for (; j < m; ++j) {
        const double nr = c[j] + z.real();
        const double ni = s[j] + z.imag();
        const double dr = c[j] - z.real();
        const double di = s[j] - z.imag();
        const double inv = w[j] / (dr * dr + di * di);
        re += (nr * dr + ni * di) * inv;
        im += (ni * dr - nr * di) * inv;
    }
    return {re, im};
}

KernelMoments ball_moments_avx2(const cplx* z, std::size_t n, const double* re, const double* im,
                                std::size_t count, const double* value) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    __m256d sum_re = _mm256_setzero_pd();
    __m256d sum_im = _mm256_setzero_pd();
    __m256d sq_re = _mm256_setzero_pd();
    __m256d sq_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d wr = one;
        __m256d wi = _mm256_setzero_pd();
        for (std::size_t k = 0; k < n; ++k) {
            const __m256d a = _mm256_set1_pd(z[k].real());
            const __m256d b = _mm256_set1_pd(z[k].imag());
            const __m256d c = _mm256_loadu_pd(re + k * count + i);
            const __m256d d = _mm256_loadu_pd(im + k * count + i);
            wr = _mm256_sub_pd(wr, _mm256_fmadd_pd(a, c, _mm256_mul_pd(b, d)));
            wi = _mm256_sub_pd(wi, _mm256_fmsub_pd(b, c, _mm256_mul_pd(a, d)));
        }
        __m256d pr = wr;
        __m256d pi = wi;
        for (std::size_t k = 1; k < n; ++k) {
            const __m256d tr = _mm256_fmsub_pd(pr, wr, _mm256_mul_pd(pi, wi));
            pi = _mm256_fmadd_pd(pr, wi, _mm256_mul_pd(pi, wr));
            pr = tr;
        }
        const __m256d inv = _mm256_div_pd(one, _mm256_fmadd_pd(pr, pr, _mm256_mul_pd(pi, pi)));
        const __m256d v = _mm256_loadu_pd(value + i);
        const __m256d tr = _mm256_mul_pd(_mm256_fmsub_pd(_mm256_mul_pd(two, pr), inv, one), v);
        const __m256d ti = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(two, pi), inv), _mm256_sub_pd(_mm256_setzero_pd(), v));
        sum_re = _mm256_add_pd(sum_re, tr);
        sum_im = _mm256_add_pd(sum_im, ti);
        sq_re = _mm256_fmadd_pd(tr, tr, sq_re);
        sq_im = _mm256_fmadd_pd(ti, ti, sq_im);
    }
    KernelMoments m;
    double s_re = hsum(sum_re);
    double s_im = hsum(sum_im);
    m.sumsq_re = hsum(sq_re);
    m.sumsq_im = hsum(sq_im);
    {
        for (; i < count; ++i) {
            double wr = 1.0;
            double wi = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double a = z[k].real();
                const double b = z[k].imag();
                const double c = re[k * count + i];
                const double d = im[k * count + i];
                wr -= a * c + b * d;
                wi -= b * c - a * d;
            }
            double pr = wr;
            double pi = wi;
            for (std::size_t k = 1; k < n; ++k) {
                const double t = pr * wr - pi * wi;
                pi = pr * wi + pi * wr;
                pr = t;
            }
            const double inv = 1.0 / (pr * pr + pi * pi);
            const double tr = (2.0 * pr * inv - 1.0) * value[i];
            const double ti = (-2.0 * pi * inv) * value[i];
            s_re += tr;
            s_im += ti;
            m.sumsq_re += tr * tr;
            m.sumsq_im += ti * ti;
        }
    }
    m.sum = {s_re, s_im};
    return m;
}

double abs_dev_avx2(const double* re, const double* im, std::size_t count, cplx p) {
    const __m256d pr = _mm256_set1_pd(p.real());
    const __m256d pi = _mm256_set1_pd(p.imag());
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(re + i), pr);
        const __m256d di = _mm256_sub_pd(_mm256_loadu_pd(im + i), pi);
        acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di))));
    }
    double s = hsum(acc);
    for (; i < count; ++i) {
        const double dr = re[i] - p.real();
        const double di = im[i] - p.imag();
        s += std::sqrt(dr * dr + di * di);
    }
    return s;
}

WeiszfeldSums weiszfeld_avx2(const double* re, const double* im, std::size_t count, cplx p, double eps) {
    const __m256d pr = _mm256_set1_pd(p.real());
    const __m256d pi = _mm256_set1_pd(p.imag());
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d num_re = _mm256_setzero_pd();
    __m256d num_im = _mm256_setzero_pd();
    __m256d den = _mm256_setzero_pd();
    WeiszfeldSums out;
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d vr = _mm256_loadu_pd(re + i);
        const __m256d vi = _mm256_loadu_pd(im + i);
        const __m256d dr = _mm256_sub_pd(vr, pr);
        const __m256d di = _mm256_sub_pd(vi, pi);
        const __m256d dist = _mm256_sqrt_pd(_mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di)));
        const __m256d far = _mm256_cmp_pd(dist, veps, _CMP_GT_OQ);
        const int mask = _mm256_movemask_pd(far);
        out.coincident += static_cast<std::size_t>(4 - __builtin_popcount(static_cast<unsigned>(mask)));
        const __m256d inv = _mm256_and_pd(far, _mm256_div_pd(one, _mm256_max_pd(dist, veps)));
        num_re = _mm256_fmadd_pd(vr, inv, num_re);
        num_im = _mm256_fmadd_pd(vi, inv, num_im);
        den = _mm256_add_pd(den, inv);
    }
    out.num_re = hsum(num_re);
    out.num_im = hsum(num_im);
    out.den = hsum(den);
    for (; i < count; ++i) {
        const double dr = re[i] - p.real();
        const double di = im[i] - p.imag();
        const double dist = std::sqrt(dr * dr + di * di);
        if (dist <= eps) {
            ++out.coincident;
            continue;
        }
        out.num_re += re[i] / dist;
        out.num_im += im[i] / dist;
        out.den += 1.0 / dist;
    }
    return out;
}

}  // namespace

const Table* avx2_table() noexcept {
    static const Table table{herglotz_sum_avx2, ball_moments_avx2, abs_dev_avx2, weiszfeld_avx2};
    return &table;
}

}  // namespace outerlab::simd::detail

#else

namespace outerlab::simd::detail {
const Table* avx2_table() noexcept { return nullptr; }
}  // namespace outerlab::simd::detail

#endif
