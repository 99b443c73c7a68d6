#include <cmath>

#include "outerlab/simd/batch.hpp"

namespace outerlab::simd::detail {

namespace {

cplx herglotz_sum_scalar(cplx z, const double* c, const double* s, const double* w, std::size_t m) {
    const double zr = z.real();
    const double zi = z.imag();
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double nr = c[j] + zr;
        const double ni = s[j] + zi;
        const double dr = c[j] - zr;
        const double di = s[j] - zi;
        const double inv = w[j] / (dr * dr + di * di);
        acc_re += (nr * dr + ni * di) * inv;
        acc_im += (ni * dr - nr * di) * inv;
    }
    return {acc_re, acc_im};
}

KernelMoments ball_moments_scalar(const cplx* z, std::size_t n, const double* re, const double* im,
                                  std::size_t count, const double* value) {
    KernelMoments m;
    double sum_re = 0.0;
    double sum_im = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        // w = 1 - sum_k z_k conj(xi_k)
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
            const double tr = pr * wr - pi * wi;
            pi = pr * wi + pi * wr;
            pr = tr;
        }
        const double inv = 1.0 / (pr * pr + pi * pi);
        const double tr = (2.0 * pr * inv - 1.0) * value[i];
        const double ti = (-2.0 * pi * inv) * value[i];
        sum_re += tr;
        sum_im += ti;
        m.sumsq_re += tr * tr;
        m.sumsq_im += ti * ti;
    }
    m.sum = {sum_re, sum_im};
    return m;
}

double abs_dev_scalar(const double* re, const double* im, std::size_t count, cplx p) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double dr = re[i] - p.real();
        const double di = im[i] - p.imag();
        s += std::sqrt(dr * dr + di * di);
    }
    return s;
}

WeiszfeldSums weiszfeld_scalar(const double* re, const double* im, std::size_t count, cplx p, double eps) {
    WeiszfeldSums out;
    for (std::size_t i = 0; i < count; ++i) {
        const double dr = re[i] - p.real();
        const double di = im[i] - p.imag();
        const double dist = std::sqrt(dr * dr + di * di);
        if (dist <= eps) {
            ++out.coincident;
            continue;
        }
        const double inv = 1.0 / dist;
        out.num_re += re[i] * inv;
        out.num_im += im[i] * inv;
        out.den += inv;
    }
    return out;
}

}  // namespace

const Table& scalar_table() noexcept {
    static const Table table{herglotz_sum_scalar, ball_moments_scalar, abs_dev_scalar, weiszfeld_scalar};
    return table;
}

}  // namespace outerlab::simd::detail
