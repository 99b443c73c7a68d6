#include <doctest.h>

#include <cmath>
#include <vector>

#include "outerlab/simd/batch.hpp"
#include "outerlab/sphere_geometry.hpp"

using namespace outerlab;
using simd::Backend;

namespace {

struct BackendGuard {
    Backend saved = simd::active_backend();
    ~BackendGuard() { simd::set_backend(saved); }
};

bool close(double a, double b, double rel = 1e-12) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }
bool close(cplx a, cplx b, double rel = 1e-12) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

template <class F>
auto both(F&& f) {
    BackendGuard g;
    simd::set_backend(Backend::scalar);
    auto a = f();
    simd::set_backend(Backend::avx2);
    auto b = f();
    return std::pair{a, b};
}

}  // namespace

TEST_CASE("backend selection") {
    BackendGuard g;
    simd::set_backend(Backend::scalar);
    CHECK(simd::active_backend() == Backend::scalar);
    CHECK(std::string(simd::backend_name(Backend::scalar)) == "scalar");
    if (!simd::avx2_supported()) CHECK_THROWS(simd::set_backend(Backend::avx2));
}

TEST_CASE("herglotz_sum scalar path matches a direct complex evaluation") {
    SeededSampler s(1);
    BackendGuard g;
    simd::set_backend(Backend::scalar);
    for (std::size_t m : {1u, 7u, 256u}) {
        std::vector<double> c(m), sn(m), w(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double t = s.uniform(0.0, 6.283185307179586);
            c[j] = std::cos(t);
            sn[j] = std::sin(t);
            w[j] = s.uniform(-1.0, 1.0);
        }
        const cplx z = std::polar(0.9 * s.uniform(), s.uniform(0.0, 6.0));
        cplx expect{0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            const cplx e{c[j], sn[j]};
            expect += w[j] * (e + z) / (e - z);
        }
        CHECK(close(simd::herglotz_sum(z, c, sn, w), expect));
    }
}

TEST_CASE("scalar and AVX2 kernels agree") {
    if (!simd::avx2_supported()) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    SeededSampler s(2);
    // Odd sizes exercise the vector tails.
    for (std::size_t m : {1u, 3u, 4u, 5u, 17u, 1000u, 4099u}) {
        std::vector<double> c(m), sn(m), w(m), re(m), im(m), value(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double t = s.uniform(0.0, 6.283185307179586);
            c[j] = std::cos(t);
            sn[j] = std::sin(t);
            w[j] = s.uniform(-2.0, 1.0);
            re[j] = s.normal();
            im[j] = s.normal();
            value[j] = s.uniform(-3.0, 0.0);
        }
        re[0] = 0.25;  // one point coincident with the pivot below
        im[0] = -0.5;
        const cplx z = std::polar(0.95 * s.uniform(), s.uniform(0.0, 6.0));
        const auto [hs, ha] = both([&] { return simd::herglotz_sum(z, c, sn, w); });
        CHECK(close(ha, hs));

        const cplx pivot{0.25, -0.5};
        const auto [as, aa] = both([&] { return simd::abs_dev_sum(re, im, pivot); });
        CHECK(close(aa, as));

        const auto [ws, wa] = both([&] { return simd::weiszfeld_sums(re, im, pivot, 1e-14); });
        CHECK(wa.coincident == ws.coincident);
        CHECK(ws.coincident == 1);
        CHECK(close(wa.num_re, ws.num_re));
        CHECK(close(wa.num_im, ws.num_im));
        CHECK(close(wa.den, ws.den));

        for (std::size_t n : {1u, 2u, 3u}) {
            const auto pts = sample_sphere(n, m, s);
            simd::SoaPoints soa(n, m);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t k = 0; k < n; ++k) soa.set(i, k, pts[i][k]);
            std::vector<cplx> zz(n);
            const auto dir = sample_sphere(n, 1, s).front();
            for (std::size_t k = 0; k < n; ++k) zz[k] = 0.9 * dir[k];
            const auto [ms, ma] = both([&] { return simd::ball_herglotz_moments(zz, soa, value); });
            CHECK(close(ma.sum, ms.sum));
            CHECK(close(ma.sumsq_re, ms.sumsq_re));
            CHECK(close(ma.sumsq_im, ms.sumsq_im));
        }
    }
}

TEST_CASE("ball_herglotz_moments matches the term-wise definition") {
    SeededSampler s(3);
    const std::size_t n = 3, m = 101;
    const auto pts = sample_sphere(n, m, s);
    simd::SoaPoints soa(n, m);
    std::vector<double> value(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) soa.set(i, k, pts[i][k]);
        value[i] = s.uniform(-1.0, 1.0);
    }
    const std::vector<cplx> z{0.3, cplx{0.0, -0.2}, 0.1};
    cplx sum{0.0, 0.0};
    double sr = 0.0, si = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const cplx t = (2.0 * std::pow(1.0 - inner(z, pts[i].coords()), -3.0) - 1.0) * value[i];
        sum += t;
        sr += t.real() * t.real();
        si += t.imag() * t.imag();
    }
    for (Backend b : {Backend::scalar, Backend::avx2}) {
        if (b == Backend::avx2 && !simd::avx2_supported()) continue;
        BackendGuard g;
        simd::set_backend(b);
        const auto got = simd::ball_herglotz_moments(z, soa, value);
        CHECK(close(got.sum, sum));
        CHECK(close(got.sumsq_re, sr));
        CHECK(close(got.sumsq_im, si));
    }
}
