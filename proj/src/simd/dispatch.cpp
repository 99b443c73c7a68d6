#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "outerlab/simd/batch.hpp"

namespace outerlab::simd {

namespace {

Backend initial_backend() noexcept {
    const bool avx2 = avx2_supported();
    if (const char* env = std::getenv("OUTERLAB_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && avx2) return Backend::avx2;
    }
    return avx2 ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() noexcept {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

const detail::Table& table() noexcept {
    if (current().load(std::memory_order_relaxed) == Backend::avx2) return *detail::avx2_table();
    return detail::scalar_table();
}

}  // namespace

bool avx2_supported() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    static const bool ok = detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
                           __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
    if (backend == Backend::avx2 && !avx2_supported()) throw std::runtime_error("AVX2 backend not available");
    current().store(backend, std::memory_order_relaxed);
}

const char* backend_name(Backend backend) noexcept { return backend == Backend::avx2 ? "avx2" : "scalar"; }

cplx herglotz_sum(cplx z, std::span<const double> cos, std::span<const double> sin, std::span<const double> weight) {
    return table().herglotz_sum(z, cos.data(), sin.data(), weight.data(), weight.size());
}

KernelMoments ball_herglotz_moments(std::span<const cplx> z, const SoaPoints& xi, std::span<const double> value) {
    return table().ball_herglotz_moments(z.data(), xi.n, xi.re.data(), xi.im.data(), xi.count, value.data());
}

double abs_dev_sum(std::span<const double> re, std::span<const double> im, cplx pivot) {
    return table().abs_dev_sum(re.data(), im.data(), re.size(), pivot);
}

WeiszfeldSums weiszfeld_sums(std::span<const double> re, std::span<const double> im, cplx pivot, double eps) {
    return table().weiszfeld_sums(re.data(), im.data(), re.size(), pivot, eps);
}

}  // namespace outerlab::simd
