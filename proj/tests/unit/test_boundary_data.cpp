#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "outerlab/boundary_data.hpp"
#include "outerlab/errors.hpp"
#include "outerlab/outer_eval.hpp"

using namespace outerlab;

namespace {

constexpr double kPi = std::numbers::pi;
// Cl_2(pi/3), Clausen function.
constexpr double kClausenPiThird = 1.0149416064096536250;

FamilySpec fam(std::string name, std::map<std::string, double> params = {}, std::string base = {}) {
    return FamilySpec{std::move(name), std::move(params), std::move(base)};
}

}  // namespace

TEST_CASE("constant and power families") {
    const auto one = make_modulus(fam("constant"), 2);
    SeededSampler s(1);
    for (const auto& z : sample_sphere(2, 100, s)) CHECK(one(z) == 1.0);
    CHECK(make_modulus(fam("constant", {{"c", 3.0}}), 1).at_angle(0.7) == 3.0);

    const auto dp = make_modulus(fam("distance_power", {{"beta", 0.5}}), 1);
    CHECK(dp.at_angle(kPi) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(dp.at_angle(0.0) == kDefaultFloor);
    CHECK(dp.clamp_events() == 1);
    CHECK(dp.breakpoints() == std::vector<double>{0.0});

    const auto cusp = make_modulus(fam("holder_cusp", {{"alpha", 0.5}}), 1);
    CHECK(cusp.at_angle(kPi) == 1.0);
    CHECK(cusp.at_angle(0.1) == doctest::Approx(std::sqrt(2.0 * std::sin(0.05))).epsilon(1e-15));
    CHECK(cusp.breakpoints().size() == 3);

    const auto c2 = make_modulus(fam("holder_cusp", {{"alpha", 0.5}}), 2, 1e-9);
    CHECK(c2(SpherePoint::north(2)) == 1e-9);
    const SpherePoint t({cplx{std::cos(0.01), std::sin(0.01)}, 0.0});
    CHECK(c2(t) == doctest::Approx(std::sqrt(2.0 * std::sin(0.005))).epsilon(1e-12));
}

TEST_CASE("holder_cusp satisfies its certificate on 1e5 samples") {
    const auto phi = make_modulus(fam("holder_cusp", {{"alpha", 0.5}}), 2);
    const double f1 = phi(SpherePoint::north(2));
    CHECK(f1 == kDefaultFloor);
    SeededSampler s(2);
    for (const auto& t : sample_sphere(2, 100000, s))
        REQUIRE(std::abs(phi(t) - f1) <= std::sqrt(niso_distance(t, SpherePoint::north(2))) + kDefaultFloor);
}

TEST_CASE("family errors") {
    CHECK_THROWS_AS(make_modulus(fam("nope"), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("holder_cusp", {{"alpha", 1.0}}), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("holder_cusp", {{"alpha", 0.0}}), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("holder_cusp"), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("log_spike", {{"gamma", 0.0}}), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("log_spike", {{"gamma", -1.0}}), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("log_spike", {{"gamma", 0.5}}), 2), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("constant", {{"c", -1.0}}), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("constant", {{"beta", 1.0}}), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("lifted_1d", {{"beta", 0.5}}, "distance_power"), 1), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("lifted_1d", {}, ""), 2), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("constant"), 1, 0.0), ConfigError);
    CHECK_THROWS_AS(make_modulus(fam("constant"), 2).at_angle(0.0), DomainError);
    CHECK_THROWS_AS(make_modulus(fam("constant"), 2)(SpherePoint::north(3)), DomainError);
}

TEST_CASE("log_spike shape") {
    const auto psi = make_modulus(fam("log_spike", {{"gamma", 0.45}}), 1);
    CHECK(psi.at_angle(kPi / 2.0) == 1.0);
    CHECK(psi.at_angle(3.0) == 1.0);
    CHECK(psi.at_angle(0.1) == doctest::Approx(std::exp(-std::pow(0.1, -0.45))).epsilon(1e-14));
    CHECK(psi.at_angle(-0.1) == psi.at_angle(0.1));
    CHECK(psi.at_angle(0.0) == doctest::Approx(kDefaultFloor).epsilon(1e-12));
    const double mid = psi.at_angle(1.0);  // inside the join
    CHECK(mid > std::exp(-std::pow(1.0, -0.45)));
    CHECK(mid < 1.0);
    CHECK(psi.breakpoints().size() == 3);
}

TEST_CASE("log_spike log-modulus is p2-integrable and converges under refinement") {
    const double p2 = 2.0;
    const auto psi = make_modulus(fam("log_spike", {{"gamma", 0.9 / p2}}), 1);
    std::vector<double> v;
    for (std::size_t m : {1u << 12, 1u << 14, 1u << 16, 1u << 18}) v.push_back(log_lp_norm_circle(psi, p2, m));
    for (double x : v) CHECK(std::isfinite(x));
    CHECK(std::abs(v[3] - v[2]) < std::abs(v[1] - v[0]));
    CHECK(std::abs(v[3] - v[2]) < 1e-3 * v[3]);
}

TEST_CASE("lifted_1d profiles evaluate the disc outer modulus on zeta_1") {
    const auto phi = make_modulus(fam("lifted_1d", {{"beta", 0.5}}, "distance_power"), 2);
    REQUIRE(phi.base() != nullptr);
    CHECK(phi.base()->descriptor().family == "distance_power");
    SeededSampler s(3);
    for (const auto& z : sample_sphere(2, 50, s))
        CHECK(phi(z) == doctest::Approx(std::pow(std::abs(1.0 - z[0]), 0.5)).epsilon(1e-9));
}

TEST_CASE("holder constants") {
    SeededSampler s(4);
    const auto c = make_modulus(fam("constant", {{"c", 2.0}}), 2);
    CHECK(holder_constant_at(c, SpherePoint::north(2), 0.5, 2400, s).c0 == 0.0);

    const auto cusp = make_modulus(fam("holder_cusp", {{"alpha", 0.5}}), 2);
    const auto cert = holder_constant_at(cusp, SpherePoint::north(2), 0.5, 4800, s);
    CHECK(cert.c0 <= 1.0 + 1e-6);
    CHECK(cert.c0 > 0.9);
    CHECK(cert.sample_count == 4800);
    CHECK(cert.shell_max.size() == 24);

    SeededSampler s2(5);
    const auto twice = holder_constant_at(cusp, SpherePoint::north(2), 0.5, 9600, s2);
    CHECK(std::abs(twice.c0 - cert.c0) <= 0.1 * cert.c0);

    // Probing with alpha' > alpha: the shell maxima blow up like d^{alpha - alpha'}.
    const auto over = holder_constant_at(cusp, SpherePoint::north(2), 0.8, 4800, s);
    CHECK(over.shell_max.back() > 50.0 * over.shell_max[2]);
    for (std::size_t k = 3; k < over.shell_max.size(); ++k) CHECK(over.shell_max[k] > over.shell_max[k - 1]);

    CHECK_THROWS_AS(holder_constant_at(cusp, SpherePoint::north(2), 1.0, 10, s), DomainError);
}

TEST_CASE("log L^p norms") {
    SeededSampler s(6);
    const auto one = log_lp_norm(make_modulus(fam("constant"), 2), 2.0, 1000, s);
    CHECK(one.value == 0.0);
    CHECK(one.standard_error == 0.0);
    const auto e = log_lp_norm(make_modulus(fam("constant", {{"c", std::exp(1.0)}}), 3), 3.0, 1000, s);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(log_lp_norm(make_modulus(fam("constant"), 2), 0.5, 1000, s), DomainError);

    // Successive doublings agree within 3 combined standard errors.
    const auto cusp = make_modulus(fam("holder_cusp", {{"alpha", 0.5}}), 2);
    LogNormEstimate prev = log_lp_norm(cusp, 2.0, 5000, s);
    for (std::size_t count : {10000u, 20000u, 40000u}) {
        auto sub = s.substream(count);
        const auto cur = log_lp_norm(cusp, 2.0, count, sub);
        CHECK(std::abs(cur.value - prev.value) < 3.0 * std::hypot(cur.standard_error, prev.standard_error));
        CHECK_FALSE(cur.clamp_dominated);
        prev = cur;
    }
}

TEST_CASE("clamp-dominated estimates are flagged") {
    // log phi = -27.6 on the floor versus O(1) elsewhere; a floor this high is hit often.
    const auto phi = make_modulus(fam("distance_power", {{"beta", 4.0}}), 1, 1e-3);
    SeededSampler s(7);
    const auto est = log_lp_norm(phi, 1.0, 20000, s);
    CHECK(est.clamp_fraction > 0.01);
    CHECK(est.clamp_dominated);
}

TEST_CASE("lifted log-spike B_p matches the slice formula") {
    const double p = 2.0;
    const auto phi = make_modulus(fam("lifted_1d", {{"gamma", 0.45}}, "log_spike"), 2);
    auto g = std::make_shared<const DiscOuterEvaluator>(*phi.base());
    const double slice = slice_integral([&](cplx l) { return std::pow(std::abs(std::log(g->modulus(l))), p); }, 2,
                                        SliceGrid{64, 512});
    SeededSampler s(8);
    const auto mc = log_lp_norm(phi, p, 40000, s);
    CHECK(std::abs(mc.value - slice) < 3.0 * mc.standard_error);
}

TEST_CASE("slice of a constant is 2 pi |log c|") {
    SeededSampler s(9);
    for (double c : {1.0, 0.5, 3.0}) {
        const auto rep = slice_constant([c](const SpherePoint&) { return cplx{c, 0.0}; }, 3, s, {16, 512});
        CHECK(std::abs(rep.b0 - 2.0 * kPi * std::abs(std::log(c))) < 1e-10);
        CHECK(rep.per_direction.size() == 16);
        CHECK_FALSE(rep.flagged);
    }
}

TEST_CASE("slice of 1 - zeta_1 through the north pole") {
    // int_0^{2pi} |log |1 - e^{i theta}|| d theta = 4 Cl_2(pi/3).
    const auto f = [](const SpherePoint& z) { return 1.0 - z[0]; };
    const double exact = 4.0 * kClausenPiThird;
    double prev_err = INFINITY;
    for (std::size_t m : {1u << 10, 1u << 12, 1u << 14}) {
        std::uint64_t clamps = 0;
        const double v = slice_integral_along(f, SpherePoint::north(2), m, kDefaultFloor, &clamps);
        const double err = std::abs(v - exact);
        CHECK(clamps >= 1);
        CHECK(err < 2.0 * kPi / static_cast<double>(m));
        CHECK(err < prev_err);
        prev_err = err;
    }
    SeededSampler s(10);
    const auto rep = slice_constant(f, 2, s, {8, 4096});
    CHECK(rep.worst_direction == 0);
    CHECK(rep.flagged);
    CHECK(std::isfinite(rep.b0));
}

TEST_CASE("slices of the lift reduce to one-dimensional integrals") {
    auto g = std::make_shared<const DiscOuterEvaluator>(make_modulus(fam("distance_power", {{"beta", 0.5}}), 1));
    const auto f0 = lift_boundary(g, 3);
    const std::size_t m = 1024;
    const double h = 2.0 * kPi / static_cast<double>(m);
    SeededSampler s(11);
    for (const auto& xi : sample_sphere(3, 5, s)) {
        double expect = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            expect += h * std::abs(std::log(std::abs(g->closure_value(xi[0] * std::polar(1.0, h * j)))));
        CHECK(slice_integral_along(f0, xi, m, kDefaultFloor) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("lifted slices are direction independent when |xi_1| = 1") {
    auto g = std::make_shared<const DiscOuterEvaluator>(make_modulus(fam("distance_power", {{"beta", 0.5}}), 1));
    const auto f0 = lift_boundary(g, 2);
    const std::size_t m = 4096;
    const double base = slice_integral_along(f0, SpherePoint::north(2), m, kDefaultFloor);
    CHECK(std::abs(base - 2.0 * kClausenPiThird) < 2.0 * kPi / m);
    for (double a : {0.3, 1.1, 2.5}) {
        const SpherePoint xi({std::polar(1.0, a), 0.0});
        CHECK(std::abs(slice_integral_along(f0, xi, m, kDefaultFloor) - base) < 2.0 * kPi / m);
    }
}

TEST_CASE("clamp counters are shared between copies") {
    const auto a = make_modulus(fam("distance_power", {{"beta", 1.0}}), 1);
    const auto b = a;
    (void)b.at_angle(0.0);
    CHECK(a.clamp_events() == 1);
    bool clamped = false;
    (void)a.at_angle(1.0, &clamped);
    CHECK_FALSE(clamped);
}
