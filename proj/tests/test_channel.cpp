#include <doctest.h>

#include <cvqkd/channel.hpp>
#include <cvqkd/error.hpp>
#include <cvqkd/protocol.hpp>
#include <cvqkd/stats.hpp>

#include <cmath>
#include <vector>

#include "delta_method.hpp"

using namespace cvqkd;
using namespace cvqkd::channel;

namespace {

std::vector<double> gaussian_quadratures(std::size_t modes, double va, Rng& rng) {
    std::vector<double> q(2 * modes);
    for (auto& x : q) x = rng.normal(std::sqrt(va));
    return q;
}

// Alice's quadratures aligned with Bob's outcomes.
std::vector<double> aligned(const std::vector<double>& q, const Outcomes& o, Detection det) {
    if (det == Detection::Heterodyne) return q;
    std::vector<double> x(o.y.size());
    for (std::size_t m = 0; m < x.size(); ++m) x[m] = q[2 * m + o.basis[m]];
    return x;
}

}  // namespace

TEST_CASE("distance_to_T") {
    CHECK(distance_to_T(0.0) == 1.0);
    CHECK(distance_to_T(50.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(distance_to_T(100.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK_THROWS_AS(distance_to_T(-1.0), Error);
}

TEST_CASE("shot noise") {
    Rng rng(1);
    const std::vector<double> vac(2000000, 0.0);
    const auto hom = transmit_measure(vac, {1.0, 0.0, 1.0, Detection::Homodyne, false}, rng);
    CHECK(hom.y.size() == 1000000);
    CHECK(stats::variance(hom.y) == doctest::Approx(1.0).epsilon(0.01));
    const auto het = transmit_measure(vac, {1.0, 0.0, 1.0, Detection::Heterodyne, false}, rng);
    CHECK(het.y.size() == 2000000);
    CHECK(stats::variance(het.y) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("lossy noisy homodyne variance") {
    Rng rng(2);
    const auto q = gaussian_quadratures(1000000, 0.7, rng);
    const auto o = transmit_measure(q, {0.1, 0.01, 1.0, Detection::Homodyne, false}, rng);
    CHECK(stats::variance(o.y) == doctest::Approx(1.071).epsilon(0.01));
    std::size_t ones = 0;
    for (auto b : o.basis) ones += b;
    CHECK(std::abs(static_cast<double>(ones) - 500000.0) < 4.0 * 500.0);
}

TEST_CASE("snr") {
    CHECK(snr({1.0, 0.0, 1.0, Detection::Homodyne, false}, 3.0) == doctest::Approx(3.0));
    CHECK(snr({0.1, 0.0, 1.0, Detection::Homodyne, false}, 0.5) == doctest::Approx(0.05));
    const double h = snr({0.3, 0.0, 0.6, Detection::Homodyne, false}, 0.8);
    const double e = snr({0.3, 0.0, 0.6, Detection::Heterodyne, false}, 0.8);
    CHECK(h / e == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("parameter validation") {
    Rng rng(3);
    const std::vector<double> q(4, 0.0);
    CHECK_THROWS_AS(transmit_measure(q, {1.5, 0.0, 1.0, Detection::Homodyne, false}, rng), Error);
    CHECK_THROWS_AS(transmit_measure(q, {0.5, -0.1, 1.0, Detection::Homodyne, false}, rng), Error);
    CHECK_THROWS_AS(transmit_measure(q, {0.5, 0.0, 0.0, Detection::Homodyne, false}, rng), Error);
    const std::vector<double> odd(3, 0.0);
    CHECK_THROWS_AS(transmit_measure(odd, {0.5, 0.0, 1.0, Detection::Homodyne, false}, rng), Error);
}

TEST_CASE("non-Gaussian noise") {
    const ChannelParams p{0.4, 0.02, 1.0, Detection::Homodyne, false};
    Rng r1(4), r2(4), rq(5);
    const auto q = gaussian_quadratures(200000, 0.5, rq);
    const auto a = transmit_measure(q, p, r1);
    const auto b = add_non_gaussian_noise(q, p, {NoiseShape::Gaussian, -1.0}, r2);
    const auto ks = stats::ks_test(b.y, [&](double y) {
        return stats::normal_cdf(y / std::sqrt(1.0 + p.t_eff() * (0.5 + p.xi)));
    });
    CHECK(ks.p_value > 0.01);
    CHECK(stats::variance(a.y) == doctest::Approx(stats::variance(b.y)).epsilon(0.02));

    Rng r3(6);
    const std::vector<double> z(2000, 0.3);
    const auto zero = add_non_gaussian_noise(z, {1.0, 0.0, 1.0, Detection::Heterodyne, false},
                                             {NoiseShape::Zero, -1.0}, r3);
    for (double y : zero.y) CHECK(y == 0.3);
    CHECK_THROWS_AS(add_non_gaussian_noise(z, p, {NoiseShape::Cauchy, -1.0}, r3), Error);
}

TEST_CASE("uniform noise leaves the second-moment estimates unchanged") {
    const ChannelParams p{0.1, 0.01, 1.0, Detection::Heterodyne, false};
    const double va = 0.7;
    Rng rq(7), rn(8);
    const auto q = gaussian_quadratures(500000, va, rq);
    const auto o = add_non_gaussian_noise(q, p, {NoiseShape::Uniform, -1.0}, rn);
    const auto x = aligned(q, o, p.detection);
    const auto e = protocol::estimate_channel(x, o.y, va, noise_floor(p.detection));
    const auto s = delta::estimator_sigma(x, o.y, va, noise_floor(p.detection));
    CHECK(std::abs(e.T - 0.1) < 3.0 * s.T);
    CHECK(std::abs(e.xi - 0.01) < 3.0 * s.xi);
}
