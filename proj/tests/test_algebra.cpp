#include <doctest.h>

#include <cvqkd/algebra.hpp>
#include <cvqkd/error.hpp>
#include <cvqkd/stats.hpp>

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"

using namespace cvqkd;
using namespace cvqkd::algebra;

namespace {

Element random_element(int d, Rng& rng) {
    std::vector<double> c(static_cast<std::size_t>(d));
    for (auto& x : c) x = rng.normal();
    return Element(std::span<const double>(c));
}

std::vector<double> as_vec(const Element& e) { return {e.coords().begin(), e.coords().end()}; }

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Exact CDF of one coordinate of a uniform point on S^{n-1}.
double sphere_marginal_cdf(double c, std::size_t n) {
    if (c <= -1.0) return 0.0;
    if (c >= 1.0) return 1.0;
    const double half = 0.5 * boost::math::ibeta(0.5, 0.5 * (static_cast<double>(n) - 1.0), c * c);
    return c >= 0.0 ? 0.5 + half : 0.5 - half;
}

}  // namespace

TEST_CASE("basic products") {
    CHECK(mul(Element{2.0}, Element{3.0}) == Element{6.0});
    Rng rng(3);
    const auto x = random_element(8, rng);
    CHECK(mul(Element::identity(8), x) == x);
    CHECK(mul(Element{0, 1, 0, 0}, Element{0, 0, 1, 0}) == Element{0, 0, 0, 1});
}

TEST_CASE("quaternion product reproduces the Hamilton table") {
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
            std::vector<double> a(4, 0.0), b(4, 0.0), want(4, 0.0);
            a[static_cast<std::size_t>(p)] = 1.0;
            b[static_cast<std::size_t>(q)] = 1.0;
            const auto [s, i] = oracle::hamilton(p, q);
            want[static_cast<std::size_t>(i)] = s;
            const auto got = mul(Element(std::span<const double>(a)), Element(std::span<const double>(b)));
            CHECK(as_vec(got) == want);
        }
}

TEST_CASE("products agree with an independent Cayley-Dickson construction") {
    Rng rng(11);
    for (int d : {1, 2, 4, 8})
        for (int rep = 0; rep < 50; ++rep) {
            const auto a = random_element(d, rng), b = random_element(d, rng);
            const auto want = oracle::cd_mul(as_vec(a), as_vec(b));
            const auto got = as_vec(mul(a, b));
            for (int i = 0; i < d; ++i) CHECK(got[static_cast<std::size_t>(i)] == doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-12));
            // norm is multiplicative in every division algebra
            CHECK(mul(a, b).norm() == doctest::Approx(a.norm() * b.norm()).epsilon(1e-12));
        }
}

TEST_CASE("octonions are alternative but not associative") {
    Rng rng(5);
    const auto x = random_element(8, rng), y = random_element(8, rng), z = random_element(8, rng);
    const auto l = mul(mul(x, x), y), r = mul(x, mul(x, y));
    for (int i = 0; i < 8; ++i) CHECK(l[i] == doctest::Approx(r[i]).epsilon(1e-12));
    const auto p = mul(mul(x, y), z), q = mul(x, mul(y, z));
    double diff = 0.0;
    for (int i = 0; i < 8; ++i) diff += std::abs(p[i] - q[i]);
    CHECK(diff > 1e-6);
}

TEST_CASE("inverse") {
    CHECK(inv(Element{0.0, 1.0}) == Element{0.0, -1.0});
    CHECK(inv(Element{4.0}) == Element{0.25});
    Rng rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        auto x = random_element(8, rng);
        const double n = x.norm();
        std::vector<double> c = as_vec(x);
        for (auto& v : c) v /= n;
        x = Element(std::span<const double>(c));
        const auto e = mul(x, inv(x));
        for (int i = 0; i < 8; ++i) CHECK(e[i] == doctest::Approx(i == 0 ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
    CHECK_THROWS_AS(inv(Element::zero(4)), Error);
}

TEST_CASE("dimension errors") {
    CHECK_THROWS_AS(Element({1.0, 2.0, 3.0}), Error);
    CHECK_THROWS_AS(mul(Element{1.0, 0.0}, Element{1.0, 0.0, 0.0, 0.0}), Error);
    CHECK_FALSE(is_division_dimension(16));
}

TEST_CASE("sample_unit") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const auto u1 = sample_unit(1, rng);
        CHECK(std::abs(u1[0]) == 1.0);
        const auto u4 = sample_unit(4, rng);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(u4[i]) == 0.5);
    }
    const int n = 100000;
    std::vector<double> sum(8, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto u = sample_unit(8, rng);
        for (int j = 0; j < 8; ++j) sum[static_cast<std::size_t>(j)] += u[j];
    }
    // each coordinate is +-1/sqrt(8) with variance 1/8
    const double four_sigma = 4.0 * std::sqrt(n / 8.0);
    for (double s : sum) CHECK(std::abs(s) < four_sigma);
}

TEST_CASE("householder") {
    const std::vector<double> u{1.0, 2.0, -2.0};
    const auto H = householder(u);
    const auto hu = H.apply(std::span<const double>(u));
    for (int i = 0; i < 3; ++i) CHECK(hu[static_cast<std::size_t>(i)] == doctest::Approx(-u[static_cast<std::size_t>(i)]));
    const std::vector<double> v{2.0, 1.0, 2.0};  // orthogonal to u
    const auto hv = H.apply(std::span<const double>(v));
    for (int i = 0; i < 3; ++i) CHECK(hv[static_cast<std::size_t>(i)] == doctest::Approx(v[static_cast<std::size_t>(i)]));
    Rng rng(1);
    std::vector<double> w(3);
    for (auto& x : w) x = rng.normal();
    const auto ww = H.apply(std::span<const double>(H.apply(std::span<const double>(w))));
    for (int i = 0; i < 3; ++i) CHECK(ww[static_cast<std::size_t>(i)] == doctest::Approx(w[static_cast<std::size_t>(i)]).epsilon(1e-10));
}

TEST_CASE("sample_orthogonal preserves norms and inner products") {
    Rng rng(2);
    const std::size_t n = 40;
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{7}, n}) {
        const auto R = sample_orthogonal(n, k, rng);
        CHECK(R.reflector_count() <= k);
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = rng.normal();
        for (auto& v : y) v = rng.normal();
        const auto rx = R.apply(std::span<const double>(x)), ry = R.apply(std::span<const double>(y));
        CHECK(std::sqrt(dot(rx, rx)) == doctest::Approx(std::sqrt(dot(x, x))).epsilon(1e-10));
        CHECK(dot(rx, ry) == doctest::Approx(dot(x, y)).epsilon(1e-9).scale(1.0));
        const auto back = R.apply_inverse(std::span<const double>(rx));
        for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-10).scale(1.0));
        if (k == 0) CHECK(rx == x);
    }
}

TEST_CASE("image of e1 is uniform on the sphere") {
    Rng rng(77);
    for (std::size_t k : {std::size_t{1}, std::size_t{16}}) {
        const std::size_t n = 16;
        std::vector<double> first;
        for (int rep = 0; rep < 4000; ++rep) {
            const auto R = sample_orthogonal(n, k, rng);
            std::vector<double> e(n, 0.0);
            e[0] = 1.0;
            R.apply(std::span<double>(e));
            first.push_back(e[0]);
        }
        const auto ks = stats::ks_test(first, [n](double c) { return sphere_marginal_cdf(c, n); });
        CHECK(ks.p_value > 0.01);
    }
}

TEST_CASE("O(2) rotation angle is uniform") {
    Rng rng(8);
    std::vector<double> ang;
    for (int rep = 0; rep < 4000; ++rep) {
        const auto R = sample_orthogonal(2, 2, rng);
        const auto M = R.materialize();
        ang.push_back(std::atan2(M[2], M[0]) + M_PI);  // column 0 = R e1
    }
    const auto ks = stats::ks_test(ang, [](double a) { return std::clamp(a / (2.0 * M_PI), 0.0, 1.0); });
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("materialize, serialize and touch counts") {
    Rng rng(4);
    const std::size_t n = 16;
    const auto R = sample_orthogonal(n, n, rng);
    const auto M = R.materialize();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += M[r * n + i] * M[r * n + j];
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
        }
    const auto bytes = R.serialize();
    const auto R2 = OrthogonalTransform::deserialize(bytes);
    CHECK(R2.materialize() == M);
    CHECK_THROWS_AS(OrthogonalTransform::deserialize(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 3)), Error);

    // k reflectors on n coordinates cost O(n k), never O(n^2) for small k
    std::vector<double> v(1000, 1.0);
    std::size_t touched = 0;
    sample_orthogonal(1000, 3, rng).apply(std::span<double>(v), &touched);
    CHECK(touched <= 4 * 3 * 1000);
}
