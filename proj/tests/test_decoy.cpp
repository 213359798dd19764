#include <doctest.h>

#include <cvqkd/decoy.hpp>
#include <cvqkd/error.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"

using namespace cvqkd;
using namespace cvqkd::decoy;

TEST_CASE("photon-number laws") {
    const auto f = f_dist(8, 0.5, 60);
    CHECK(f.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.weights[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    const auto f8 = f_dist(8, 0.8, 60);
    for (int k = 0; k <= 60; ++k) {
        const double a = 0.8;
        const double lam = std::exp(-4 * a * a + 2 * k * std::log(2 * a) - std::lgamma(k + 1.0));
        CHECK(std::abs(f8.weights[static_cast<std::size_t>(k)] - lam) <= 1e-15);
    }
    const double a = 0.7;
    const auto g2 = g_dist(2, a, 40);
    for (int k = 0; k <= 40; ++k)
        CHECK(g2.weights[static_cast<std::size_t>(k)] ==
              doctest::Approx(std::pow(a * a, k) / std::pow(1 + a * a, k + 1)).epsilon(1e-12));
    for (int d : {2, 4, 8}) {
        const auto g = g_dist(d, a, 200);
        CHECK(g.weights[0] == doctest::Approx(std::pow(1 + a * a, -0.5 * d)).epsilon(1e-14));
        CHECK(g.mean() == doctest::Approx(0.5 * d * a * a).epsilon(1e-10));
        CHECK(g.mean() == doctest::Approx(f_dist(d, a, 200).mean()).epsilon(1e-10));
    }
}

TEST_CASE("POVM scale") {
    for (int d : {2, 4, 8})
        for (double a : {0.25, 0.5, 1.0}) {
            const auto s = povm_scale(d, a);
            CHECK(s.pi <= 1.0);
            const int n = 400;
            const auto f = f_dist(d, a, n), g = g_dist(d, a, n);
            double best = INFINITY;
            int arg = -1;
            for (int k = 0; k <= n; ++k) {
                const double r = g.weights[static_cast<std::size_t>(k)] / f.weights[static_cast<std::size_t>(k)];
                if (r < best) best = r, arg = k;
            }
            CHECK(s.pi == doctest::Approx(best).epsilon(1e-12));
            CHECK(s.k_star == arg);
            const double r0 = g.weights[0] / f.weights[0];
            CHECK(r0 == doctest::Approx(std::exp(0.5 * d * a * a) / std::pow(1 + a * a, 0.5 * d)).epsilon(1e-12));
            CHECK(r0 > 1.0);
        }
    // the rounded-up mean is not the minimiser in general
    CHECK(povm_scale(8, 1.0).k_star == 4);
    CHECK(povm_scale(8, 1.0).index_formula_k == 8);
}

TEST_CASE("success probabilities") {
    CHECK(p_succ(1, 1.0) == 0.25);
    for (double a : {0.25, 0.5, 1.0}) {
        CHECK(p_succ(1, a) <= p_succ(2, a));
        CHECK(p_succ(2, a) <= p_succ(4, a));
        CHECK(p_succ(4, a) <= p_succ(8, a));
    }
    CHECK(p_succ(2, 1.0) == doctest::Approx(0.679570457115).epsilon(1e-10));
    CHECK(p_succ(4, 1.0) == doctest::Approx(0.692724009275).epsilon(1e-10));
    CHECK(p_succ(8, 1.0) == doctest::Approx(0.699805389829).epsilon(1e-10));
    for (int d : {2, 4, 8}) CHECK(p_succ(d, 1e-3) > 0.999);
}

TEST_CASE("mixtures and trace distance") {
    const double a = 0.6;
    const int n = 60;
    const auto single = mixture_photon_dist({a * 2.0}, {1.0}, n);  // d = 8: radius^2 = 4 a^2
    const auto f = f_dist(8, a, n);
    CHECK(trace_distance(single, f) < 1e-15);
    const auto twice = mixture_photon_dist({a * 2.0, a * 2.0}, {0.3, 0.7}, n);
    CHECK(trace_distance(twice, single) < 1e-15);
    const auto mix = mixture_photon_dist({0.5, 1.5}, {0.25, 0.75}, n);
    CHECK(mix.mean() == doctest::Approx(0.25 * 0.25 + 0.75 * 2.25).epsilon(1e-12));

    PhotonNumberDistribution p{{1.0, 0.0}, 0.0}, q{{0.0, 1.0}, 0.0};
    CHECK(trace_distance(p, q) == 1.0);
    CHECK(trace_distance(p, p) == 0.0);

    const auto f2 = f_dist(2, 0.5, 39), g2 = g_dist(2, 0.5, 39);
    const double dense = oracle::trace_distance_d2(0.5, 40) + 0.5 * (f2.tail + g2.tail);
    CHECK(std::abs(trace_distance(f2, g2) - dense) < 1e-12);
}

TEST_CASE("decoy optimisation benchmark") {
    const auto dsn = optimize_decoy(2, 0.5, 0.5);
    CHECK(dsn.epsilon <= 1e-4);
    CHECK(dsn.radii.size() <= 12);
    CHECK(design_epsilon(dsn) == doctest::Approx(dsn.epsilon).epsilon(1e-9));
    double w = 0.0;
    for (double x : dsn.weights) w += x;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-12));

    std::stringstream io;
    write_design(io, dsn);
    const auto back = read_design(io);
    CHECK(back.radii == dsn.radii);
    CHECK(back.weights == dsn.weights);
    CHECK(design_epsilon(back) == doctest::Approx(dsn.epsilon).epsilon(1e-12));
}

TEST_CASE("p = 0 needs the decoy alone to imitate the Gaussian law") {
    const auto dsn = optimize_decoy(2, 0.5, 0.0);
    CHECK(dsn.epsilon < 1e-3);
}

TEST_CASE("feasibility boundary") {
    const double pi = povm_scale(2, 0.5).pi;
    CHECK_NOTHROW(optimize_decoy(2, 0.5, pi - 1e-9, {4, 0, 60, 5}));
    try {
        optimize_decoy(2, 0.5, pi + 1e-9);
        FAIL("expected infeasibility");
    } catch (const InfeasibleError& e) {
        CHECK(e.photon_number() == povm_scale(2, 0.5).k_star);
    }
    CHECK_THROWS_AS(optimize_decoy(3, 0.5, 0.5), Error);
    CHECK_THROWS_AS(optimize_decoy(2, 0.5, 1.0), Error);
}

TEST_CASE("mix probabilities") {
    const auto m = mix_probabilities(0.5, 0.5);
    CHECK(m.key == doctest::Approx(0.25));
    CHECK(m.gaussian == doctest::Approx(0.5));
    CHECK(m.decoy == doctest::Approx(0.25));
    CHECK(mix_probabilities(1.0, 0.3).decoy == 0.0);
    CHECK(mix_probabilities(0.5, 1.0).gaussian == 1.0);
}

TEST_CASE("design file errors") {
    std::istringstream bad("# cvqkd-decoy-design-v1\nd = 2\nalpha = x\n");
    CHECK_THROWS_AS(read_design(bad), ConfigError);
}
