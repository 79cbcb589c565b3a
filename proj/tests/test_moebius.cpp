#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "halfspace/kernels.hpp"
#include "halfspace/moebius.hpp"

using namespace halfspace;

TEST_CASE("inversion formula at pinned points", "[moebius]") {
    const MoebiusMap<2> unit({0.0, 0.0}, 1.0);
    const Point<2> p = unit.invert({0.0, 2.0});
    CHECK(p[0] == 0.0);
    CHECK(p[1] == Catch::Approx(0.5).epsilon(1e-15));

    const MoebiusMap<3> off({1.0, 0.0, 0.0}, 2.0);
    const Point<3> q = off.invert({1.0, 0.0, 1.0});
    CHECK(q[0] == Catch::Approx(1.0));
    CHECK(q[1] == Catch::Approx(0.0));
    CHECK(q[2] == Catch::Approx(4.0));
}

TEST_CASE("inversion is an involution fixing its sphere", "[moebius]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const MoebiusMap<3> map({uniform(rng, -2, 2), uniform(rng, -2, 2), 0.0},
                                log_uniform(rng, 0.2, 3.0));
        const Point<3> y{uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, 1e-2, 3.0)};
        const Point<3> twice = map.invert(map.invert(y));
        for (int i = 0; i < 3; ++i) CHECK(twice[i] == Catch::Approx(y[i]).margin(1e-12));
        CHECK(map.invert(y)[2] >= 0.0);  // half space maps to itself

        // point on the sphere stays put
        const double phi = uniform(rng, 0.1, pi - 0.1);
        Point<3> s = map.center;
        s[0] += map.radius * std::cos(phi);
        s[2] += map.radius * std::sin(phi);
        const Point<3> fixed = map.invert(s);
        for (int i = 0; i < 3; ++i) CHECK(fixed[i] == Catch::Approx(s[i]).margin(1e-12));
    }
}

TEST_CASE("inversion rejects its center and bad parameters", "[moebius]") {
    const MoebiusMap<2> map({0.5, 0.0}, 1.0);
    CHECK_THROWS_AS(map.invert({0.5, 0.0}), singularity_error);
    CHECK_THROWS_AS(MoebiusMap<2>({0.0, 0.1}, 1.0), validation_error);
    CHECK_THROWS_AS(MoebiusMap<2>({0.0, 0.0}, 0.0), validation_error);
    CHECK_THROWS_AS(MoebiusMap<2>({0.0, 0.0}, -2.0), validation_error);
}

TEST_CASE("transform of a constant is the pure inversion factor", "[moebius]") {
    const ScalarFn<3> one = [](const Point<3>&) { return 1.0; };
    const auto v = kelvin<3>(one, MoebiusMap<3>({0, 0, 0}, 1.0), WeightExponent(0.0));
    CHECK(v.variant() == KelvinVariant::standard);
    CHECK(v({0.0, 0.0, 2.0}) == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(v({0.0, 2.0, 0.0}) == Catch::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(v({0.0, 0.0, 0.0}), singularity_error);
}

TEST_CASE("logarithmic variant engages exactly at the special exponent", "[moebius]") {
    const ScalarFn<2> zero = [](const Point<2>&) { return 0.0; };
    const auto v = kelvin<2>(zero, MoebiusMap<2>({0, 0}, 1.0), WeightExponent(0.0));  // a = 2-n
    CHECK(v.variant() == KelvinVariant::logarithmic);
    const double e = std::exp(1.0);
    CHECK(v({e, 0.0}) == Catch::Approx(-1.0).epsilon(1e-14));

    const auto w = kelvin<2>(zero, MoebiusMap<2>({0, 0}, 1.0), WeightExponent(1e-12));
    CHECK(w.variant() == KelvinVariant::standard);
}

TEST_CASE("double transform restores the function", "[moebius]") {
    std::mt19937_64 rng(5);
    const ScalarFn<2> base = [](const Point<2>& y) {
        return std::pow(y[1], 0.5) + std::sin(y[0]) + 2.0;
    };
    const MoebiusMap<2> map({0.3, 0.0}, 1.3);

    SECTION("standard variant") {
        const WeightExponent a(0.5);
        const auto once = kelvin<2>(base, map, a);
        const auto twice = kelvin<2>(ScalarFn<2>(once), map, a);
        for (int trial = 0; trial < 50; ++trial) {
            const Point<2> y{uniform(rng, -2, 2), uniform(rng, 0.05, 3.0)};
            CHECK(twice(y) == Catch::Approx(base(y)).margin(1e-12));
        }
    }
    SECTION("logarithmic variant") {
        const WeightExponent a(0.0);
        const auto once = kelvin<2>(base, map, a);
        const auto twice = kelvin<2>(ScalarFn<2>(once), map, a);
        for (int trial = 0; trial < 50; ++trial) {
            const Point<2> y{uniform(rng, -2, 2), uniform(rng, 0.05, 3.0)};
            CHECK(twice(y) == Catch::Approx(base(y)).margin(1e-12));
        }
    }
}

TEST_CASE("transform sends the fundamental kernels to the family", "[moebius]") {
    std::mt19937_64 rng(9);
    for (double a_val : {-0.5, 0.5}) {
        const WeightExponent a(a_val);
        const MoebiusMap<3> map({0, 0, 0}, 1.0);

        // gamma_n = |x|^{-(n-2+a)} maps to the constant 1.
        const ScalarFn<3> gn = [&](const Point<3>& y) {
            return eval_kernel_radial(KernelSpec::gamma_neumann_type(a_val, 3),
                                      std::hypot(y[0], y[1]), y[2]);
        };
        const auto gn_t = kelvin<3>(gn, map, a);

        // x_n^{1-a} maps to gamma_d.
        const ScalarFn<3> fam = [&](const Point<3>& y) { return std::pow(y[2], 1.0 - a_val); };
        const auto fam_t = kelvin<3>(fam, map, a);

        for (int trial = 0; trial < 50; ++trial) {
            const Point<3> y{uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 0.05, 2.5)};
            CHECK(gn_t(y) == Catch::Approx(1.0).epsilon(1e-12));
            const double gd = eval_kernel_radial(KernelSpec::gamma_dirichlet_type(a_val, 3),
                                                 std::hypot(y[0], y[1]), y[2]);
            CHECK(fam_t(y) == Catch::Approx(gd).epsilon(1e-12));
        }
    }
}
