#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kgflrw/spectrum.hpp"

using namespace kgflrw;

TEST_CASE("sphere S^3 ladder up to 15") {
    const auto sp = build_sphere(3, 1.0, 15.0);
    REQUIRE(sp.ladder.size() == 4);
    const double lam[4] = {0, 3, 8, 15};
    const std::int64_t mult[4] = {1, 4, 9, 16};
    for (int k = 0; k < 4; ++k) {
        CHECK(sp.ladder[k].lambda == lam[k]);
        CHECK(sp.ladder[k].mult == mult[k]);
    }
    CHECK(sp.R_gamma == 6.0);
}

TEST_CASE("sphere multiplicities for higher dimension") {
    // S^5: mult(k) = (2k+4)(k+3)!/(k! 4!)
    const auto sp = build_sphere(5, 1.0, 100.0);
    auto expect = [](std::int64_t k) {
        return (2 * k + 4) * (k + 1) * (k + 2) * (k + 3) / 24;
    };
    for (std::size_t k = 0; k < sp.ladder.size(); ++k) {
        INFO("k=" << k);
        CHECK(sp.ladder[k].mult == expect(static_cast<std::int64_t>(k)));
    }
}

TEST_CASE("torus T^3 ladder with unit frequencies") {
    const double two_pi = 2.0 * 3.14159265358979323846;
    const auto sp = build_torus({two_pi, two_pi, two_pi}, 2.0);
    REQUIRE(sp.ladder.size() == 3);
    CHECK(sp.ladder[0].lambda == 0.0);
    CHECK(sp.ladder[0].mult == 1);
    CHECK(std::fabs(sp.ladder[1].lambda - 1.0) < 1e-14);
    CHECK(sp.ladder[1].mult == 6);
    CHECK(std::fabs(sp.ladder[2].lambda - 2.0) < 1e-14);
    CHECK(sp.ladder[2].mult == 12);
    CHECK(sp.R_gamma == 0.0);
}

TEST_CASE("commensurate torus merges exactly") {
    const double two_pi = 2.0 * 3.14159265358979323846;
    // L = (2pi, pi, pi): squared frequencies 1, 4, 4 -> lambda = n1^2 + 4 n2^2 + 4 n3^2
    const auto sp = build_torus({two_pi, two_pi / 2, two_pi / 2}, 8.0);
    bool found = false;
    for (const auto& e : sp.ladder)
        if (std::fabs(e.lambda - 4.0) < 1e-14) {
            found = true;
            CHECK(e.mult == 6); // (±2,0,0), (0,±1,0), (0,0,±1)
        }
    CHECK(found);
}

TEST_CASE("cutoff below the first positive eigenvalue leaves constants only") {
    const auto sp = build_sphere(4, 1.0, 1.0); // lambda_1 = 4
    REQUIRE(sp.ladder.size() == 1);
    CHECK(sp.ladder[0].lambda == 0.0);
    CHECK(sp.ladder[0].mult == 1);
}

TEST_CASE("budget guard") {
    CHECK_THROWS_AS(build_sphere(3, 1.0, 1e9, 1000), cutoff_too_large);
    const double two_pi = 2.0 * 3.14159265358979323846;
    CHECK_THROWS_AS(build_torus({two_pi, two_pi, two_pi}, 1e8, 1000), cutoff_too_large);
}

TEST_CASE("shift and cut") {
    const double two_pi = 2.0 * 3.14159265358979323846;
    SECTION("threshold filter on a torus") {
        const auto sp = build_torus({two_pi, two_pi, two_pi}, 4.0);
        const auto sh = shift_and_cut(sp, 0.7, 0.5); // R_gamma = 0: mu = lambda
        for (const auto& e : sh.mu_ladder) CHECK(e.mu >= 0.5);
        CHECK(sh.mu_ladder.front().mu == 1.0);
    }
    SECTION("conformally shifted sphere is a perfect square ladder") {
        const auto sp = build_sphere(3, 1.0, 80.0);
        const auto sh = shift_and_cut(sp, 1.0 / 6.0, -1e300);
        for (std::size_t k = 0; k < sh.mu_ladder.size(); ++k) {
            const double expect = (static_cast<double>(k) + 1.0) * (static_cast<double>(k) + 1.0);
            CHECK(std::fabs(sh.mu_ladder[k].mu - expect) < 1e-12);
        }
    }
    SECTION("delta = -inf is the identity") {
        const auto sp = build_sphere(3, 1.0, 30.0);
        const auto sh = shift_and_cut(sp, 0.23, -std::numeric_limits<double>::infinity());
        REQUIRE(sh.mu_ladder.size() == sp.ladder.size());
        for (std::size_t k = 0; k < sh.mu_ladder.size(); ++k) {
            CHECK(sh.mu_ladder[k].mult == sp.ladder[k].mult);
            CHECK(std::fabs(sh.mu_ladder[k].mu - (sp.ladder[k].lambda + 0.23 * 6.0)) < 1e-12);
        }
    }
    SECTION("empty result throws") {
        const auto sp = build_sphere(3, 1.0, 10.0);
        CHECK_THROWS_AS(shift_and_cut(sp, 0.0, 1e6), empty_spectrum);
    }
}

TEST_CASE("zeta partial sums") {
    SECTION("single positive eigenvalue") {
        manifold_spectrum sp;
        sp.d = 3;
        sp.ladder = {{0.0, 1}, {4.0, 2}};
        const auto z = zeta_partial(sp, 2.0, 10);
        CHECK(std::fabs(z.partial_sum - 0.125) < 1e-15);
        CHECK(z.terms_used == 1);
    }
    SECTION("divergence guard at s <= d/2") {
        const auto sp = build_sphere(3, 1.0, 20.0);
        CHECK_THROWS_AS(zeta_partial(sp, 1.5, 10), divergent_series);
        CHECK_THROWS_AS(zeta_partial(sp, 1.0, 10), divergent_series);
    }
    SECTION("torus partial sums are Cauchy with tail control") {
        const double two_pi = 2.0 * 3.14159265358979323846;
        const auto sp2 = build_torus({two_pi, two_pi, two_pi}, 100.0);
        const auto sp3 = build_torus({two_pi, two_pi, two_pi}, 1000.0);
        const auto sp4 = build_torus({two_pi, two_pi, two_pi}, 10000.0, 8'000'000);
        const auto z2 = zeta_partial(sp2, 3.0, 1u << 30);
        const auto z3 = zeta_partial(sp3, 3.0, 1u << 30);
        const auto z4 = zeta_partial(sp4, 3.0, 1u << 30);
        CHECK(z3.partial_sum > z2.partial_sum);
        CHECK(z4.partial_sum > z3.partial_sum);
        CHECK(z3.partial_sum - z2.partial_sum <= z2.tail_bound);
        CHECK(z4.partial_sum - z3.partial_sum <= z3.tail_bound);
    }
    SECTION("monotone in s when all lambda >= 1") {
        const auto sp = build_sphere(3, 1.0, 200.0);
        const auto a = zeta_partial(sp, 2.0, 1u << 30);
        const auto b = zeta_partial(sp, 3.0, 1u << 30);
        CHECK(b.partial_sum <= a.partial_sum);
    }
}

TEST_CASE("l(d) values") {
    CHECK(l_of_d(3) == 2);
    CHECK(l_of_d(4) == 2);
    CHECK(l_of_d(5) == 2);
    CHECK(l_of_d(6) == 3);
    CHECK(l_of_d(7) == 3);
    CHECK_THROWS_AS(l_of_d(2), domain_error);
}

TEST_CASE("Weyl counting sanity") {
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int which = 0; which < 2; ++which) {
        const auto sp = which == 0 ? build_sphere(3, 1.0, 4000.0)
                                   : build_torus({two_pi, two_pi, two_pi}, 4000.0, 8'000'000);
        const double r1 = sp.counting(2000.0) / std::pow(2000.0, 1.5);
        const double r2 = sp.counting(4000.0) / std::pow(4000.0, 1.5);
        INFO("which=" << which << " r1=" << r1 << " r2=" << r2);
        CHECK(std::fabs(r1 / r2 - 1.0) < 0.10);
    }
}

TEST_CASE("incommensurate ladder is sorted with positive multiplicities") {
    const double two_pi = 2.0 * 3.14159265358979323846;
    const auto sp = build_torus({two_pi, 1.7, 2.9}, 300.0);
    for (std::size_t i = 0; i < sp.ladder.size(); ++i) {
        CHECK(sp.ladder[i].mult >= 1);
        if (i) CHECK(sp.ladder[i].lambda > sp.ladder[i - 1].lambda);
    }
}

TEST_CASE("shift_and_cut on a hand-built ladder") {
    manifold_spectrum sp;
    sp.d = 3;
    sp.R_gamma = 0.0;
    sp.ladder = {{0.1, 1}, {0.7, 2}, {2.0, 3}};
    const auto sh = shift_and_cut(sp, 0.37, 0.5);
    REQUIRE(sh.mu_ladder.size() == 2);
    CHECK(sh.mu_ladder[0].mu == 0.7);
    CHECK(sh.mu_ladder[1].mu == 2.0);
}
