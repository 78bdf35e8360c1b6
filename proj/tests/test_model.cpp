#include <cmath>
#include <vector>

#include "angio/errors.hpp"
#include "angio/model.hpp"
#include "doctest.h"

using namespace angio;

namespace {

// Reference bisection on a monotone decreasing function of phi.
double bisect_steady(const ModelParams& p) {
    double lo = p.hr_width, hi = 1.0 - 1e-12;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = source_nutrient(mid, 0.0, 0.0, p.delta_n, 1.0, p);
        (f > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("potential: psi' vanishes at phi_bar and the implicit/explicit split is exact") {
    for (double pb : {0.2, 0.389, 0.6}) {
        CHECK(std::abs(psi_prime(pb, pb)) <= 1e-12);
        for (int i = 0; i < 1000; ++i) {
            const double phi = 0.999 * static_cast<double>(i) / 999.0;
            const double gap = psi1_prime(phi, pb) + psi2_prime(phi, pb) - psi_prime(phi, pb);
            CHECK(std::abs(gap) <= 1e-12);
        }
    }
}

TEST_CASE("potential: pinned values") {
    CHECK(psi(0.0, 0.389) == 0.0);
    CHECK(psi_prime(0.0, 0.389) == 0.0);
    CHECK(psi_prime(0.5, 0.389) == doctest::Approx(0.0555).epsilon(1e-10));
    CHECK(psi1_prime(0.0, 0.389) == doctest::Approx(0.611).epsilon(1e-14));
    CHECK(psi1_prime(0.389, 0.389) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi2_prime(1.0, 0.389) == doctest::Approx(-2.222).epsilon(1e-14));
}

TEST_CASE("potential: derivatives agree with centered differences") {
    const double pb = 0.389, h = 1e-6;
    for (double phi : {0.05, 0.2, 0.389, 0.6, 0.9}) {
        const double fd = (psi(phi + h, pb) - psi(phi - h, pb)) / (2.0 * h);
        CHECK(psi_prime(phi, pb) == doctest::Approx(fd).epsilon(1e-6));
    }
    for (double phi : {0.0, 0.3, 0.7}) {
        const double fd = (psi1_prime(phi + h, pb) - psi1_prime(phi - h, pb)) / (2.0 * h);
        CHECK(psi1_second(phi, pb) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("potential: split keeps the implicit part convex and the explicit part concave") {
    double prev1 = psi1_prime(0.0, 0.389);
    double prev2 = psi2_prime(0.0, 0.389);
    for (int i = 1; i < 500; ++i) {
        const double phi = 0.999 * static_cast<double>(i) / 499.0;
        const double p1 = psi1_prime(phi, 0.389);
        const double p2 = psi2_prime(phi, 0.389);
        CHECK(p1 >= prev1);
        CHECK(p2 <= prev2);
        CHECK(psi1_second(phi, 0.389) > 0.0);
        prev1 = p1;
        prev2 = p2;
    }
}

TEST_CASE("regularized heaviside: ramp values and monotonicity") {
    CHECK(heaviside_reg(-1.0, 0.1) == 0.0);
    CHECK(heaviside_reg(0.0, 0.1) == 0.0);
    CHECK(heaviside_reg(0.1, 0.1) == 1.0);
    CHECK(heaviside_reg(5.0, 0.1) == 1.0);
    CHECK(heaviside_reg(0.05, 0.1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(heaviside_reg(0.025, 0.1) == doctest::Approx(0.15625).epsilon(1e-14));
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double v = heaviside_reg(-0.05 + 0.2 * i / 200.0, 0.1);
        CHECK(v >= prev);
        prev = v;
    }
    // C1 continuity at both ends of the ramp
    const double e = 1e-9;
    CHECK(std::abs(heaviside_reg(e, 0.1) - heaviside_reg(-e, 0.1)) < 1e-8);
    CHECK(std::abs(heaviside_reg(0.1 + e, 0.1) - heaviside_reg(0.1 - e, 0.1)) < 1e-8);
}

TEST_CASE("mobility: degeneracy at both ends and the pinned midpoint value") {
    CHECK(mobility(0.0, 0.4, 0.1, 3900.0) == 0.0);
    CHECK(mobility(0.3, 1.0, 0.0, 3900.0) == 0.0);
    CHECK(mobility(0.5, 0.5, 0.0, 3900.0) == doctest::Approx(0.125 / 3900.0).epsilon(1e-15));
    CHECK(mobility(0.5, 0.5, 0.0, 3900.0) == doctest::Approx(3.2051e-5).epsilon(1e-4));
    // vasculature crowding shrinks the mobility by (1+phi_a)^-2
    CHECK(mobility(0.5, 0.5, 1.0, 3900.0) ==
          doctest::Approx(0.25 * 0.125 / 3900.0).epsilon(1e-14));
    for (double pi = 0.0; pi <= 1.0; pi += 0.1)
        for (double pt = pi; pt <= 1.0; pt += 0.1)
            for (double pa = 0.0; pa <= 1.0; pa += 0.25) {
                CHECK(mobility(pi, pt, pa, 3900.0) >= 0.0);
                CHECK(mobility_hat(pi, pt, pa) ==
                      doctest::Approx(3900.0 * mobility(pi, pt, pa, 3900.0)).epsilon(1e-14));
            }
}

TEST_CASE("viable source: pinned value, zeros, and therapy sink") {
    ModelParams p;
    // proliferation minus lysis at a generic interior point
    const double v = source_viable(0.5, 0.1, 0.05, 0.8, 0.0, p);
    const double expect = 0.15 * 0.5 * (0.8 - 0.33) * (1.0 - 0.5 - 0.1 - 0.05);
    CHECK(v == doctest::Approx(expect).epsilon(1e-14));
    CHECK(expect == doctest::Approx(0.0123375).epsilon(1e-12));
    CHECK(source_viable(0.0, 0.1, 0.0, 0.8, 0.0, p) == 0.0);
    CHECK(source_viable(0.5, 0.1, 0.0, 0.33, 0.0, p) == 0.0);  // both max() terms vanish
    const double vt = source_viable(0.5, 0.1, 0.05, 0.8, 0.2, p);
    CHECK(vt == doctest::Approx(expect - 0.2 * 0.5).epsilon(1e-12));
}

TEST_CASE("necrotic source: hypoxic conversion and therapy-driven clearance") {
    ModelParams p;
    CHECK(source_necrotic(0.0, 0.0, 0.5, 0.0, p) == 0.0);
    CHECK(source_necrotic(0.6, 0.0, 0.0, 0.0, p) == doctest::Approx(0.011880).epsilon(1e-12));
    CHECK(source_necrotic(0.0, 0.2, 1.0, 0.1, p) == doctest::Approx(-0.02).epsilon(1e-12));
    // above the hypoxia threshold nothing converts
    CHECK(source_necrotic(0.6, 0.0, 0.5, 0.0, p) == 0.0);
}

TEST_CASE("viable/necrotic exchange cancels exactly without proliferation or therapy") {
    ModelParams p;
    p.nu = 0.0;
    p.k1 = 0.5;  // background conversion moves mass between the phases
    p.k2 = 0.0;
    for (double pv : {0.0, 0.2, 0.5})
        for (double pd : {0.0, 0.3})
            for (double n : {0.0, 0.1, 0.33, 0.8}) {
                const double sum = source_viable(pv, pd, 0.1, n, 0.0, p) +
                                   source_necrotic(pv, pd, n, 0.0, p);
                CHECK(sum == 0.0);
            }
}

TEST_CASE("vasculature source: tumor firewall and pinned sprouting value") {
    ModelParams p;
    // solid tumor shuts growth off exactly once phi_T reaches the ramp width
    CHECK(source_angio(0.1, 0.0, 0.2, 1.0, 1.0, p) == 0.0);
    CHECK(source_angio(0.05, 0.05, 0.2, 1.0, 1.0, p) == 0.0);
    // free sprouting in healthy tissue: 4.8 * 1.0 * (1 - 0.2) * (1 - 0.2) = 3.072
    const double g = source_angio(0.0, 0.0, 0.2, 1.0, 1.0, p);
    CHECK(g == doctest::Approx(4.8 * 0.8 * 0.8 - 0.24 * 0.2).epsilon(1e-12));
    CHECK(source_angio(0.0, 0.0, 0.0, 1.0, 1.0, p) == doctest::Approx(3.84).epsilon(1e-12));
    // no TAF above threshold, no sprouting; only regression remains
    CHECK(source_angio(0.0, 0.0, 0.1, 0.2, 1.0, p) ==
          doctest::Approx(-0.24 * 0.1).epsilon(1e-12));
    // resection cavity (irc = 0) cannot sprout
    CHECK(source_angio(0.0, 0.0, 0.0, 1.0, 0.0, p) == 0.0);
}

TEST_CASE("nutrient source: pinned values") {
    ModelParams p;
    CHECK(source_nutrient(0.0, 0.0, 0.0, 0.0, 1.0, p) == doctest::Approx(1e4).epsilon(1e-14));
    CHECK(source_nutrient(0.0, 0.0, 0.0, 1.0, 1.0, p) == 0.0);
    // near the uniform steady state the net production is small
    ModelParams p1;
    p1.V_T = 5000.0;
    const double s = source_nutrient(0.54, 0.0, 0.0, 0.33, 1.0, p1);
    CHECK(s == doctest::Approx(1.352).epsilon(1e-9));
    // fully vascularized healthy point: V_n dominates, supply saturates at n = 1
    CHECK(source_nutrient(0.0, 0.0, 0.04, 0.5, 1.0, p) ==
          doctest::Approx((1e4 + 2.5e4 * 0.04) * 0.5).epsilon(1e-12));
}

TEST_CASE("taf source: hypoxic production and vascular uptake") {
    ModelParams p;
    CHECK(source_taf(1.0, 0.0, 0.0, 0.0, p) == doctest::Approx(330.0).epsilon(1e-12));
    CHECK(source_taf(0.5, 0.0, 0.8, 0.3, p) == 0.0);  // normoxic, no vasculature
    CHECK(source_taf(0.0, 0.1, 1.0, 1.0, p) == doctest::Approx(-86.4).epsilon(1e-12));
    // saturation: production carries the (1 - c) factor
    CHECK(source_taf(1.0, 0.0, 0.0, 1.0, p) == 0.0);
}

TEST_CASE("semi-implicit splits are consistent with the point sources") {
    ModelParams p;
    for (double pv : {0.0, 0.3, 0.7})
        for (double pa : {0.0, 0.04, 0.5})
            for (double n : {0.0, 0.2, 0.9}) {
                const ReactionSplit sn = nutrient_split(pv, 0.1, pa, 0.8, 111.42, p);
                CHECK(sn.react >= 0.0);
                CHECK(sn.supply - sn.react * n ==
                      doctest::Approx(source_nutrient(pv, 0.1, pa, n, 0.8, p) + 111.42 * pv)
                          .epsilon(1e-12)
                          .scale(1e4));
                for (double c : {0.0, 0.5, 1.0}) {
                    const ReactionSplit sc = taf_split(pv, pa, n, p);
                    CHECK(sc.react >= 0.0);
                    CHECK(sc.supply - sc.react * c ==
                          doctest::Approx(source_taf(pv, pa, n, c, p) + p.l_ca * pa)
                              .epsilon(1e-12)
                              .scale(1e3));
                }
            }
}

TEST_CASE("uniform steady state: closed form against bisection for both test cases") {
    ModelParams p1;
    p1.V_T = 5000.0;
    const double s1 = uniform_steady_state(p1);
    CHECK(s1 == doctest::Approx(0.540).epsilon(0.01));
    CHECK(s1 == doctest::Approx(3350.0 / 6201.2).epsilon(1e-13));
    CHECK(std::abs(s1 - bisect_steady(p1)) <= 1e-10);

    ModelParams p2;  // defaults are the dormant case, V_T = 1000
    const double s2 = uniform_steady_state(p2);
    CHECK(s2 == doctest::Approx(0.190).epsilon(0.03));
    CHECK(s2 == doctest::Approx(670.0 / 3521.2).epsilon(1e-13));
    CHECK(std::abs(s2 - bisect_steady(p2)) <= 1e-10);

    ModelParams bad;
    bad.V_T = 0.0;
    bad.delta_n = 0.0;
    CHECK_THROWS_AS(uniform_steady_state(bad), ConfigError);
}

TEST_CASE("therapy schedule: half-open intervals that add up") {
    TherapySchedule none;
    CHECK(therapy_rate(none, 1.0) == 0.0);
    TherapySchedule s;
    s.radio.push_back({1.0, 2.0, 5.0});
    s.chemo.push_back({1.5, 3.0, 3.0});
    CHECK(therapy_rate(s, 0.99) == 0.0);
    CHECK(therapy_rate(s, 1.0) == 5.0);
    CHECK(therapy_rate(s, 1.499) == 5.0);
    CHECK(therapy_rate(s, 1.5) == 8.0);
    CHECK(therapy_rate(s, 2.0) == 3.0);  // radio interval is half-open
    CHECK(therapy_rate(s, 3.0) == 0.0);
    s.radio.push_back({1.0, 2.0, 1.5});  // overlapping bursts accumulate
    CHECK(therapy_rate(s, 1.2) == 6.5);
}

}  // TEST_SUITE("model")
