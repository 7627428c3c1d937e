#include <doctest.h>

#include <cmath>

#include "eq1_reference.hpp"
#include "ringspec/physics.hpp"

using namespace ringspec;
using ringspec::testing::TestRng;

namespace {

AtomCouplingParams paper_atoms(double n_atoms = 0.0, double xi_rad = 1.0, double xi_ax = 1.0) {
    // the reference experiment in internal units: g0 = 0.67 gamma_c,
    // Gamma = 2 pi 6.07 MHz, detuning 0.7 nm to the red of 780.24 nm
    AtomCouplingParams p;
    p.g0 = 0.67;
    p.gamma_atom = 2.0 * kPi * 6.07e6 / kUnitRadPerSec;
    p.delta_atom = wavelength_offset_to_angular(-0.7, 780.24) / kUnitRadPerSec;
    p.n_atoms = n_atoms;
    p.xi_rad = xi_rad;
    p.xi_ax = xi_ax;
    return p;
}

double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

}  // namespace

TEST_CASE("coupling_detuned: resonant limit, parity, monotonicity") {
    AtomCouplingParams p = paper_atoms();
    p.delta_atom = 0.0;
    CHECK(coupling_detuned(p) == 0.67);

    TestRng rng(11);
    for (int k = 0; k < 200; ++k) {
        const double d = rng.uniform(0.01, 5e7);
        AtomCouplingParams a = paper_atoms();
        a.delta_atom = d;
        AtomCouplingParams b = paper_atoms();
        b.delta_atom = -d;
        CHECK(coupling_detuned(a) == coupling_detuned(b));  // even in delta
        CHECK(coupling_detuned(a) < a.g0);
        AtomCouplingParams c = paper_atoms();
        c.delta_atom = 2.0 * d;
        CHECK(coupling_detuned(c) < coupling_detuned(a));  // decreasing in |delta|
    }
}

TEST_CASE("coupling_detuned: far-detuned asymptote g0 Gamma / (2 delta)") {
    for (double ratio : {1e3, 1e4, 1e6}) {
        AtomCouplingParams p = paper_atoms();
        p.delta_atom = ratio * p.gamma_atom;
        const double asym = p.g0 * p.gamma_atom / (2.0 * p.delta_atom);
        const double r = coupling_detuned(p) / asym;
        CHECK(std::abs(r - 1.0) <= 0.2 / (ratio * ratio));  // 1/(8 x^2) envelope
    }
}

TEST_CASE("coupling_detuned: frozen value for the reference experiment") {
    // independent arbitrary-precision evaluation of
    // 0.67 / sqrt(1 + 4 (c * 0.7nm / (780.24nm)^2 / 6.07 MHz)^2)
    const AtomCouplingParams p = paper_atoms();
    CHECK(rel_diff(coupling_detuned(p), 5.8989019509277641e-6) <= 1e-12);
    CHECK(coupling_signed(p) < 0.0);  // red side
}

TEST_CASE("wavelength_offset_to_angular: frozen value and sign") {
    CHECK(rel_diff(std::abs(wavelength_offset_to_angular(-0.7, 780.24)), 2165918889426.476) <=
          1e-12);
    CHECK(wavelength_offset_to_angular(-0.7, 780.24) < 0.0);
    CHECK(wavelength_offset_to_angular(0.7, 780.24) > 0.0);
}

TEST_CASE("light_shift_per_photon: sign, scaling, approximation quality") {
    AtomCouplingParams p = paper_atoms();
    CHECK(light_shift_per_photon(p) < 0.0);  // red detuning shifts down

    AtomCouplingParams doubled = p;
    doubled.delta_atom = 2.0 * p.delta_atom;
    CHECK(rel_diff(light_shift_per_photon(doubled), 0.5 * light_shift_per_photon(p)) <= 1e-15);

    AtomCouplingParams zero = p;
    zero.delta_atom = 0.0;
    CHECK_THROWS_AS(light_shift_per_photon(zero), invalid_params);

    SUBCASE("matches the exact coupling to 0.01% at |delta/Gamma| = 50") {
        AtomCouplingParams q = paper_atoms();
        q.delta_atom = 50.0 * q.gamma_atom;
        CHECK(rel_diff(std::abs(light_shift_per_photon(q)), coupling_detuned(q)) <= 1e-4);
    }
    SUBCASE("within 2.5e-5 for |delta/Gamma| >= 100") {
        for (double x : {100.0, 300.0, 1e4, 5.68e4}) {
            AtomCouplingParams q = paper_atoms();
            q.delta_atom = -x * q.gamma_atom;
            CHECK(rel_diff(std::abs(light_shift_per_photon(q)), coupling_detuned(q)) <= 2.5e-5);
        }
    }
}

TEST_CASE("effective_params: empty cavity, bunching limits, linearity") {
    SUBCASE("N = 0 passes delta_c through") {
        const auto [d, g] = effective_params(paper_atoms(0.0), 1.7);
        CHECK(d.value == 1.7);
        CHECK(g == 0.0);
    }
    SUBCASE("xi_ax = 0 removes the coupling but keeps the shift") {
        const auto [d, g] = effective_params(paper_atoms(1e6, 1.0, 0.0), 0.0);
        CHECK(g == 0.0);
        CHECK(d.value > 0.0);  // red: modes shift down, so delta_ef = delta_c - (neg)
    }
    SUBCASE("xi = 1 gives g_ef = N g_delta") {
        const AtomCouplingParams p = paper_atoms(1e6, 1.0, 1.0);
        CHECK(effective_params(p, 0.0).second == 1e6 * coupling_detuned(p));
    }
    SUBCASE("doubling N doubles shift and coupling") {
        const AtomCouplingParams p1 = paper_atoms(7.7e5, 0.9, 0.4);
        AtomCouplingParams p2 = p1;
        p2.n_atoms = 2.0 * p1.n_atoms;
        const auto [d1, g1] = effective_params(p1, 0.0);
        const auto [d2, g2] = effective_params(p2, 0.0);
        CHECK(d2.value == 2.0 * d1.value);
        CHECK(g2 == 2.0 * g1);
    }
}

TEST_CASE("normal_mode_shifts: limits and the 2 g_ef splitting identity") {
    SUBCASE("point-like atoms: one mode unshifted, one at 2 N g_delta xi_rad") {
        const AtomCouplingParams p = paper_atoms(1e6, 1.0, 1.0);
        const auto [lo, hi] = normal_mode_shifts(p);
        CHECK(hi == 0.0);  // red side: everything shifts down
        CHECK(lo == doctest::Approx(2.0 * 1e6 * coupling_signed(p)).epsilon(1e-15));
    }
    SUBCASE("homogeneous gas: degenerate shifts") {
        const AtomCouplingParams p = paper_atoms(1e6, 1.0, 0.0);
        const auto [lo, hi] = normal_mode_shifts(p);
        CHECK(lo == hi);
    }
    SUBCASE("difference equals 2 g_ef at machine precision") {
        TestRng rng(47);
        for (int k = 0; k < 1000; ++k) {
            AtomCouplingParams p = paper_atoms();
            p.n_atoms = rng.uniform(0.0, 5e6);
            p.xi_rad = rng.uniform(0.0, 1.0);
            p.xi_ax = rng.uniform(0.0, 1.0);
            p.delta_atom = rng.uniform(-1e8, 1e8);
            const auto [lo, hi] = normal_mode_shifts(p);
            const double g_ef = effective_params(p, 0.0).second;
            const double scale = std::abs(lo) + std::abs(hi) + 2.0 * g_ef;
            CHECK(std::abs((hi - lo) - 2.0 * g_ef) <=
                  4.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300));
        }
    }
}

TEST_CASE("scc_threshold: strict inequality and scaling") {
    CavityParams cav;  // gamma_c = 1
    AtomCouplingParams p = paper_atoms();
    SUBCASE("g_delta = gamma_c needs two atoms") {
        p.delta_atom = 0.0;
        p.g0 = 1.0;
        CHECK(scc_threshold(p, cav) == 2);
    }
    SUBCASE("halving xi_ax doubles the threshold (up to rounding)") {
        p.xi_ax = 1.0;
        const long long n1 = scc_threshold(p, cav);
        p.xi_ax = 0.5;
        const long long n2 = scc_threshold(p, cav);
        CHECK(std::abs(static_cast<double>(n2) - 2.0 * static_cast<double>(n1)) <= 2.0);
    }
    SUBCASE("reference parameters land within an order of magnitude of 1e6") {
        const long long n = scc_threshold(paper_atoms(), cav);
        CHECK(n == 169524);  // frozen from an independent high-precision evaluation
        CHECK(n >= 100000);
        CHECK(n <= 10000000);
    }
    SUBCASE("zero coupling is an error") {
        p.xi_ax = 0.0;
        CHECK_THROWS_AS(scc_threshold(p, cav), invalid_params);
        AtomCouplingParams q = paper_atoms();
        q.g0 = 0.0;
        CHECK_THROWS_AS(scc_threshold(q, cav), invalid_params);
    }
}

TEST_CASE("validate_cavity: positivity and the fsr consistency warning") {
    CavityParams cav;
    CHECK(!validate_cavity(cav).has_value());  // defaults are consistent
    cav.fsr_hz = 3.2e9;
    const auto warning = validate_cavity(cav);
    REQUIRE(warning.has_value());
    CHECK(warning->find("fsr") != std::string::npos);
    cav.fsr_hz = -1.0;
    CHECK_THROWS_AS(validate_cavity(cav), invalid_params);
}

TEST_CASE("validate_atoms: bunching factors restricted to [0, 1]") {
    AtomCouplingParams p = paper_atoms();
    p.xi_rad = 1.2;
    CHECK_THROWS_AS(validate_atoms(p), invalid_params);
    p = paper_atoms();
    p.xi_ax = -0.1;
    CHECK_THROWS_AS(validate_atoms(p), invalid_params);
    p = paper_atoms();
    p.n_atoms = -5.0;
    CHECK_THROWS_AS(validate_atoms(p), invalid_params);
}
