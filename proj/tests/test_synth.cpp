#include <doctest.h>

#include <cmath>

#include "ringspec/analysis.hpp"
#include "ringspec/synth.hpp"

using namespace ringspec;

namespace {

SpectrumModelParams demo_params(double g_ef = 2.0, double scale_s = 1.0) {
    SpectrumModelParams p;
    p.g_ef = g_ef;
    p.chi = 0.3;
    p.retro_r = 0.1;
    p.scale_s = scale_s;
    return p;
}

AtomCouplingParams ladder_atoms(double xi_ax = 0.113) {
    AtomCouplingParams p;
    p.g0 = 0.67;
    p.gamma_atom = 2.0 * kPi * 6.07e6 / kUnitRadPerSec;
    p.delta_atom = wavelength_offset_to_angular(-0.7, 780.24) / kUnitRadPerSec;
    p.xi_rad = 1.0;
    p.xi_ax = xi_ax;
    return p;
}

}  // namespace

TEST_CASE("generate_spectrum: noiseless output equals model_curve bitwise") {
    const auto grid = default_grid(2.0, 401);
    const auto p = demo_params();
    const auto curve = model_curve(grid, p);
    const auto s = generate_spectrum(grid, p, NoiseSpec{});
    CHECK(s.detuning == curve.detuning);
    CHECK(s.value == curve.value);
    CHECK(!s.has_sigma());

    NoiseSpec degenerate{NoiseKind::gaussian, 0.0, 99};
    const auto s2 = generate_spectrum(grid, p, degenerate);
    CHECK(s2.value == curve.value);  // sigma_abs = 0 degenerates to none
    CHECK(!s2.has_sigma());
}

TEST_CASE("generate_spectrum: seeded noise is reproducible and seed-sensitive") {
    const auto grid = default_grid(2.0, 301);
    const auto p = demo_params();
    const NoiseSpec n1{NoiseKind::gaussian, 0.05, 1234};
    const auto a = generate_spectrum(grid, p, n1);
    const auto b = generate_spectrum(grid, p, n1);
    CHECK(a.value == b.value);
    REQUIRE(a.has_sigma());
    for (double sg : a.sigma) CHECK(sg == 0.05);

    const NoiseSpec n2{NoiseKind::gaussian, 0.05, 1235};
    const auto c = generate_spectrum(grid, p, n2);
    CHECK(a.value != c.value);
}

TEST_CASE("generate_spectrum: sample deviation matches sigma_abs on a flat model") {
    const auto grid = linspace(0.0, 1.0, 100000);
    const double sigma = 0.37;
    const auto s = generate_spectrum(grid, demo_params(0.0, 0.0),
                                     NoiseSpec{NoiseKind::gaussian, sigma, 20260810});
    double mean = 0.0;
    for (double v : s.value) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s.value) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size() - 1);
    CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.02));
    CHECK(std::abs(mean) <= 5.0 * sigma / std::sqrt(static_cast<double>(s.size())));
}

TEST_CASE("normal_at: counter-based stream is stateless and independent") {
    CHECK(normal_at(42, 7) == normal_at(42, 7));
    CHECK(normal_at(42, 7) != normal_at(42, 8));
    CHECK(normal_at(42, 7) != normal_at(43, 7));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));

    // neighbouring points are uncorrelated
    const std::size_t n = 200000;
    double s0 = 0.0, s1 = 0.0, s01 = 0.0, q0 = 0.0, q1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = normal_at(99, i);
        const double b = normal_at(99, i + 1);
        s0 += a;
        s1 += b;
        s01 += a * b;
        q0 += a * a;
        q1 += b * b;
    }
    const double cov = s01 / n - (s0 / n) * (s1 / n);
    const double corr = cov / std::sqrt((q0 / n - (s0 / n) * (s0 / n)) *
                                        (q1 / n - (s1 / n) * (s1 / n)));
    CHECK(std::abs(corr) <= 0.01);
}

TEST_CASE("default_grid: covers both normal modes with the requested margin") {
    const auto g = default_grid(5.0, 801);
    REQUIRE(g.size() == 801);
    CHECK(g.front() == -6.0);
    CHECK(g.back() == 16.0);
    CHECK_THROWS_AS(default_grid(-1.0), invalid_params);
}

TEST_CASE("generate_series: single empty-cavity trace is a Lorentzian") {
    const auto grid = default_grid(0.0, 401);
    const auto series =
        generate_series({0.0}, ladder_atoms(), CavityParams{}, SeriesModelSpec{}, grid, NoiseSpec{});
    REQUIRE(series.size() == 1);
    CHECK(series[0].meta.at("n_atoms") == "0");
    const auto peaks = find_peaks(series[0], 0.1);
    REQUIRE(peaks.size() == 1);
    // lower-mode-referenced axis: the single resonance sits at 0
    CHECK(std::abs(peaks[0].detuning) <= grid[1] - grid[0]);
}

TEST_CASE("generate_series: ladder geometry") {
    const auto atoms = ladder_atoms(0.4);  // well-resolved doublets
    const CavityParams cav;
    SeriesModelSpec spec;
    spec.retro_per_million = 0.0;  // pure doublet geometry
    const auto& ns = ladder_atom_numbers();
    REQUIRE(ns.size() == 11);

    AtomCouplingParams top = atoms;
    top.n_atoms = ns.back();
    const double g_max = effective_params(top, 0.0).second;
    const auto grid = default_grid(g_max, 4001);
    const auto series = generate_series(ns, atoms, cav, spec, grid, NoiseSpec{});
    REQUIRE(series.size() == 11);

    SUBCASE("largest trace: model maxima separated by 2 g_ef within the pulling bias") {
        const auto split = estimate_splitting(series.back());
        REQUIRE(split.has_value());
        CHECK(*split == doctest::Approx(2.0 * g_max).epsilon(0.02));
    }
    SUBCASE("doubling every N doubles the coupling and the measured splitting") {
        std::vector<double> doubled;
        for (double n : ns) doubled.push_back(2.0 * n);
        AtomCouplingParams top2 = atoms;
        top2.n_atoms = doubled.back();
        const double g_max2 = effective_params(top2, 0.0).second;
        CHECK(g_max2 == 2.0 * g_max);
        const auto grid2 = default_grid(g_max2, 4001);
        const auto series2 = generate_series(doubled, atoms, cav, spec, grid2, NoiseSpec{});
        const auto s1 = estimate_splitting(series.back());
        const auto s2 = estimate_splitting(series2.back());
        REQUIRE(s1.has_value());
        REQUIRE(s2.has_value());
        CHECK(*s2 / *s1 == doctest::Approx(2.0).epsilon(0.02));
    }
    SUBCASE("retroaction pulls the apparent peaks outward but leaves them near +-g_ef") {
        SeriesModelSpec with_r;  // default retro_per_million = 0.2
        const auto retro = generate_series({ns.back()}, atoms, cav, with_r, grid, NoiseSpec{});
        const auto split = estimate_splitting(retro[0]);
        REQUIRE(split.has_value());
        CHECK(*split == doctest::Approx(2.0 * g_max).epsilon(0.05));
    }
    SUBCASE("traces get independent noise streams") {
        NoiseSpec noise{NoiseKind::gaussian, 0.01, 7};
        const auto noisy =
            generate_series({1e6, 1e6}, atoms, cav, spec, default_grid(1.0, 101), noise);
        CHECK(noisy[0].value != noisy[1].value);
    }
}

TEST_CASE("generate_series: retroaction switches on above the SCC threshold") {
    const auto atoms = ladder_atoms();  // crossover between traces 6 and 7
    const CavityParams cav;
    const SeriesModelSpec spec;
    const auto& ns = ladder_atom_numbers();
    for (std::size_t t = 0; t < ns.size(); ++t) {
        const auto p = series_trace_params(ns[t], atoms, cav, spec);
        if (t >= 6) {
            CHECK(p.g_ef > cav.gamma_c);
            CHECK(p.retro_r == spec.retro_per_million * ns[t] / 1e6);
        } else {
            CHECK(p.g_ef <= cav.gamma_c);
            CHECK(p.retro_r == 0.0);
        }
    }
}

TEST_CASE("generate_series: input validation") {
    const auto grid = default_grid(1.0, 51);
    CHECK_THROWS_AS(
        generate_series({}, ladder_atoms(), CavityParams{}, SeriesModelSpec{}, grid, NoiseSpec{}),
        invalid_params);
    CHECK_THROWS_AS(generate_series({-1.0}, ladder_atoms(), CavityParams{}, SeriesModelSpec{}, grid,
                                    NoiseSpec{}),
                    invalid_params);
    NoiseSpec bad;
    bad.sigma_abs = -0.1;
    CHECK_THROWS_AS(generate_series({0.0}, ladder_atoms(), CavityParams{}, SeriesModelSpec{}, grid,
                                    bad),
                    invalid_params);
}
