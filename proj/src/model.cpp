#include "ringspec/model.hpp"

#include <algorithm>
#include <cmath>

namespace ringspec {

namespace {

void check_evaluable(const SpectrumModelParams& p, double delta_ef) {
    if (!(p.gamma_c > 0.0))
        throw invalid_params("model: gamma_c must be > 0");
    if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0))
        throw invalid_params("model: epsilon must lie in [0, 1]");
    if (!std::isfinite(delta_ef) || !std::isfinite(p.g_ef) || !std::isfinite(p.chi) ||
        !std::isfinite(p.retro_r) || !std::isfinite(p.scale_s) || !std::isfinite(p.gamma_c))
        throw invalid_params("model: non-finite input");
}

}  // namespace

std::pair<double, double> m_pm(EffectiveDetuning delta_ef, const SpectrumModelParams& p) {
    check_evaluable(p, delta_ef.value);

    const double d = delta_ef.value;
    const double g = p.g_ef;
    const double gc = p.gamma_c;
    const double e = p.epsilon;

    // |numerator|^2 expanded so that coefficients which vanish analytically
    // (the chi cross term at eps = 1, the coupling term at g = 0) vanish
    // exactly in floating point as well:
    //   |n_pm|^2 = (1 +- e)(d^2 + gc^2) + (1 -+ e) g^2
    //              + 2 g sqrt((1+e)(1-e)) (d cos chi +- gc sin chi)
    const double chi = wrap_angle(p.chi);
    const double x = d * d + gc * gc;
    const double cross = 2.0 * g * std::sqrt((1.0 + e) * (1.0 - e));
    const double dc = d * std::cos(chi);
    const double gs = gc * std::sin(chi);

    const double num_p = (1.0 + e) * x + (1.0 - e) * (g * g) + cross * (dc + gs);
    const double num_m = (1.0 - e) * x + (1.0 + e) * (g * g) + cross * (dc - gs);

    // |denominator|^2; bounded below by gc^4 > 0.
    const double n1 = (d - g) * (d - g) + gc * gc;
    const double n2 = (d + g) * (d + g) + gc * gc;
    const double den = n1 * n2;

    // The expansions are non-negative up to rounding; clamp stray -eps^2 dust.
    return {std::max(0.0, num_p) / den, std::max(0.0, num_m) / den};
}

double fit_model(EffectiveDetuning delta_ef, const SpectrumModelParams& p) {
    const auto [m_plus, m_minus] = m_pm(delta_ef, p);
    return p.scale_s * (m_plus - p.retro_r * m_minus);
}

Spectrum model_curve(const std::vector<double>& grid, const SpectrumModelParams& p) {
    validate_grid(grid);
    Spectrum s;
    s.detuning = grid;
    s.value.reserve(grid.size());
    for (double d : grid) s.value.push_back(fit_model(EffectiveDetuning{d}, p));
    return s;
}

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw invalid_params("grid: empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw invalid_params("grid: non-finite entry");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw invalid_params("grid: detunings must be strictly increasing");
    }
}

void validate_spectrum(const Spectrum& s) {
    if (s.detuning.size() != s.value.size())
        throw invalid_params("spectrum: detuning/value length mismatch");
    validate_grid(s.detuning);
    for (double v : s.value)
        if (!std::isfinite(v)) throw invalid_params("spectrum: non-finite value");
    if (!s.sigma.empty()) {
        if (s.sigma.size() != s.value.size())
            throw invalid_params("spectrum: sigma must cover all points or none");
        for (double sg : s.sigma)
            if (!(sg > 0.0) || !std::isfinite(sg))
                throw invalid_params("spectrum: sigma must be positive");
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw invalid_params("linspace: empty");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

}  // namespace ringspec
