#include "ringspec/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ringspec/analysis.hpp"

namespace ringspec {

namespace {

// splitmix64 finalizer applied to a per-index state: a stateless counter RNG.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + (i + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double to_unit_open(std::uint64_t h) {  // (0, 1]
    return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

double to_unit(std::uint64_t h) {  // [0, 1)
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void check_noise(const NoiseSpec& noise) {
    if (!(noise.sigma_abs >= 0.0) || !std::isfinite(noise.sigma_abs))
        throw invalid_params("noise: sigma_abs must be >= 0");
}

}  // namespace

double normal_at(std::uint64_t seed, std::uint64_t index) {
    const double u1 = to_unit_open(splitmix64_at(seed, 2 * index));
    const double u2 = to_unit(splitmix64_at(seed, 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_at(seed ^ 0x5851f42d4c957f2dULL, stream);
}

const std::vector<double>& ladder_atom_numbers() {
    static const std::vector<double> ns = {0.0,    0.28e6, 0.55e6, 0.83e6, 1.10e6, 1.38e6,
                                           1.66e6, 1.93e6, 2.21e6, 2.48e6, 2.76e6};
    return ns;
}

std::vector<double> default_grid(double g_ef_max, std::size_t n_points, double pad) {
    if (!(g_ef_max >= 0.0)) throw invalid_params("default_grid: g_ef_max must be >= 0");
    if (!(pad > 0.0)) throw invalid_params("default_grid: pad must be > 0");
    if (n_points < 2) throw invalid_params("default_grid: need at least 2 points");
    return linspace(-pad, pad + 2.0 * g_ef_max, n_points);
}

Spectrum generate_spectrum(const std::vector<double>& grid, const SpectrumModelParams& p,
                           const NoiseSpec& noise) {
    check_noise(noise);
    Spectrum s = model_curve(grid, p);
    const bool noisy = noise.kind == NoiseKind::gaussian && noise.sigma_abs > 0.0;
    if (noisy) {
        for (std::size_t i = 0; i < s.value.size(); ++i)
            s.value[i] += noise.sigma_abs * normal_at(noise.seed, i);
        s.sigma.assign(s.value.size(), noise.sigma_abs);
    }
    return s;
}

SpectrumModelParams series_trace_params(double n_atoms, const AtomCouplingParams& atoms,
                                        const CavityParams& cav, const SeriesModelSpec& series) {
    AtomCouplingParams a = atoms;
    a.n_atoms = n_atoms;
    const double g_ef = effective_params(a, 0.0).second;

    SpectrumModelParams p;
    p.g_ef = g_ef;
    p.chi = wrap_angle(series.chi);
    p.scale_s = series.scale_s;
    p.epsilon = series.epsilon;
    p.gamma_c = series.gamma_c;
    p.retro_r = classify_scc(g_ef, cav.gamma_c) == CouplingRegime::strong
                    ? series.retro_per_million * n_atoms / 1e6
                    : 0.0;
    return p;
}

std::vector<Spectrum> generate_series(const std::vector<double>& n_list,
                                      const AtomCouplingParams& atoms, const CavityParams& cav,
                                      const SeriesModelSpec& series,
                                      const std::vector<double>& grid, const NoiseSpec& noise) {
    if (n_list.empty()) throw invalid_params("generate_series: empty atom-number list");
    validate_grid(grid);
    check_noise(noise);

    std::vector<Spectrum> out;
    out.reserve(n_list.size());
    for (std::size_t t = 0; t < n_list.size(); ++t) {
        if (!(n_list[t] >= 0.0)) throw invalid_params("generate_series: negative atom number");
        const SpectrumModelParams p = series_trace_params(n_list[t], atoms, cav, series);

        // grid is referenced to the lower normal mode: delta_ef = x - g_ef
        std::vector<double> delta_ef(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) delta_ef[i] = grid[i] - p.g_ef;

        NoiseSpec trace_noise = noise;
        trace_noise.seed = derive_seed(noise.seed, t);
        Spectrum s = generate_spectrum(delta_ef, p, trace_noise);
        s.detuning = grid;
        s.meta["n_atoms"] = std::to_string(static_cast<long long>(std::llround(n_list[t])));
        s.meta["trace"] = std::to_string(t + 1);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ringspec
