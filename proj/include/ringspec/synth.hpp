#pragma once

#include <cstdint>
#include <vector>

#include "ringspec/model.hpp"
#include "ringspec/physics.hpp"

namespace ringspec {

enum class NoiseKind { none, gaussian };

// Additive noise model for synthetic spectra. The stream is counter-based:
// the perturbation of point i depends only on (seed, i), so identical inputs
// reproduce bit-identical spectra and points are independent.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double sigma_abs = 0.0;          // absolute standard deviation, model-value units
    std::uint64_t seed = 0;
};

// Model parameters shared across a simulated atom-number ladder. Per trace,
// g_ef comes from the coupling physics and R follows the observed pattern:
// zero below the strong-coupling threshold, linear in N above it.
struct SeriesModelSpec {
    double epsilon = 0.93;
    double gamma_c = 1.0;
    double chi = 0.3;
    double scale_s = 1.0;
    double retro_per_million = 0.2;  // R = retro_per_million * N / 1e6 when g_ef > gamma_c
};

// The eleven atom numbers of the reference measurement ladder (0 ... 2.76e6).
const std::vector<double>& ladder_atom_numbers();

// Shared detuning axis referenced to the lower normal mode: the fixed mode
// sits at 0, the upper at 2 g_ef, with `pad` gamma_c of margin on both sides.
std::vector<double> default_grid(double g_ef_max, std::size_t n_points = 801, double pad = 6.0);

// Counter-based standard-normal draw for point `index` of stream `seed`.
double normal_at(std::uint64_t seed, std::uint64_t index);

// Independent per-trace stream derived from a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// fit_model over `grid` plus additive noise. With kind == none (or
// sigma_abs == 0) the output equals model_curve exactly; with Gaussian noise
// the sigma column records sigma_abs.
Spectrum generate_spectrum(const std::vector<double>& grid, const SpectrumModelParams& p,
                           const NoiseSpec& noise);

// Model parameters for one ladder trace at atom number n.
SpectrumModelParams series_trace_params(double n_atoms, const AtomCouplingParams& atoms,
                                        const CavityParams& cav, const SeriesModelSpec& series);

// One spectrum per atom number, on the lower-mode-referenced axis `grid`
// (the model is evaluated at delta_ef = x - g_ef(N)). Each trace gets an
// independent derived noise stream; meta records n_atoms and trace index.
std::vector<Spectrum> generate_series(const std::vector<double>& n_list,
                                      const AtomCouplingParams& atoms, const CavityParams& cav,
                                      const SeriesModelSpec& series,
                                      const std::vector<double>& grid, const NoiseSpec& noise);

}  // namespace ringspec
