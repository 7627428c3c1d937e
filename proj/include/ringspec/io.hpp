#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ringspec/fit.hpp"
#include "ringspec/physics.hpp"
#include "ringspec/synth.hpp"

namespace ringspec {

enum class Units { gamma_c, khz };

// Everything a simulate/fit/analyze run needs, loadable from a flat
// INI-style file with one section per module. Values are stored exactly as
// they appear in the file (so that write followed by read is the identity);
// the accessors below derive the internal-unit structs the core modules use.
struct RunConfig {
    // [cavity]
    double linewidth_khz = 17.5;  // empty-cavity FWHM; gamma_c = pi * linewidth
    double finesse = 1.8e5;
    double round_trip_mm = 97.0;
    double fsr_ghz = 3.1;
    double waist_um = 130.0;

    // [atoms]
    double g0_gamma_c = 0.67;     // resonant coupling in units of gamma_c
    double gamma_atom_mhz = 6.07; // natural linewidth, ordinary MHz (Gamma = 2 pi f)
    double detuning_nm = -0.7;    // wavelength-equivalent detuning; negative = red side
    double lambda_nm = 780.24;
    double n_atoms = 1e6;
    double xi_rad = 1.0;
    double xi_ax = 0.113;         // default puts the SCC crossover inside the ladder

    // [model]
    double epsilon = 0.93;
    double chi = 0.3;
    double scale_s = 1.0;
    double retro_per_million = 0.2;
    // optical path mismatch between the two coupling arms; bounds the
    // admissible grating phase near zero coupling (reported, not modeled)
    double path_asymmetry_percent = 2.0;

    // [fit]
    int chi_starts = 8;
    int max_iter = 200;
    double tol_step = 1e-11;
    double tol_grad = 1e-10;
    double tol_cost = 1e-12;
    bool lock_r_below_threshold = true;  // the below-threshold R = 0 convention

    // [synth]
    NoiseKind noise = NoiseKind::none;
    double sigma_abs = 0.0;
    std::uint64_t seed = 20260810;
    std::size_t grid_points = 801;
    double grid_pad = 6.0;               // margin around the normal modes, gamma_c units
    std::optional<double> grid_lo, grid_hi;  // explicit window in `units`; overrides the pad rule

    Units units = Units::khz;  // unit of grid overrides and report output

    double gamma_c_internal() const;
    CavityParams cavity() const;
    AtomCouplingParams atoms() const;
    SeriesModelSpec series() const;
    FitConfig fit() const;
    NoiseSpec noise_spec() const;
    double to_internal(double v) const;    // detuning in `units` -> internal
    double from_internal(double v) const;  // internal -> `units`
};

// Built-in defaults (identical to configs/default.cfg).
RunConfig default_config();

// Parses and validates; unknown keys and malformed lines raise config_error
// with file:line, invariant violations raise config_error naming the key.
RunConfig read_config(const std::string& path);
void write_config(const RunConfig& cfg, const std::string& path);

// CSV spectrum files: `# key = value` comment lines populate meta, the header
// is `detuning_khz,value[,sigma]`, detunings are stored in kHz at full
// precision so that read(write(s)) reproduces s exactly.
Spectrum read_spectrum(const std::string& path);
void write_spectrum(const Spectrum& s, const std::string& path);

// Batch-fit results as a self-describing JSON document, plus a flat CSV twin
// for spreadsheets. read_results inverts write_results losslessly.
void write_results(const std::vector<TraceFit>& table, const std::string& path);
void write_results_csv(const std::vector<TraceFit>& table, const std::string& path);
std::vector<TraceFit> read_results(const std::string& path);

// Atomic text-file write (temp file + rename).
void write_text_file(const std::string& path, const std::string& content);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace ringspec
