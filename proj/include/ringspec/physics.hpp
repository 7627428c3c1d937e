#pragma once

#include <optional>
#include <string>
#include <utility>

#include "ringspec/model.hpp"

namespace ringspec {

// Static cavity properties. gamma_c is in internal units (normally 1);
// the geometric fields are SI.
struct CavityParams {
    double gamma_c = 1.0;        // field decay rate, internal units
    double finesse = 1.8e5;
    double round_trip_m = 0.097; // round-trip path length, m
    double fsr_hz = 3.1e9;       // free spectral range, ordinary Hz
    double waist_m = 130e-6;     // mode radius, m
};

// Throws invalid_params on non-positive fields; returns a warning string when
// fsr and round-trip path disagree by more than 1% (fsr = c / round_trip).
std::optional<std::string> validate_cavity(const CavityParams& cav);

// Atomic and lattice-geometry inputs that set the per-atom coupling.
// Frequencies are angular, in gamma_c units; delta_atom is signed
// (negative = red side of the atomic line).
struct AtomCouplingParams {
    double g0 = 0.67;            // resonant single-atom coupling g0 = w0^2 / (2 Gamma)
    double gamma_atom = 693.714; // atomic decay Gamma (2*pi*6.07 MHz by default)
    double delta_atom = -1.0;    // detuning from atomic resonance, != 0 when far-detuned
    double n_atoms = 0.0;        // atom number N
    double xi_rad = 1.0;         // radial bunching, [0, 1]
    double xi_ax = 1.0;          // axial Debye-Waller factor, [0, 1]
};

void validate_atoms(const AtomCouplingParams& p);

// Detuned single-atom coupling magnitude g_delta = g0 / sqrt(1 + 4 (delta/Gamma)^2).
// Even in delta, strictly decreasing in |delta|.
double coupling_detuned(const AtomCouplingParams& p);

// g_delta with its physical sign: negative on the red side (normal dispersion
// pulls the modes down in frequency).
double coupling_signed(const AtomCouplingParams& p);

// Far-detuned approximation w0^2 / (4 delta) = g0 Gamma / (2 delta), signed.
// Throws invalid_params at zero detuning.
double light_shift_per_photon(const AtomCouplingParams& p);

// (delta_ef, g_ef) for a probe at bare-cavity detuning delta_c:
// delta_ef = delta_c - N g_delta xi_rad, g_ef = |N g_delta xi_rad xi_ax|.
std::pair<EffectiveDetuning, double> effective_params(const AtomCouplingParams& p, double delta_c);

// The two normal-mode shifts N g_delta xi_rad (1 -+ xi_ax), ordered ascending.
// Their difference is 2 g_ef.
std::pair<double, double> normal_mode_shifts(const AtomCouplingParams& p);

// Smallest atom number with N |g_delta| xi_rad xi_ax > gamma_c (strict).
// Throws invalid_params when the per-atom coupling is zero.
long long scc_threshold(const AtomCouplingParams& p, const CavityParams& cav);

// Angular frequency detuning for a wavelength offset d_lambda (nm) from the
// resonance wavelength lambda (nm): 2 pi c d_lambda / lambda^2, in rad/s.
double wavelength_offset_to_angular(double detuning_nm, double lambda_nm);

}  // namespace ringspec
