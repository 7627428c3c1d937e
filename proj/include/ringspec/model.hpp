#pragma once

#include <utility>
#include <vector>

#include "ringspec/spectrum.hpp"

namespace ringspec {

// Parameters of the steady-state two-mode transfer model
//
//   M_pm = | sqrt(1 +- eps) (i d - gc) + i sqrt(1 -+ eps) g e^{+-i chi} |^2
//          ------------------------------------------------------------
//               | (i (d - g) - gc) (i (d + g) - gc) |^2
//
// with d the effective probe-cavity detuning, g the effective lattice-cavity
// coupling, chi the grating phase, eps the coupling asymmetry and gc the
// cavity field decay rate. The measured trace is modeled as
// S * (M_plus - R * M_minus). Frequencies are in gamma_c units.
struct SpectrumModelParams {
    double g_ef = 0.0;     // effective coupling, >= 0
    double chi = 0.0;      // grating phase, radians in [-pi, pi)
    double retro_r = 0.0;  // retroaction weight, >= 0
    double scale_s = 1.0;  // overall scale, > 0 when fitted (0 allowed in evaluation)
    double epsilon = 0.93; // coupling asymmetry, in [0, 1]
    double gamma_c = 1.0;  // field decay rate, > 0
};

// Effective probe-cavity detuning d = delta_c - N g_delta xi_rad.
struct EffectiveDetuning {
    double value = 0.0;
};

// Squared moduli (M_plus, M_minus) of the two transfer functions.
// Throws invalid_params when gamma_c <= 0, epsilon outside [0, 1], or any
// input is non-finite. Both outputs are finite and >= 0.
std::pair<double, double> m_pm(EffectiveDetuning delta_ef, const SpectrumModelParams& p);

// S * (M_plus - R * M_minus); may go negative when the retroaction term wins.
double fit_model(EffectiveDetuning delta_ef, const SpectrumModelParams& p);

// fit_model evaluated over a strictly increasing detuning grid.
Spectrum model_curve(const std::vector<double>& grid, const SpectrumModelParams& p);

}  // namespace ringspec
