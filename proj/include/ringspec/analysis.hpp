#pragma once

#include <optional>
#include <vector>

#include "ringspec/physics.hpp"
#include "ringspec/spectrum.hpp"

namespace ringspec {

struct Peak {
    double detuning = 0.0;
    double height = 0.0;
    double prominence = 0.0;  // height above the higher of the two flanking minima
};

// Local maxima by 3-point comparison, plateaus reported at their midpoint,
// filtered by prominence. Returned in ascending detuning; endpoints are never
// peaks. May be empty.
std::vector<Peak> find_peaks(const Spectrum& s, double min_prominence);

// Distance between the two most prominent peaks, or nullopt when fewer than
// two exist. Half of it approximates g_ef (biased inward for overlapping
// modes, outward for well-split ones; the fitter is the authoritative source).
std::optional<double> estimate_splitting(const Spectrum& s);

struct XiAxEstimate {
    double value = 0.0;
    bool clamped = false;  // raw estimate fell outside [0, 1]
};

// xi_ax = splitting / (2 N |g_delta| xi_rad), clamped to [0, 1] with a flag.
// Throws invalid_params when the denominator vanishes.
XiAxEstimate infer_xi_ax(double splitting, const AtomCouplingParams& p);

enum class CouplingRegime { weak, strong };

// strong iff g_ef > gamma_c (strict; the boundary counts as weak).
CouplingRegime classify_scc(double g_ef, double gamma_c);

}  // namespace ringspec
