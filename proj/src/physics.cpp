#include "ringspec/physics.hpp"

#include <cmath>

namespace ringspec {

std::optional<std::string> validate_cavity(const CavityParams& cav) {
    if (!(cav.gamma_c > 0.0)) throw invalid_params("cavity: gamma_c must be > 0");
    if (!(cav.finesse > 0.0)) throw invalid_params("cavity: finesse must be > 0");
    if (!(cav.round_trip_m > 0.0)) throw invalid_params("cavity: round_trip_m must be > 0");
    if (!(cav.fsr_hz > 0.0)) throw invalid_params("cavity: fsr must be > 0");
    if (!(cav.waist_m > 0.0)) throw invalid_params("cavity: waist must be > 0");
    const double fsr_geom = kSpeedOfLight / cav.round_trip_m;
    if (std::abs(cav.fsr_hz - fsr_geom) > 0.01 * fsr_geom)
        return "cavity: fsr " + std::to_string(cav.fsr_hz) + " Hz differs from c/round_trip = " +
               std::to_string(fsr_geom) + " Hz by more than 1%";
    return std::nullopt;
}

void validate_atoms(const AtomCouplingParams& p) {
    if (!(p.gamma_atom > 0.0)) throw invalid_params("atoms: gamma_atom must be > 0");
    if (!(p.n_atoms >= 0.0)) throw invalid_params("atoms: n_atoms must be >= 0");
    if (!(p.xi_rad >= 0.0 && p.xi_rad <= 1.0)) throw invalid_params("atoms: xi_rad must lie in [0, 1]");
    if (!(p.xi_ax >= 0.0 && p.xi_ax <= 1.0)) throw invalid_params("atoms: xi_ax must lie in [0, 1]");
    if (!std::isfinite(p.g0) || !std::isfinite(p.delta_atom))
        throw invalid_params("atoms: non-finite input");
}

double coupling_detuned(const AtomCouplingParams& p) {
    validate_atoms(p);
    const double r = p.delta_atom / p.gamma_atom;
    return p.g0 / std::sqrt(1.0 + 4.0 * r * r);
}

double coupling_signed(const AtomCouplingParams& p) {
    return std::copysign(coupling_detuned(p), p.delta_atom);
}

double light_shift_per_photon(const AtomCouplingParams& p) {
    validate_atoms(p);
    if (p.delta_atom == 0.0)
        throw invalid_params("light_shift_per_photon: zero detuning");
    // w0^2 / (4 delta) with w0^2 = 2 Gamma g0
    return p.g0 * p.gamma_atom / (2.0 * p.delta_atom);
}

std::pair<EffectiveDetuning, double> effective_params(const AtomCouplingParams& p, double delta_c) {
    const double mid = p.n_atoms * coupling_signed(p) * p.xi_rad;
    const double g_ef = std::abs(mid * p.xi_ax);
    return {EffectiveDetuning{delta_c - mid}, g_ef};
}

std::pair<double, double> normal_mode_shifts(const AtomCouplingParams& p) {
    const double mid = p.n_atoms * coupling_signed(p) * p.xi_rad;
    const double half = mid * p.xi_ax;
    const double a = mid - half;
    const double b = mid + half;
    return {std::min(a, b), std::max(a, b)};
}

long long scc_threshold(const AtomCouplingParams& p, const CavityParams& cav) {
    const double per_atom = coupling_detuned(p) * p.xi_rad * p.xi_ax;
    if (!(per_atom > 0.0))
        throw invalid_params("scc_threshold: non-positive per-atom coupling");
    long long n = static_cast<long long>(std::floor(cav.gamma_c / per_atom)) + 1;
    if (n < 1) n = 1;
    // guard against division rounding around the integer boundary
    while (n > 1 && static_cast<double>(n - 1) * per_atom > cav.gamma_c) --n;
    while (!(static_cast<double>(n) * per_atom > cav.gamma_c)) ++n;
    return n;
}

double wavelength_offset_to_angular(double detuning_nm, double lambda_nm) {
    if (!(lambda_nm > 0.0)) throw invalid_params("wavelength: lambda must be > 0");
    const double lambda_m = lambda_nm * 1e-9;
    return 2.0 * kPi * kSpeedOfLight * (detuning_nm * 1e-9) / (lambda_m * lambda_m);
}

}  // namespace ringspec
