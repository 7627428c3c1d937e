#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ringspec/model.hpp"
#include "ringspec/spectrum.hpp"

namespace ringspec {

struct ParamBounds {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

// Free parameters are (g_ef, chi, R, S, delta_offset); epsilon and gamma_c
// stay fixed at the configured values. chi is periodic and is wrapped rather
// than clamped; the remaining parameters are projected onto their bounds
// after every accepted step.
struct FitConfig {
    double epsilon_fixed = 0.93;
    double gamma_c_fixed = 1.0;

    ParamBounds g_ef_bounds{0.0, std::numeric_limits<double>::infinity()};
    ParamBounds chi_bounds{-kPi, kPi};
    ParamBounds r_bounds{0.0, std::numeric_limits<double>::infinity()};
    ParamBounds s_bounds{1e-12, std::numeric_limits<double>::infinity()};
    ParamBounds offset_bounds{};

    int chi_starts = 8;     // equally spaced phase initializations
    int max_iter = 200;
    double tol_step = 1e-11;
    double tol_grad = 1e-10;
    double tol_cost = 1e-12;  // relative cost decrease below which we stop

    // Pin R = 0 when the initial coupling estimate is below gamma_c
    // (the weak-coupling regime where R is not identifiable).
    bool lock_r_zero_below_threshold = false;
    // Pin R to a fixed value outright.
    std::optional<double> fix_r;
};

enum class Termination { step, grad, cost, max_iter };

const char* to_string(Termination t);
std::optional<Termination> termination_from_string(const std::string& s);

// Explicit initial guess (used as an extra multi-start).
struct FitInit {
    double g_ef = 0.0;
    double chi = 0.0;
    double retro_r = 0.0;
    double scale_s = 1.0;
    double delta_offset = 0.0;
};

struct StartOutcome {
    double chi0 = 0.0;
    double cost = 0.0;
};

struct FitResult {
    SpectrumModelParams params;   // fitted; epsilon/gamma_c carry the fixed values
    double delta_offset = 0.0;    // fitted x-axis offset: delta_ef = x - delta_offset
    double cost = 0.0;            // sum of squared weighted residuals
    // 1-sigma uncertainties in the order (g_ef, chi, R, S, delta_offset),
    // from the residual-variance-scaled inverse of J^T J; infinite along
    // unidentifiable directions, 0 for pinned parameters.
    std::array<double, 5> param_sigmas{};
    int n_iter = 0;
    bool converged = false;
    Termination termination = Termination::max_iter;
    double chi_start_used = 0.0;
    bool chi_weak = false;  // sigma_chi > pi/4 or not identifiable
    bool r_fixed = false;

    // Diagnostics (not serialized): accepted-iterate costs of the winning
    // start, and the converged cost of every multi-start.
    std::vector<double> accepted_costs;
    std::vector<StartOutcome> start_costs;
};

// Weighted residuals r_i = (value_i - model(detuning_i - delta_offset)) / sigma_i,
// with unit weights when the spectrum carries no sigma column.
std::vector<double> residuals(const Spectrum& s, const SpectrumModelParams& params,
                              double delta_offset);

// Central-difference Jacobian of the residual vector with respect to
// (g_ef, chi, R, S, delta_offset), row-major n x 5. Steps are
// step_scale * max(1e-6 |p|, 1e-8); step_scale < 1 gives the finer-step
// reference used to verify the default.
std::vector<double> residual_jacobian(const Spectrum& s, const SpectrumModelParams& params,
                                      double delta_offset, double step_scale = 1.0);

// Damped least squares (Levenberg-Marquardt) with multi-start over the
// periodic phase. Returns the best start's local minimum; ties in cost go to
// the smallest |chi|. Throws fit_error when the spectrum has fewer points
// than free parameters or the normal equations degenerate.
FitResult fit_spectrum(const Spectrum& s, const FitConfig& cfg,
                       const std::optional<FitInit>& init = std::nullopt);

struct TraceFit {
    double n_atoms = 0.0;
    std::optional<FitResult> result;
    std::string error;  // non-empty when this trace failed
    std::string source; // originating file, when known
};

// Fits an atom-number series in ascending N, warm-starting each trace from
// the previous result. Every spectrum must carry an n_atoms meta entry.
// A failed trace is recorded and does not abort the batch.
std::vector<TraceFit> batch_fit(const std::vector<Spectrum>& series, const FitConfig& cfg);

struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares of fitted g_ef on N over the successful traces.
// Throws invalid_params without at least two distinct abscissae.
Regression regress_gef_vs_n(const std::vector<TraceFit>& table);

}  // namespace ringspec
