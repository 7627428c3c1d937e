#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringspec {

// ---------- errors ----------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad numeric arguments to a core operation (out-of-range epsilon, non-positive
// gamma_c, malformed grids, ...).
struct invalid_params : error {
    using error::error;
};

// Configuration file problems: syntax or unknown keys (with file:line), and
// schema violations naming the offending key.
struct config_error : error {
    using error::error;
};

// Malformed data file (spectrum/results); message carries path and line.
struct parse_error : error {
    using error::error;
};

// Filesystem-level failure (open/rename/write).
struct io_error : error {
    using error::error;
};

// Numerical failure inside the fitter.
struct fit_error : error {
    using error::error;
};

// ---------- units ----------

// All core math runs in angular frequency normalized so that one unit equals
// gamma_c = pi * 17.5 kHz (the empty-cavity half-linewidth). On disk, detuning
// axes are ordinary frequency in kHz: 1 internal unit = 8.75 kHz.
inline constexpr double kKhzPerUnit = 8.75;
inline constexpr double kLinewidthKhz = 17.5;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kUnitRadPerSec = kPi * kLinewidthKhz * 1e3;  // rad/s per internal unit
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Exact kHz <-> internal conversion: 8.75 = 35/4 needs only 6 mantissa bits,
// so the product fits an 80-bit long double without rounding and the reverse
// division recovers the original double bit-for-bit.
static_assert(std::numeric_limits<long double>::digits >= 59,
              "extended-precision long double required for lossless unit conversion");

inline double khz_to_internal(double khz) {
    return static_cast<double>(static_cast<long double>(khz) / 8.75L);
}

inline long double internal_to_khz(double internal) {
    return static_cast<long double>(internal) * 8.75L;
}

// Wrap an angle into [-pi, pi). Values already in range pass through
// unchanged; out-of-range values are reduced with std::remainder, which is
// exact, so wrapping commutes with any exact +2*pi shift of the argument.
inline double wrap_angle(double a) {
    if (a >= -kPi && a < kPi) return a;
    double r = std::remainder(a, 2.0 * kPi);
    if (r >= kPi) r -= 2.0 * kPi;  // remainder may return +pi
    return r;
}

// ---------- spectrum ----------

// One probe-transmission trace: strictly increasing detunings (internal
// units), transmission values, optional per-point 1-sigma uncertainties
// (all points or none), and free-form annotations.
struct Spectrum {
    std::vector<double> detuning;
    std::vector<double> value;
    std::vector<double> sigma;  // empty or same length as value
    std::map<std::string, std::string> meta;

    std::size_t size() const { return detuning.size(); }
    bool has_sigma() const { return !sigma.empty(); }
};

// Throws invalid_params on any structural violation.
void validate_spectrum(const Spectrum& s);

// Strictly increasing, non-empty evaluation grid; throws otherwise.
void validate_grid(const std::vector<double>& grid);

std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace ringspec
