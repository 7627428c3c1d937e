#include "ringspec/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace ringspec {

std::vector<Peak> find_peaks(const Spectrum& s, double min_prominence) {
    validate_spectrum(s);
    if (!(min_prominence >= 0.0)) throw invalid_params("find_peaks: min_prominence must be >= 0");

    const auto& x = s.detuning;
    const auto& y = s.value;
    const std::size_t n = y.size();

    // candidate maxima: strictly above both neighbours, plateaus collapsed to
    // their midpoint; endpoints never qualify
    struct Candidate {
        std::size_t lo, hi;  // plateau extent (inclusive)
        double pos, height;
    };
    std::vector<Candidate> cands;
    std::size_t i = 1;
    while (i < n) {
        if (!(y[i] > y[i - 1])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && y[j + 1] == y[i]) ++j;  // plateau run
        if (j + 1 < n && y[j + 1] < y[i])
            cands.push_back({i, j, 0.5 * (x[i] + x[j]), y[i]});
        i = j + 1;
    }

    std::vector<Peak> peaks;
    for (const auto& cand : cands) {
        // flanking minima: lowest point on the walk from the peak to the
        // nearest strictly higher ground (or the trace boundary) on each side
        double left_min = cand.height;
        for (std::size_t k = cand.lo; k-- > 0;) {
            if (y[k] > cand.height) break;
            left_min = std::min(left_min, y[k]);
        }
        double right_min = cand.height;
        for (std::size_t k = cand.hi + 1; k < n; ++k) {
            if (y[k] > cand.height) break;
            right_min = std::min(right_min, y[k]);
        }
        const double prominence = cand.height - std::max(left_min, right_min);
        if (prominence >= min_prominence)
            peaks.push_back({cand.pos, cand.height, prominence});
    }
    return peaks;
}

std::optional<double> estimate_splitting(const Spectrum& s) {
    auto peaks = find_peaks(s, 0.0);
    if (peaks.size() < 2) return std::nullopt;
    // two most prominent; ties resolved by height, then by lower detuning
    std::vector<std::size_t> order(peaks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (peaks[a].prominence != peaks[b].prominence)
            return peaks[a].prominence > peaks[b].prominence;
        if (peaks[a].height != peaks[b].height) return peaks[a].height > peaks[b].height;
        return peaks[a].detuning < peaks[b].detuning;
    });
    return std::abs(peaks[order[0]].detuning - peaks[order[1]].detuning);
}

XiAxEstimate infer_xi_ax(double splitting, const AtomCouplingParams& p) {
    if (!(splitting >= 0.0)) throw invalid_params("infer_xi_ax: splitting must be >= 0");
    const double denom = 2.0 * p.n_atoms * std::abs(coupling_detuned(p)) * p.xi_rad;
    if (!(denom > 0.0)) throw invalid_params("infer_xi_ax: zero denominator");
    const double raw = splitting / denom;
    if (raw > 1.0) return {1.0, true};
    return {raw, false};
}

CouplingRegime classify_scc(double g_ef, double gamma_c) {
    if (!(g_ef >= 0.0) || !(gamma_c >= 0.0))
        throw invalid_params("classify_scc: inputs must be >= 0");
    return g_ef > gamma_c ? CouplingRegime::strong : CouplingRegime::weak;
}

}  // namespace ringspec
