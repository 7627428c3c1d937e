#include "ringspec/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ringspec/analysis.hpp"

namespace ringspec {

namespace {

constexpr int kNumParams = 5;  // g_ef, chi, R, S, delta_offset
constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec5 = std::array<double, kNumParams>;

Vec5 pack(const SpectrumModelParams& p, double delta_offset) {
    return {p.g_ef, p.chi, p.retro_r, p.scale_s, delta_offset};
}

SpectrumModelParams unpack(const Vec5& v, const FitConfig& cfg) {
    SpectrumModelParams p;
    p.g_ef = v[0];
    p.chi = v[1];
    p.retro_r = v[2];
    p.scale_s = v[3];
    p.epsilon = cfg.epsilon_fixed;
    p.gamma_c = cfg.gamma_c_fixed;
    return p;
}

double clamp(double v, const ParamBounds& b) { return std::min(std::max(v, b.lo), b.hi); }

// chi is periodic: wrap first, clamp only if the user narrowed the interval
Vec5 project(Vec5 v, const FitConfig& cfg) {
    v[0] = clamp(v[0], cfg.g_ef_bounds);
    v[1] = clamp(wrap_angle(v[1]), cfg.chi_bounds);
    v[2] = clamp(v[2], cfg.r_bounds);
    v[3] = clamp(v[3], cfg.s_bounds);
    v[4] = clamp(v[4], cfg.offset_bounds);
    return v;
}

std::vector<double> eval_residuals(const Spectrum& s, const Vec5& v, const FitConfig& cfg) {
    return residuals(s, unpack(v, cfg), v[4]);
}

double cost_of(const std::vector<double>& r) {
    double c = 0.0;
    for (double ri : r) c += ri * ri;
    return c;
}

double fd_step(double p) { return std::max(1e-6 * std::abs(p), 1e-8); }

Eigen::MatrixXd jacobian_masked(const Spectrum& s, const Vec5& v, const FitConfig& cfg,
                                const std::array<bool, kNumParams>& free_mask) {
    const std::size_t n = s.size();
    int k = 0;
    for (bool f : free_mask) k += f;
    Eigen::MatrixXd J(static_cast<Eigen::Index>(n), k);
    int col = 0;
    for (int j = 0; j < kNumParams; ++j) {
        if (!free_mask[j]) continue;
        const double h = fd_step(v[j]);
        Vec5 vp = v, vm = v;
        vp[j] += h;
        vm[j] -= h;
        const auto rp = eval_residuals(s, vp, cfg);
        const auto rm = eval_residuals(s, vm, cfg);
        for (std::size_t i = 0; i < n; ++i)
            J(static_cast<Eigen::Index>(i), col) = (rp[i] - rm[i]) / (2.0 * h);
        ++col;
    }
    if (!J.allFinite()) throw fit_error("fit: non-finite Jacobian");
    return J;
}

struct LocalFit {
    Vec5 params{};
    double cost = 0.0;
    int n_iter = 0;
    bool converged = false;
    Termination termination = Termination::max_iter;
    std::vector<double> accepted_costs;
    Eigen::MatrixXd jacobian;  // at the solution, free columns only
};

// Levenberg-Marquardt with lambda*I damping, bound projection after each step.
LocalFit lm_minimize(const Spectrum& s, Vec5 start, const FitConfig& cfg,
                     const std::array<bool, kNumParams>& free_mask) {
    LocalFit out;
    Vec5 p = project(start, cfg);
    std::vector<double> r = eval_residuals(s, p, cfg);
    double cost = cost_of(r);
    out.accepted_costs.push_back(cost);

    double lambda = 1e-3;
    double nu = 2.0;  // Nielsen gain-ratio damping update
    Eigen::MatrixXd J;
    bool have_j = false;

    int iter = 0;
    for (; iter < cfg.max_iter; ++iter) {
        if (!have_j) {
            J = jacobian_masked(s, p, cfg, free_mask);
            have_j = true;
        }
        Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
        Eigen::VectorXd grad = J.transpose() * rv;

        if (grad.lpNorm<Eigen::Infinity>() <= cfg.tol_grad) {
            out.converged = true;
            out.termination = Termination::grad;
            break;
        }

        Eigen::MatrixXd jtj = J.transpose() * J;
        // Marquardt scaling: damp proportionally to the curvature, floored so
        // that an exactly flat direction (chi at g_ef = 0) stays regular
        Eigen::VectorXd damp_scale = jtj.diagonal();
        const double max_diag = std::max(damp_scale.maxCoeff(), 0.0);
        for (Eigen::Index d = 0; d < damp_scale.size(); ++d)
            damp_scale(d) = std::max(damp_scale(d), std::max(1e-10 * max_diag, 1e-300));

        bool accepted = false;
        for (int attempt = 0; attempt < 50; ++attempt) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index d = 0; d < a.rows(); ++d) a(d, d) += lambda * damp_scale(d);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
            if (ldlt.info() != Eigen::Success)
                throw fit_error("fit: singular normal equations");
            Eigen::VectorXd dp = ldlt.solve(-grad);
            if (!dp.allFinite()) throw fit_error("fit: singular normal equations");

            Vec5 trial = p;
            int col = 0;
            for (int j = 0; j < kNumParams; ++j)
                if (free_mask[j]) trial[j] += dp(col++);
            trial = project(trial, cfg);

            const auto r_try = eval_residuals(s, trial, cfg);
            const double cost_try = cost_of(r_try);
            if (cost_try < cost) {
                double step_inf = 0.0, p_inf = 0.0;
                for (int j = 0; j < kNumParams; ++j) {
                    step_inf = std::max(step_inf, std::abs(trial[j] - p[j]));
                    p_inf = std::max(p_inf, std::abs(p[j]));
                }
                const double drop = cost - cost_try;
                // predicted reduction of the linearized model for this step
                const Eigen::VectorXd jdp = J * dp;
                const double predicted = -2.0 * rv.dot(jdp) - jdp.squaredNorm();
                const double gain = predicted > 0.0 ? drop / predicted : 1.0;
                p = trial;
                r = r_try;
                cost = cost_try;
                out.accepted_costs.push_back(cost);
                const double shrink = 1.0 - std::pow(2.0 * gain - 1.0, 3.0);
                lambda = std::max(lambda * std::max(1.0 / 3.0, shrink), 1e-14);
                nu = 2.0;
                have_j = false;
                accepted = true;
                const double cost_floor = cfg.tol_cost * std::max(cost, 1e-300);
                if (cost == 0.0 || (drop <= cost_floor && std::abs(predicted) <= cost_floor)) {
                    out.converged = true;
                    out.termination = Termination::cost;
                } else if (step_inf <= cfg.tol_step * (1.0 + p_inf)) {
                    out.converged = true;
                    out.termination = Termination::step;
                }
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if (lambda > 1e14) {
                // damping has shrunk the step to nothing: a local minimum at
                // this resolution
                out.converged = true;
                out.termination = Termination::step;
                accepted = true;
                break;
            }
        }
        if (out.converged) {
            ++iter;
            break;
        }
        if (!accepted) {
            out.converged = true;
            out.termination = Termination::step;
            ++iter;
            break;
        }
    }

    out.params = p;
    out.cost = cost;
    out.n_iter = iter;
    if (!out.converged) out.termination = Termination::max_iter;
    out.jacobian = jacobian_masked(s, p, cfg, free_mask);
    return out;
}

// sigma_i from the residual-variance-scaled pseudo-inverse of J^T J;
// directions with negligible curvature get infinite uncertainty.
std::array<double, kNumParams> parameter_sigmas(const Eigen::MatrixXd& J, double cost,
                                                std::size_t n_points,
                                                const std::array<bool, kNumParams>& free_mask) {
    std::array<double, kNumParams> sigmas{};
    const int k = static_cast<int>(J.cols());
    const double dof = static_cast<double>(n_points) - static_cast<double>(k);
    const double s2 = dof > 0.0 ? cost / dof : kInf;

    Eigen::MatrixXd jtj = J.transpose() * J;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jtj);
    if (es.info() != Eigen::Success) {
        for (int j = 0; j < kNumParams; ++j) sigmas[j] = free_mask[j] ? kInf : 0.0;
        return sigmas;
    }
    const auto& evals = es.eigenvalues();
    const auto& evecs = es.eigenvectors();
    const double lam_max = std::max(evals(k - 1), 0.0);
    const double lam_floor = std::max(lam_max * 1e-12, 1e-300);

    int col = 0;
    for (int j = 0; j < kNumParams; ++j) {
        if (!free_mask[j]) {
            sigmas[j] = 0.0;
            continue;
        }
        double var = 0.0;
        bool unbounded = false;
        for (int m = 0; m < k; ++m) {
            const double w = evecs(col, m);
            if (evals(m) <= lam_floor) {
                if (w * w > 1e-20) unbounded = true;
            } else {
                var += w * w / evals(m);
            }
        }
        sigmas[j] = unbounded || !std::isfinite(s2) ? kInf : std::sqrt(var * s2);
        ++col;
    }
    return sigmas;
}

// Peak-based starting point: mid-point and half-separation of a resolved
// doublet, otherwise the single maximum with a small coupling seed.
void heuristic_init(const Spectrum& s, const FitConfig& cfg, double& g0, double& offset0) {
    const auto [min_it, max_it] = std::minmax_element(s.value.begin(), s.value.end());
    const double range = *max_it - *min_it;
    const auto peaks = find_peaks(s, 0.05 * range);
    if (peaks.size() >= 2) {
        std::vector<Peak> top(peaks);
        std::sort(top.begin(), top.end(),
                  [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
        const double x1 = std::min(top[0].detuning, top[1].detuning);
        const double x2 = std::max(top[0].detuning, top[1].detuning);
        offset0 = 0.5 * (x1 + x2);
        g0 = 0.5 * (x2 - x1);
    } else if (peaks.size() == 1) {
        offset0 = peaks[0].detuning;
        g0 = 0.5 * cfg.gamma_c_fixed;
    } else {
        offset0 = 0.5 * (s.detuning.front() + s.detuning.back());
        g0 = 0.5 * cfg.gamma_c_fixed;
    }
}

double scale_seed(const Spectrum& s, const Vec5& v, const FitConfig& cfg) {
    SpectrumModelParams p = unpack(v, cfg);
    p.scale_s = 1.0;
    double model_max = 0.0;
    for (double x : s.detuning)
        model_max = std::max(model_max, fit_model(EffectiveDetuning{x - v[4]}, p));
    const double data_max = *std::max_element(s.value.begin(), s.value.end());
    if (!(model_max > 0.0) || !(data_max > 0.0)) return 1.0;
    return data_max / model_max;
}

}  // namespace

const char* to_string(Termination t) {
    switch (t) {
        case Termination::step: return "step";
        case Termination::grad: return "grad";
        case Termination::cost: return "cost";
        case Termination::max_iter: return "max_iter";
    }
    return "max_iter";
}

std::optional<Termination> termination_from_string(const std::string& s) {
    if (s == "step") return Termination::step;
    if (s == "grad") return Termination::grad;
    if (s == "cost") return Termination::cost;
    if (s == "max_iter") return Termination::max_iter;
    return std::nullopt;
}

std::vector<double> residuals(const Spectrum& s, const SpectrumModelParams& params,
                              double delta_offset) {
    validate_spectrum(s);
    if (s.size() == 0) throw invalid_params("residuals: empty spectrum");
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double m = fit_model(EffectiveDetuning{s.detuning[i] - delta_offset}, params);
        const double w = s.has_sigma() ? s.sigma[i] : 1.0;
        r[i] = (s.value[i] - m) / w;
    }
    return r;
}

std::vector<double> residual_jacobian(const Spectrum& s, const SpectrumModelParams& params,
                                      double delta_offset, double step_scale) {
    if (!(step_scale > 0.0)) throw invalid_params("residual_jacobian: step_scale must be > 0");
    validate_spectrum(s);
    const Vec5 v = pack(params, delta_offset);
    const std::size_t n = s.size();
    std::vector<double> J(n * kNumParams);
    FitConfig cfg;  // carries only epsilon/gamma_c into unpack
    cfg.epsilon_fixed = params.epsilon;
    cfg.gamma_c_fixed = params.gamma_c;
    for (int j = 0; j < kNumParams; ++j) {
        const double h = fd_step(v[j]) * step_scale;
        Vec5 vp = v, vm = v;
        vp[j] += h;
        vm[j] -= h;
        const auto rp = eval_residuals(s, vp, cfg);
        const auto rm = eval_residuals(s, vm, cfg);
        for (std::size_t i = 0; i < n; ++i) J[i * kNumParams + j] = (rp[i] - rm[i]) / (2.0 * h);
    }
    return J;
}

namespace {

// One full multi-start pass with a given R pinning.
FitResult multistart_fit(const Spectrum& s, const FitConfig& cfg,
                         const std::optional<FitInit>& init, bool r_fixed, double r_pinned) {
    std::array<bool, kNumParams> free_mask = {true, true, true, true, true};
    if (r_fixed) free_mask[2] = false;

    int n_free = 0;
    for (bool f : free_mask) n_free += f;
    if (s.size() < static_cast<std::size_t>(n_free))
        throw fit_error("fit: fewer points than free parameters");

    double g0 = 0.0, offset0 = 0.0;
    heuristic_init(s, cfg, g0, offset0);

    // multi-start over the periodic phase, plus the caller's guess if any
    std::vector<Vec5> starts;
    for (int k = 0; k < cfg.chi_starts; ++k) {
        const double chi0 =
            -kPi + (static_cast<double>(k) + 0.5) * 2.0 * kPi / static_cast<double>(cfg.chi_starts);
        Vec5 v = {g0, chi0, r_fixed ? r_pinned : 0.0, 1.0, offset0};
        v[3] = scale_seed(s, v, cfg);
        starts.push_back(project(v, cfg));
    }
    if (init) {
        Vec5 v = {init->g_ef, init->chi, r_fixed ? r_pinned : init->retro_r, init->scale_s,
                  init->delta_offset};
        starts.push_back(project(v, cfg));
    }

    std::optional<LocalFit> best;
    double best_chi0 = 0.0;
    std::vector<StartOutcome> outcomes;
    for (const auto& start : starts) {
        LocalFit lf = lm_minimize(s, start, cfg, free_mask);
        outcomes.push_back({start[1], lf.cost});
        bool take = false;
        if (!best) {
            take = true;
        } else {
            const double tol = 1e-12 * std::max(1.0, std::max(best->cost, lf.cost));
            if (lf.cost < best->cost - tol)
                take = true;
            else if (std::abs(lf.cost - best->cost) <= tol &&
                     std::abs(wrap_angle(lf.params[1])) < std::abs(wrap_angle(best->params[1])))
                take = true;  // equal cost: smallest |chi| wins
        }
        if (take) {
            best = std::move(lf);
            best_chi0 = start[1];
        }
    }

    FitResult res;
    res.params = unpack(best->params, cfg);
    res.delta_offset = best->params[4];
    res.cost = best->cost;
    res.n_iter = best->n_iter;
    res.converged = best->converged;
    res.termination = best->termination;
    res.chi_start_used = best_chi0;
    res.r_fixed = r_fixed;
    res.accepted_costs = std::move(best->accepted_costs);
    res.start_costs = std::move(outcomes);
    res.param_sigmas = parameter_sigmas(best->jacobian, best->cost, s.size(), free_mask);
    res.chi_weak = !(res.param_sigmas[1] <= kPi / 4.0);
    return res;
}

}  // namespace

FitResult fit_spectrum(const Spectrum& s, const FitConfig& cfg,
                       const std::optional<FitInit>& init) {
    validate_spectrum(s);
    if (cfg.chi_starts < 1) throw invalid_params("fit: chi_starts must be >= 1");
    if (!(cfg.tol_step > 0.0 && cfg.tol_grad > 0.0 && cfg.tol_cost > 0.0))
        throw invalid_params("fit: tolerances must be > 0");
    if (!(cfg.gamma_c_fixed > 0.0)) throw invalid_params("fit: gamma_c_fixed must be > 0");
    if (!(cfg.epsilon_fixed >= 0.0 && cfg.epsilon_fixed <= 1.0))
        throw invalid_params("fit: epsilon_fixed must lie in [0, 1]");

    if (cfg.fix_r) return multistart_fit(s, cfg, init, true, *cfg.fix_r);

    FitResult res = multistart_fit(s, cfg, init, false, 0.0);
    if (cfg.lock_r_zero_below_threshold && res.params.g_ef < cfg.gamma_c_fixed) {
        // weak coupling: R rides an S*(M+ - R M-) degeneracy, so refit with
        // the below-threshold convention R = 0
        FitInit warm{res.params.g_ef, res.params.chi, 0.0, res.params.scale_s, res.delta_offset};
        return multistart_fit(s, cfg, warm, true, 0.0);
    }
    return res;
}

std::vector<TraceFit> batch_fit(const std::vector<Spectrum>& series, const FitConfig& cfg) {
    if (series.empty()) throw invalid_params("batch_fit: empty series");

    std::vector<TraceFit> table;
    table.reserve(series.size());
    for (const auto& s : series) {
        TraceFit t;
        auto it = s.meta.find("n_atoms");
        if (it == s.meta.end()) {
            t.n_atoms = std::numeric_limits<double>::quiet_NaN();
            t.error = "missing n_atoms meta entry";
        } else {
            try {
                t.n_atoms = std::stod(it->second);
            } catch (const std::exception&) {
                t.n_atoms = std::numeric_limits<double>::quiet_NaN();
                t.error = "unparseable n_atoms meta entry";
            }
        }
        auto src = s.meta.find("source");
        if (src != s.meta.end()) t.source = src->second;
        table.push_back(std::move(t));
    }

    // ascending N, warm-starting each fit from the previous trace
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (table[i].error.empty()) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return table[a].n_atoms < table[b].n_atoms; });

    std::optional<FitInit> warm;
    for (std::size_t idx : order) {
        try {
            FitResult r = fit_spectrum(series[idx], cfg, warm);
            warm = FitInit{r.params.g_ef, r.params.chi, r.params.retro_r, r.params.scale_s,
                           r.delta_offset};
            table[idx].result = std::move(r);
        } catch (const error& e) {
            table[idx].error = e.what();
        }
    }
    return table;
}

Regression regress_gef_vs_n(const std::vector<TraceFit>& table) {
    std::vector<double> xs, ys;
    for (const auto& t : table) {
        if (!t.result || !std::isfinite(t.n_atoms)) continue;
        xs.push_back(t.n_atoms);
        ys.push_back(t.result->params.g_ef);
    }
    if (xs.size() < 2) throw invalid_params("regression: need at least two fitted traces");
    const double x0 = xs.front();
    bool distinct = false;
    for (double x : xs)
        if (x != x0) distinct = true;
    if (!distinct) throw invalid_params("regression: degenerate abscissa (all N equal)");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    Regression reg;
    reg.slope = sxy / sxx;
    reg.intercept = my - reg.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (reg.intercept + reg.slope * xs[i]);
        ss_res += e * e;
    }
    reg.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    return reg;
}

}  // namespace ringspec
