// ringspec command-line front end: simulate -> fit -> analyze.
//
// Exit codes: 0 ok, 1 usage/config error, 2 I/O error, 3 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ringspec/analysis.hpp"
#include "ringspec/fit.hpp"
#include "ringspec/io.hpp"
#include "ringspec/physics.hpp"
#include "ringspec/synth.hpp"

namespace fs = std::filesystem;
using namespace ringspec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

RunConfig load_config(const std::string& path) {
    if (path.empty()) return default_config();
    return read_config(path);
}

std::vector<double> build_grid(const RunConfig& cfg, double g_ef_max) {
    if (cfg.grid_lo && cfg.grid_hi)
        return linspace(cfg.to_internal(*cfg.grid_lo), cfg.to_internal(*cfg.grid_hi),
                        cfg.grid_points);
    return default_grid(g_ef_max, cfg.grid_points, cfg.grid_pad);
}

std::string trace_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace%02zu.csv", index + 1);
    return buf;
}

int cmd_simulate(const std::string& config_path, bool ladder,
                 const std::vector<double>& n_atoms_args,
                 const std::optional<std::uint64_t>& seed_arg, const std::string& out_dir) {
    RunConfig cfg = load_config(config_path);
    NoiseSpec noise = cfg.noise_spec();
    if (seed_arg) noise.seed = *seed_arg;

    std::vector<double> n_list;
    if (ladder)
        n_list = ladder_atom_numbers();
    else if (!n_atoms_args.empty())
        n_list = n_atoms_args;
    else
        n_list = {cfg.n_atoms};

    const AtomCouplingParams atoms = cfg.atoms();
    double g_ef_max = 0.0;
    for (double n : n_list) {
        AtomCouplingParams a = atoms;
        a.n_atoms = n;
        g_ef_max = std::max(g_ef_max, effective_params(a, 0.0).second);
    }
    const std::vector<double> grid = build_grid(cfg, g_ef_max);
    const std::vector<Spectrum> spectra =
        generate_series(n_list, atoms, cfg.cavity(), cfg.series(), grid, noise);

    fs::create_directories(out_dir);
    std::string manifest = "trace,n_atoms,file\n";
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const std::string name = trace_filename(i);
        write_spectrum(spectra[i], (fs::path(out_dir) / name).string());
        manifest += std::to_string(i + 1) + "," +
                    std::to_string(static_cast<long long>(std::llround(n_list[i]))) + "," + name +
                    "\n";
    }
    write_text_file((fs::path(out_dir) / "manifest.csv").string(), manifest);
    std::cout << "wrote " << spectra.size() << " spectra to " << out_dir << "\n";
    return kExitOk;
}

int error_code_for(const error& e) {
    if (dynamic_cast<const config_error*>(&e)) return kExitUsage;
    if (dynamic_cast<const io_error*>(&e) || dynamic_cast<const parse_error*>(&e)) return kExitIo;
    return kExitNumerical;
}

int cmd_fit(const std::string& config_path, const std::vector<std::string>& inputs,
            const std::optional<double>& fix_r, const std::string& out_dir) {
    RunConfig cfg = load_config(config_path);
    FitConfig fc = cfg.fit();
    if (fix_r) fc.fix_r = *fix_r;

    std::vector<Spectrum> loaded;
    std::vector<TraceFit> failed;
    int first_fail_code = kExitNumerical;
    for (const auto& path : inputs) {
        try {
            Spectrum s = read_spectrum(path);
            s.meta["source"] = fs::path(path).filename().string();
            loaded.push_back(std::move(s));
        } catch (const error& e) {
            std::cerr << "error: " << e.what() << "\n";
            TraceFit t;
            t.n_atoms = std::numeric_limits<double>::quiet_NaN();
            t.source = fs::path(path).filename().string();
            t.error = e.what();
            if (failed.empty() && loaded.empty()) first_fail_code = error_code_for(e);
            failed.push_back(std::move(t));
        }
    }
    if (loaded.empty()) {
        std::cerr << "error: no readable input spectra\n";
        return failed.empty() ? kExitIo : first_fail_code;
    }

    const bool all_have_n = std::all_of(loaded.begin(), loaded.end(), [](const Spectrum& s) {
        return s.meta.count("n_atoms") > 0;
    });

    std::vector<TraceFit> table;
    if (all_have_n) {
        table = batch_fit(loaded, fc);
    } else {
        for (const auto& s : loaded) {
            TraceFit t;
            t.n_atoms = std::numeric_limits<double>::quiet_NaN();
            if (auto it = s.meta.find("n_atoms"); it != s.meta.end()) {
                try {
                    t.n_atoms = std::stod(it->second);
                } catch (const std::exception&) {
                }
            }
            if (auto src = s.meta.find("source"); src != s.meta.end()) t.source = src->second;
            try {
                t.result = fit_spectrum(s, fc);
            } catch (const error& e) {
                t.error = e.what();
            }
            table.push_back(std::move(t));
        }
    }
    for (auto& t : failed) table.push_back(std::move(t));

    fs::create_directories(out_dir);

    // fitted curve on the data grid, for data-plus-fit overlays
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        const auto& t = table[i];
        if (!t.result) continue;
        const FitResult& r = *t.result;
        Spectrum curve;
        curve.detuning = loaded[i].detuning;
        curve.value.reserve(curve.detuning.size());
        for (double x : curve.detuning)
            curve.value.push_back(fit_model(EffectiveDetuning{x - r.delta_offset}, r.params));
        if (auto it = loaded[i].meta.find("n_atoms"); it != loaded[i].meta.end())
            curve.meta["n_atoms"] = it->second;
        curve.meta["curve"] = "fit";
        const std::string stem = fs::path(t.source).stem().string();
        write_spectrum(curve, (fs::path(out_dir) / (stem + "_fit.csv")).string());
    }

    write_results(table, (fs::path(out_dir) / "results.json").string());
    write_results_csv(table, (fs::path(out_dir) / "results.csv").string());

    std::size_t ok = 0;
    for (const auto& t : table)
        if (t.result) ++ok;
    std::cout << "fitted " << ok << "/" << table.size() << " spectra; results in " << out_dir
              << "\n";
    if (ok == 0) return first_fail_code;
    return kExitOk;
}

int cmd_analyze(const std::string& config_path, const std::string& results_path,
                const std::string& out_dir) {
    RunConfig cfg = load_config(config_path);
    const std::vector<TraceFit> table = read_results(results_path);
    const double gamma_c = cfg.gamma_c_internal();
    const char* unit_name = cfg.units == Units::khz ? "kHz" : "gamma_c";

    std::ostringstream rep;
    std::ostringstream csv;
    rep << "# ringspec analysis of " << fs::path(results_path).filename().string() << "\n";
    rep << "# frequencies in " << unit_name << "\n\n";
    csv << "n_atoms,g_ef,sigma_g_ef,r,sigma_r,s,sigma_s,chi,sigma_chi,scc,chi_weak,converged\n";

    std::vector<double> s_values;
    for (const auto& t : table) {
        if (!t.result) {
            rep << "trace N=" << format_double(t.n_atoms) << ": failed (" << t.error << ")\n";
            continue;
        }
        const FitResult& r = *t.result;
        const auto regime = classify_scc(r.params.g_ef, gamma_c);
        const char* scc = regime == CouplingRegime::strong ? "strong" : "weak";
        rep << "trace N=" << format_double(t.n_atoms) << ": g_ef = "
            << format_double(cfg.from_internal(r.params.g_ef)) << " +- "
            << format_double(cfg.from_internal(r.param_sigmas[0])) << " " << unit_name
            << ", R = " << format_double(r.params.retro_r)
            << ", S = " << format_double(r.params.scale_s)
            << ", chi = " << format_double(r.params.chi)
            << (r.chi_weak ? " (weakly identified)" : "") << ", " << scc << " coupling\n";
        csv << format_double(t.n_atoms) << ',' << format_double(cfg.from_internal(r.params.g_ef))
            << ',' << format_double(cfg.from_internal(r.param_sigmas[0])) << ','
            << format_double(r.params.retro_r) << ',' << format_double(r.param_sigmas[2]) << ','
            << format_double(r.params.scale_s) << ',' << format_double(r.param_sigmas[3]) << ','
            << format_double(r.params.chi) << ',' << format_double(r.param_sigmas[1]) << ',' << scc
            << ',' << (r.chi_weak ? "true" : "false") << ',' << (r.converged ? "true" : "false")
            << '\n';
        s_values.push_back(r.params.scale_s);
    }
    rep << "\n";

    try {
        const Regression reg = regress_gef_vs_n(table);
        rep << "g_ef vs N regression: slope = " << format_double(cfg.from_internal(reg.slope))
            << " " << unit_name << "/atom, intercept = "
            << format_double(cfg.from_internal(reg.intercept)) << " " << unit_name
            << ", r_squared = " << format_double(reg.r_squared) << "\n";
        const AtomCouplingParams atoms = cfg.atoms();
        const double per_atom = std::abs(coupling_detuned(atoms)) * atoms.xi_rad;
        if (per_atom > 0.0) {
            const double xi_ax_est = reg.slope / per_atom;
            rep << "implied xi_ax from slope: " << format_double(xi_ax_est) << "\n";
        }
    } catch (const invalid_params&) {
        rep << "g_ef vs N regression: skipped (need at least two fitted traces with distinct N)\n";
    }
    rep << "note: chi values for weak-coupling traces are bounded only by the +-"
        << format_double(cfg.path_asymmetry_percent)
        << " % optical path asymmetry; that band is not modeled here\n";

    if (s_values.size() >= 2) {
        const auto [mn, mx] = std::minmax_element(s_values.begin(), s_values.end());
        double mean = 0.0;
        for (double v : s_values) mean += v;
        mean /= static_cast<double>(s_values.size());
        const double spread_pct = mean != 0.0 ? 100.0 * (*mx - *mn) / mean : 0.0;
        rep << "scale factor S spread: " << format_double(spread_pct)
            << " % (reference measurement: better than 12 %)\n";
    }

    std::cout << rep.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "report.txt").string(), rep.str());
        write_text_file((fs::path(out_dir) / "fig3.csv").string(), csv.str());
        std::cout << "report written to " << out_dir << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probe-transmission spectra of an optical lattice in a ring cavity: "
                 "simulate, fit, analyze"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "run configuration file")
        ->envname("RINGSPEC_CONFIG");

    auto* sim = app.add_subcommand("simulate", "generate synthetic spectra");
    bool ladder = false;
    std::vector<double> n_atoms_args;
    std::string sim_out = "out_sim";
    std::optional<std::uint64_t> seed_arg;
    sim->add_flag("--ladder", ladder, "use the 11-trace reference atom-number ladder");
    sim->add_option("--n-atoms", n_atoms_args, "atom numbers, comma separated")
        ->delimiter(',')
        ->excludes("--ladder");
    sim->add_option("--seed", seed_arg, "override the noise seed");
    sim->add_option("-o,--out", sim_out, "output directory");

    auto* fit = app.add_subcommand("fit", "fit spectra and write results");
    std::vector<std::string> fit_inputs;
    std::string fit_out = "out_fit";
    std::optional<double> fix_r;
    fit->add_option("inputs", fit_inputs, "spectrum CSV files")->required()->expected(-1);
    fit->add_option("--fix-r", fix_r, "pin the retroaction parameter R to a value");
    fit->add_option("-o,--out", fit_out, "output directory");

    auto* ana = app.add_subcommand("analyze", "summarize a results document");
    std::string results_path;
    std::string ana_out;
    ana->add_option("results", results_path, "results.json from the fit step")->required();
    ana->add_option("-o,--out", ana_out, "directory for report.txt and fig3.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, ladder, n_atoms_args, seed_arg, sim_out);
        if (fit->parsed()) return cmd_fit(config_path, fit_inputs, fix_r, fit_out);
        if (ana->parsed()) return cmd_analyze(config_path, results_path, ana_out);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
