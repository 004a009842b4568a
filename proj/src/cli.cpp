#include "wgmgyro/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wgmgyro/errors.hpp"
#include "wgmgyro/estimate.hpp"
#include "wgmgyro/io.hpp"
#include "wgmgyro/noise.hpp"
#include "wgmgyro/oracle.hpp"
#include "wgmgyro/params.hpp"
#include "wgmgyro/rng.hpp"
#include "wgmgyro/sagnac.hpp"
#include "wgmgyro/spectrum.hpp"
#include "wgmgyro/steady.hpp"

namespace wgmgyro::cli {

namespace {

constexpr const char* kDefaultEigenGrid = "-10:10:401";
constexpr const char* kDefaultSmaxGrid = "0:4:41";

ParamFile resolve_params(const RunConfig& cfg) {
    if (!cfg.figure.empty() && !cfg.params_path.empty())
        throw ValidationError("--figure and --params are mutually exclusive");
    ParamFile pf;
    if (!cfg.figure.empty()) {
        const FigureSetup fs = canonical_figure_params(figure_from_name(cfg.figure));
        pf.params = fs.params;
        pf.drive = fs.drive;
    } else if (!cfg.params_path.empty()) {
        pf = load_params(cfg.params_path);
    }
    for (const std::string& ov : cfg.overrides) apply_override(pf, ov);
    if (!std::isnan(cfg.delta)) pf.params.delta = cfg.delta;
    return pf;
}

OutputField resolve_field(const RunConfig& cfg) {
    if (cfg.resonator == "a") return OutputField::A;
    if (cfg.resonator == "b") return OutputField::B;
    throw ValidationError("--resonator must be a or b");
}

// Write through a temporary stream so a failed run never leaves a truncated
// output file behind.
void emit(const RunConfig& cfg, std::ostream& out,
          const std::function<void(std::ostream&)>& writer) {
    if (cfg.output_path.empty() || cfg.output_path == "-") {
        writer(out);
        return;
    }
    std::ostringstream buf;
    writer(buf);
    std::ofstream os(cfg.output_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + cfg.output_path + "' for writing");
    os << buf.str();
    os.flush();
    if (!os) throw std::runtime_error("write to '" + cfg.output_path + "' failed");
}

MetaList base_metadata(const RunConfig& cfg, const ParamFile& pf, const char* command) {
    MetaList meta = params_metadata(pf.params, pf.drive);
    meta.insert(meta.begin(), {"command", command});
    (void)cfg;
    return meta;
}

void run_eigen(const RunConfig& cfg, std::ostream& out) {
    const ParamFile pf = resolve_params(cfg);
    const std::string grid_spec = cfg.grid.empty() ? kDefaultEigenGrid : cfg.grid;
    const DampingConvention conv = convention_from_name(cfg.convention);
    const std::vector<SweepRow> rows = real_imag_sweep(pf.params, parse_grid(grid_spec), conv);
    MetaList meta = base_metadata(cfg, pf, "eigen");
    meta.push_back({"convention", convention_name(conv)});
    meta.push_back({"grid", grid_spec});
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::Csv) write_eigen_csv(os, rows, meta);
        else os << eigen_json(rows, meta);
    });
}

void run_steady(const RunConfig& cfg, std::ostream& out) {
    const ParamFile pf = resolve_params(cfg);
    if (cfg.grid.empty()) {
        const SteadyState s = steady_state(pf.params, pf.drive);
        const MetaList meta = base_metadata(cfg, pf, "steady");
        emit(cfg, out, [&](std::ostream& os) {
            if (cfg.format == OutputFormat::Csv) {
                os << std::setprecision(17);
                write_metadata(os, meta);
                os << "alpha_re,alpha_im,beta_re,beta_im,n_a,n_b\n"
                   << s.alpha.real() << ',' << s.alpha.imag() << ',' << s.beta.real() << ','
                   << s.beta.imag() << ',' << s.n_a() << ',' << s.n_b() << '\n';
            } else {
                nlohmann::json doc;
                doc["schema"] = 1;
                doc["kind"] = "steady_state";
                for (const auto& [k, v] : meta) doc["meta"][k] = v;
                doc["alpha_re"] = s.alpha.real();
                doc["alpha_im"] = s.alpha.imag();
                doc["beta_re"] = s.beta.real();
                doc["beta_im"] = s.beta.imag();
                doc["n_a"] = s.n_a();
                doc["n_b"] = s.n_b();
                os << doc.dump(2) << '\n';
            }
        });
        return;
    }
    const std::vector<PhotonRow> rows = photon_number_sweep(
        pf.params, pf.drive, parse_grid(cfg.grid), {pf.params.delta});
    MetaList meta = base_metadata(cfg, pf, "steady");
    meta.push_back({"grid", cfg.grid});
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::Csv) write_photon_csv(os, rows, meta);
        else os << photon_json(rows, meta);
    });
}

void run_noise(const RunConfig& cfg, std::ostream& out) {
    const ParamFile pf = resolve_params(cfg);
    const OutputField field = resolve_field(cfg);
    const std::vector<double> grid =
        cfg.grid.empty() ? default_omega_grid(pf.params) : parse_grid(cfg.grid);
    const SpectrumSeries s =
        field == OutputField::A ? spectrum_a(pf.params, grid) : spectrum_b(pf.params, grid);
    MetaList meta = base_metadata(cfg, pf, "noise");
    if (!cfg.grid.empty()) meta.push_back({"grid", cfg.grid});
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::Csv) write_spectrum_csv(os, s, meta);
        else os << spectrum_json(s, meta);
    });
}

void run_smax(const RunConfig& cfg, std::ostream& out) {
    const ParamFile pf = resolve_params(cfg);
    const std::string grid_spec = cfg.grid.empty() ? kDefaultSmaxGrid : cfg.grid;
    const std::vector<SmaxRow> rows = smax_sweep(pf.params, parse_grid(grid_spec));
    MetaList meta = base_metadata(cfg, pf, "smax");
    meta.push_back({"grid", grid_spec});
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::Csv) write_smax_csv(os, rows, meta);
        else os << smax_json(rows, meta);
    });
}

void run_oracle(const RunConfig& cfg, std::ostream& out) {
    const ParamFile pf = resolve_params(cfg);
    SimOptions opt;
    opt.dt = cfg.dt;
    opt.n_steps = cfg.n_steps;
    opt.n_traj = cfg.n_traj;
    opt.seed = cfg.seed;
    opt.backend = backend_from_name(cfg.backend);
    opt.threads = cfg.threads;
    const OracleSpectra sp = oracle_spectra(pf.params, opt);
    const OutputField field = resolve_field(cfg);
    const SpectrumEstimate& est = field == OutputField::A ? sp.a : sp.b;
    MetaList meta = base_metadata(cfg, pf, "oracle");
    meta.push_back({"backend", backend_name(opt.backend)});
    meta.push_back({"seed", std::to_string(opt.seed)});
    meta.push_back({"n_traj", std::to_string(opt.n_traj)});
    meta.push_back({"n_steps", std::to_string(opt.n_steps)});
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::Csv) write_estimate_csv(os, est, meta);
        else os << estimate_series_json(est, meta);
    });
}

void run_estimate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.input_path.empty()) throw ValidationError("estimate needs --input <spectrum.csv>");
    const ParamFile pf = resolve_params(cfg);
    const SpectrumData data = load_spectrum_csv(cfg.input_path);
    EstimateOptions opt;
    opt.channel = channel_from_name(cfg.channel);
    if (!cfg.sagnac_path.empty()) opt.sagnac = load_sagnac_config(cfg.sagnac_path);
    const EstimationResult r = estimate_from_spectrum(data, pf.params, opt);
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::Csv) {
            os << std::setprecision(17);
            os << "delta_hat,omega_hat_rad_s,residual,responsivity,sigma_delta,channel\n"
               << r.delta_hat << ',' << r.omega_hat_rad_s << ',' << r.residual << ','
               << r.responsivity << ',' << r.sigma_delta << ',' << channel_name(r.channel)
               << '\n';
        } else {
            os << estimation_to_json(r);
        }
    });
}

void write_figure_file(const std::filesystem::path& dir, const char* name,
                       const std::function<void(std::ostream&)>& writer) {
    const std::filesystem::path path = dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    writer(os);
    os.flush();
    if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void run_figures(const RunConfig& cfg, std::ostream& out) {
    const std::filesystem::path dir = cfg.output_path.empty() ? "out" : cfg.output_path;
    std::filesystem::create_directories(dir);
    std::string which = cfg.figure;
    if (which == "fig5_gain" || which == "fig5_nogain") which = "fig5";
    const bool all = cfg.all_figures || which.empty();
    const auto wants = [&](const char* name) { return all || which == name; };
    bool any = false;

    if (wants("fig2")) {
        any = true;
        const FigureSetup fs = canonical_figure_params(FigureId::Fig2);
        const std::vector<SweepRow> rows =
            real_imag_sweep(fs.params, parse_grid(kDefaultEigenGrid), DampingConvention::PaperH);
        MetaList meta = params_metadata(fs.params, fs.drive);
        meta.insert(meta.begin(), {"figure", "fig2"});
        meta.push_back({"convention", convention_name(DampingConvention::PaperH)});
        meta.push_back({"grid", kDefaultEigenGrid});
        write_figure_file(dir, "fig2.csv",
                          [&](std::ostream& os) { write_eigen_csv(os, rows, meta); });
        out << (dir / "fig2.csv").string() << '\n';
    }

    const std::vector<double> shifts = {0.0, 1.0, 2.0, 3.0};
    for (const auto& [fig_name, id] :
         {std::pair<const char*, FigureId>{"fig3a", FigureId::Fig3a},
          std::pair<const char*, FigureId>{"fig3b", FigureId::Fig3b}}) {
        if (!wants(fig_name)) continue;
        any = true;
        const FigureSetup fs = canonical_figure_params(id);
        const std::vector<PhotonRow> rows =
            photon_number_sweep(fs.params, fs.drive, parse_grid("-10:10:801"), shifts);
        MetaList meta = params_metadata(fs.params, fs.drive);
        meta.insert(meta.begin(), {"figure", fig_name});
        meta.push_back({"grid", "-10:10:801"});
        const std::string fname = std::string(fig_name) + ".csv";
        write_figure_file(dir, fname.c_str(),
                          [&](std::ostream& os) { write_photon_csv(os, rows, meta); });
        out << (dir / fname).string() << '\n';
    }

    if (wants("fig4")) {
        any = true;
        const FigureSetup fs = canonical_figure_params(FigureId::Fig4);
        const std::vector<double> grid = parse_grid("-16:16:1601");

        std::vector<std::pair<double, SpectrumSeries>> blocks;
        for (double d : shifts) {
            SystemParams q = fs.params;
            q.delta = d;
            blocks.emplace_back(d, spectrum_a(q, grid));
        }
        MetaList meta_a = params_metadata(fs.params, fs.drive);
        meta_a.insert(meta_a.begin(), {"figure", "fig4a"});
        meta_a.push_back({"grid", "-16:16:1601"});
        meta_a.push_back({"shift_values", "0,1,2,3"});
        write_figure_file(dir, "fig4a.csv", [&](std::ostream& os) {
            write_spectrum_stack_csv(os, blocks, meta_a);
        });
        out << (dir / "fig4a.csv").string() << '\n';

        const SpectrumSeries sa = spectrum_a(fs.params, grid);
        const SpectrumSeries sb = spectrum_b(fs.params, grid);
        MetaList meta_b = params_metadata(fs.params, fs.drive);
        meta_b.insert(meta_b.begin(), {"figure", "fig4b"});
        meta_b.push_back({"grid", "-16:16:1601"});
        write_figure_file(dir, "fig4b.csv", [&](std::ostream& os) {
            write_spectrum_pair_csv(os, sa, sb, meta_b);
        });
        out << (dir / "fig4b.csv").string() << '\n';

        const std::vector<SmaxRow> rows = smax_sweep(fs.params, parse_grid(kDefaultSmaxGrid));
        MetaList meta_c = params_metadata(fs.params, fs.drive);
        meta_c.insert(meta_c.begin(), {"figure", "fig4c"});
        meta_c.push_back({"grid", kDefaultSmaxGrid});
        write_figure_file(dir, "fig4c.csv",
                          [&](std::ostream& os) { write_smax_csv(os, rows, meta_c); });
        out << (dir / "fig4c.csv").string() << '\n';
    }

    if (wants("fig5")) {
        any = true;
        const FigureSetup on = canonical_figure_params(FigureId::Fig5Gain);
        const FigureSetup off = canonical_figure_params(FigureId::Fig5NoGain);
        const GainComparison g =
            gain_comparison(on.params, off.params, parse_grid("-16:16:1601"));
        for (const auto& [fname, field] :
             {std::pair<const char*, OutputField>{"fig5a.csv", OutputField::A},
              std::pair<const char*, OutputField>{"fig5b.csv", OutputField::B}}) {
            MetaList meta = params_metadata(on.params, on.drive);
            meta.insert(meta.begin(), {"figure", fname});
            meta.push_back({"gain_off_value", format_full(off.params.res_a.gain)});
            meta.push_back({"grid", "-16:16:1601"});
            write_figure_file(dir, fname, [&](std::ostream& os) {
                write_gain_comparison_csv(os, g, field, meta);
            });
            out << (dir / fname).string() << '\n';
        }
    }

    if (!any)
        throw ValidationError("unknown figure '" + cfg.figure +
                              "' (expected fig2, fig3a, fig3b, fig4, or fig5)");
}

} // namespace

std::vector<double> parse_grid(const std::string& spec) {
    double start = 0.0, stop = 0.0;
    long count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(spec);
    if (!(is >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' ||
        (is >> std::ws, !is.eof()))
        throw ValidationError("grid must look like start:stop:count, got '" + spec + "'");
    if (count < 1) throw ValidationError("grid count must be at least 1");
    if (count == 1) {
        if (start != stop) throw ValidationError("grid with one point needs start == stop");
        return {start};
    }
    std::vector<double> g(static_cast<std::size_t>(count));
    const double step = (stop - start) / double(count - 1);
    for (long i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = start + step * double(i);
    g.back() = stop; // exact endpoint regardless of rounding
    return g;
}

int self_test(bool inject_fault, std::ostream& out) {
    int failures = 0;
    const auto report = [&](const char* name, bool ok, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) out << " (" << detail << ")";
        out << '\n';
        if (!ok) ++failures;
    };

    {
        // closed form vs the generic eigensolver over random parameter draws;
        // the injected fault flips the gain sign inside the square root, a
        // subtly wrong convention the cross-check has to catch
        const NoiseStream rng(0x5e1f7e57u, 0);
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 200; ++i) {
            const auto [u0, u1] = rng.uniform_pair(i, 0);
            const auto [u2, u3] = rng.uniform_pair(i, 1);
            SystemParams p;
            p.res_a.omega = 100.0 * u0;
            p.res_b.omega = p.res_a.omega;
            p.res_a.gain = 2.0 * u1;
            p.J = 0.5 + 9.5 * u2;
            p.delta = -10.0 + 20.0 * u3;
            const ModeSpectrum generic = eigenvalues(p, DampingConvention::PaperH);
            const double ga = p.res_a.net_gain();
            const cplx ig(0.0, inject_fault ? -ga : ga);
            const cplx root = std::sqrt((cplx(p.delta) - ig) * (cplx(p.delta) - ig) +
                                        cplx(4.0 * p.J * p.J));
            const cplx mid = cplx(2.0 * p.res_a.omega - p.delta, ga);
            const cplx ep = 0.5 * (mid + root), em = 0.5 * (mid - root);
            const double scale = std::abs(ep) + std::abs(em) + 1.0;
            const double direct =
                std::max(std::abs(ep - generic.e_plus), std::abs(em - generic.e_minus));
            const double swapped =
                std::max(std::abs(ep - generic.e_minus), std::abs(em - generic.e_plus));
            worst = std::max(worst, std::min(direct, swapped) / scale);
        }
        std::ostringstream d;
        d << "max relative error " << worst;
        report("eigenvalue closed form vs generic solver", worst < 1e-10, d.str());
    }

    {
        const FigureSetup fs = canonical_figure_params(FigureId::Fig3a);
        SystemParams p = fs.params;
        p.delta = 2.0;
        const SteadyState s = steady_state(p, fs.drive);
        const MeanFieldResult m = integrate_mean_field(p, fs.drive);
        const double err = std::abs(s.alpha - m.alpha) + std::abs(s.beta - m.beta);
        std::ostringstream d;
        d << "endpoint gap " << err;
        report("steady state vs time integration", err < 1e-8, d.str());
    }

    {
        const FigureSetup fs = canonical_figure_params(FigureId::Fig4);
        double min_margin = 1e300;
        for (int i = 0; i <= 2000; ++i) {
            const double w = -50.0 + 0.05 * double(i);
            min_margin = std::min(min_margin, spectrum_a_at(fs.params, w) - 0.5);
            min_margin = std::min(min_margin, spectrum_b_at(fs.params, w) - 0.5);
        }
        std::ostringstream d;
        d << "lowest margin above 1/2 is " << min_margin;
        report("output spectra stay above the vacuum floor", min_margin >= -1e-9, d.str());
    }

    {
        const NoiseStream rng(0x0f1ce, 1);
        SystemParams p;
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 100; ++i) {
            const auto [u0, u1] = rng.uniform_pair(i, 0);
            (void)u1;
            p.delta = 4.0 * u0;
            const double wl = left_peak_closed_form(p);
            worst = std::max(worst, std::abs(delta_from_left_peak(wl, p.J) - p.delta));
        }
        std::ostringstream d;
        d << "max round-trip error " << worst;
        report("left-peak inversion round trip", worst < 1e-10, d.str());
    }

    out << (failures == 0 ? "self test passed" : "self test FAILED") << '\n';
    return failures;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.command) {
            case Command::Eigen: run_eigen(cfg, out); return 0;
            case Command::Steady: run_steady(cfg, out); return 0;
            case Command::Noise: run_noise(cfg, out); return 0;
            case Command::Smax: run_smax(cfg, out); return 0;
            case Command::Oracle: run_oracle(cfg, out); return 0;
            case Command::Estimate: run_estimate(cfg, out); return 0;
            case Command::Figures: run_figures(cfg, out); return 0;
            case Command::SelfTest: return self_test(cfg.inject_fault, out) == 0 ? 0 : 2;
        }
        err << "error: unknown command\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnstableSystemError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const SingularDenominatorError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const EstimationError& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string format_str;
    bool format_seen = false;

    CLI::App app{"two-resonator rotation sensor: simulation, spectra, and readout"};
    app.require_subcommand(1);

    const auto add_common = [&](CLI::App* sc, bool with_format = true) {
        sc->add_option("--params", cfg.params_path, "JSON parameter file");
        sc->add_option("--set", cfg.overrides, "key=value parameter override (repeatable)");
        sc->add_option("-o,--output", cfg.output_path, "output path (default: stdout)");
        if (with_format)
            sc->add_option("--format", format_str, "csv or json")
                ->check(CLI::IsMember({"csv", "json"}))
                ->each([&](const std::string&) { format_seen = true; });
        sc->add_option("--figure", cfg.figure, "start from a canonical figure parameter set");
        sc->add_option("--delta", cfg.delta, "rotation-induced frequency shift");
    };

    CLI::App* eigen = app.add_subcommand("eigen", "supermode frequency sweep");
    add_common(eigen);
    eigen->add_option("--grid", cfg.grid, "shift grid start:stop:count");
    eigen->add_option("--convention", cfg.convention, "paperH, fullH, or drift")
        ->check(CLI::IsMember({"paperH", "fullH", "drift"}));
    eigen->callback([&] { cfg.command = Command::Eigen; });

    CLI::App* steady = app.add_subcommand("steady", "driven mean-field amplitudes");
    add_common(steady);
    steady->add_option("--grid", cfg.grid, "drive-offset grid start:stop:count for a sweep");
    steady->callback([&] { cfg.command = Command::Steady; });

    CLI::App* noise = app.add_subcommand("noise", "analytic output noise spectrum");
    add_common(noise);
    noise->add_option("--grid", cfg.grid, "frequency grid start:stop:count");
    noise->add_option("--resonator", cfg.resonator, "output field: a or b")
        ->check(CLI::IsMember({"a", "b"}));
    noise->callback([&] { cfg.command = Command::Noise; });

    CLI::App* smax = app.add_subcommand("smax", "left-peak height vs shift");
    add_common(smax);
    smax->add_option("--grid", cfg.grid, "shift grid start:stop:count");
    smax->callback([&] { cfg.command = Command::Smax; });

    CLI::App* oracle = app.add_subcommand("oracle", "Monte-Carlo spectrum estimate");
    add_common(oracle);
    oracle->add_option("--seed", cfg.seed, "RNG seed");
    oracle->add_option("--traj", cfg.n_traj, "number of trajectories");
    oracle->add_option("--steps", cfg.n_steps, "recorded steps per trajectory");
    oracle->add_option("--dt", cfg.dt, "integrator step");
    oracle->add_option("--backend", cfg.backend, "euler or exact_ou")
        ->check(CLI::IsMember({"euler", "exact_ou"}));
    oracle->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    oracle->add_option("--resonator", cfg.resonator, "output field: a or b")
        ->check(CLI::IsMember({"a", "b"}));
    oracle->callback([&] { cfg.command = Command::Oracle; });

    CLI::App* estimate = app.add_subcommand("estimate", "invert a spectrum to a shift");
    add_common(estimate);
    estimate->add_option("--input", cfg.input_path, "spectrum CSV to invert")->required();
    estimate
        ->add_option("--J", [&cfg](const CLI::results_t& vals) {
            cfg.overrides.push_back("J=" + vals.at(0));
            return true;
        }, "calibrated coupling rate (shorthand for --set J=...)")
        ->type_name("FLOAT");
    estimate->add_option("--channel", cfg.channel, "peak_frequency or smax")
        ->check(CLI::IsMember({"peak_frequency", "smax"}));
    estimate->add_option("--sagnac", cfg.sagnac_path,
                         "rotation-platform JSON config; adds omega_hat_rad_s");
    estimate->callback([&] { cfg.command = Command::Estimate; });

    CLI::App* figures = app.add_subcommand("figures", "write the canonical datasets");
    figures->add_option("-o,--output", cfg.output_path, "output directory (default: out)");
    figures->add_option("--figure", cfg.figure, "one of fig2, fig3a, fig3b, fig4, fig5");
    figures->add_flag("--all", cfg.all_figures, "write every dataset");
    figures->callback([&] { cfg.command = Command::Figures; });

    CLI::App* selftest = app.add_subcommand("selftest", "fast invariant suite");
    selftest->add_flag("--inject-fault", cfg.inject_fault,
                       "negative control: break one route on purpose");
    selftest->callback([&] { cfg.command = Command::SelfTest; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        (void)e;
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    if (format_seen) cfg.format = format_str == "json" ? OutputFormat::Json : OutputFormat::Csv;
    else cfg.format = cfg.command == Command::Estimate ? OutputFormat::Json : OutputFormat::Csv;
    return run(cfg, out, err);
}

} // namespace wgmgyro::cli
