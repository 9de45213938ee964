// fresim: frequency-resolved photon stream simulator and analysis toolkit.
//
// Subcommands: theory, simulate, analyze, reconstruct, spectrum, presets.
// Experiments come from named presets (--preset) or JSON files (--config);
// common flags override the loaded description. Thread count for ensemble
// runs is read from FRES_THREADS.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "fres/experiment.hpp"

namespace {

using fres::experiment::ExperimentSpec;

struct CommonOpts {
    std::string preset;
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t clicks = 0;
    bool clicks_set = false;
    double dt = 0.0;
    double bin = 0.0;
    double tau_max = 0.0;
    double duration = 0.0;
    bool duration_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--preset", opts.preset, "named experiment preset");
    cmd->add_option("--config", opts.config, "experiment description file (JSON)");
    cmd->add_option("--out", opts.out, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--clicks", opts.clicks, "target click count")->each([&](const std::string&) {
        opts.clicks_set = true;
    });
    cmd->add_option("--duration", opts.duration, "recording time (units 1/gamma)")
        ->each([&](const std::string&) { opts.duration_set = true; });
    cmd->add_option("--dt", opts.dt, "Monte Carlo timestep");
    cmd->add_option("--bin", opts.bin, "histogram bin width");
    cmd->add_option("--tau-max", opts.tau_max, "correlation window extent");
}

ExperimentSpec resolve_spec(const CommonOpts& opts) {
    if (opts.preset.empty() == opts.config.empty())
        throw fres::ConfigError("give exactly one of --preset or --config");
    ExperimentSpec spec = opts.preset.empty() ? fres::experiment::load_spec(opts.config)
                                              : fres::presets::get(opts.preset);
    if (opts.seed_set) spec.run.seed = opts.seed;
    if (opts.clicks_set) {
        spec.run.target_clicks = opts.clicks;
        spec.run.duration.reset();
    }
    if (opts.duration_set) {
        spec.run.duration = opts.duration;
        spec.run.target_clicks.reset();
    }
    if (opts.dt > 0.0) spec.run.dt = opts.dt;
    if (opts.bin > 0.0) spec.bin_width = opts.bin;
    if (opts.tau_max > 0.0) spec.tau_max = opts.tau_max;
    spec.validate();
    return spec;
}

void report(const fres::experiment::FileList& files) {
    for (const auto& f : files) std::cout << f.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-resolved photon stream simulator"};
    app.require_subcommand(1);

    CommonOpts theory_o, sim_o, ana_o, rec_o, spec_o;
    std::vector<std::string> stream_files;
    std::string dump_name;

    auto* theory = app.add_subcommand("theory", "exact correlation curves, scans and spectra");
    add_common(theory, theory_o);

    auto* simulate = app.add_subcommand("simulate", "generate click streams");
    add_common(simulate, sim_o);

    auto* analyze = app.add_subcommand("analyze", "histograms and counting statistics from streams");
    add_common(analyze, ana_o);
    analyze->add_option("streams", stream_files, "click stream CSV files")->required();

    auto* reconstruct = app.add_subcommand("reconstruct", "effective photon-number distributions");
    add_common(reconstruct, rec_o);

    auto* spectrum = app.add_subcommand("spectrum", "detector population versus frequency");
    add_common(spectrum, spec_o);

    auto* presets = app.add_subcommand("presets", "list presets or dump one as JSON");
    presets->add_option("--dump", dump_name, "write the named preset as JSON to stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (theory->parsed()) report(fres::experiment::cmd_theory(resolve_spec(theory_o), theory_o.out));
        if (simulate->parsed()) report(fres::experiment::cmd_simulate(resolve_spec(sim_o), sim_o.out));
        if (analyze->parsed()) {
            std::vector<std::filesystem::path> paths(stream_files.begin(), stream_files.end());
            report(fres::experiment::cmd_analyze(paths, resolve_spec(ana_o), ana_o.out));
        }
        if (reconstruct->parsed())
            report(fres::experiment::cmd_reconstruct(resolve_spec(rec_o), rec_o.out));
        if (spectrum->parsed()) report(fres::experiment::cmd_spectrum(resolve_spec(spec_o), spec_o.out));
        if (presets->parsed()) {
            if (dump_name.empty()) {
                for (const auto& n : fres::presets::names()) std::cout << n << "\n";
            } else {
                std::cout << fres::experiment::to_json(fres::presets::get(dump_name)).dump(2)
                          << "\n";
            }
        }
    } catch (const fres::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const fres::NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const fres::StatisticsError& e) {
        std::cerr << "insufficient statistics: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
