#include "fres/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include "fres/reconstruct.hpp"
#include "fres/streamio.hpp"

namespace fres::experiment {

using nlohmann::json;
using streamio::Table;

void ExperimentSpec::validate() const {
    static const std::vector<std::string> kinds = {"unfiltered-g2", "filtered-scan",
                                                   "mollow-windows", "cross-windows",
                                                   "reconstruct", "spectrum"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw ConfigError("ExperimentSpec: unknown kind '" + kind + "'");
    if (schema != 1) throw ConfigError("ExperimentSpec: unsupported schema version");
    if (trajectories < 1) throw ConfigError("ExperimentSpec: trajectories must be >= 1");
    if (tau_max <= 0.0 || bin_width <= 0.0)
        throw ConfigError("ExperimentSpec: analysis grid must be positive");
    if (curve_points < 2) throw ConfigError("ExperimentSpec: curve_points must be >= 2");
    run.cascade.validate();
}

json to_json(const ExperimentSpec& spec) {
    json j;
    j["schema"] = spec.schema;
    j["kind"] = spec.kind;
    j["name"] = spec.name;
    j["run"] = streamio::run_config_json(spec.run);
    j["trajectories"] = spec.trajectories;
    j["analysis"] = {{"tau_max", spec.tau_max},
                     {"bin_width", spec.bin_width},
                     {"curve_points", spec.curve_points}};
    j["gamma_grid"] = spec.gamma_grid;
    j["omega_grid"] = spec.omega_grid;
    j["reconstruct"] = {{"max_n", spec.reconstruct_max_n},
                        {"unfiltered", spec.reconstruct_unfiltered}};
    j["note"] = spec.note;
    return j;
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.schema = j.at("schema").get<int>();
    spec.kind = j.at("kind").get<std::string>();
    spec.name = j.at("name").get<std::string>();
    spec.run = streamio::run_config_from_json(j.at("run"));
    spec.trajectories = j.value("trajectories", 1);
    if (j.contains("analysis")) {
        spec.tau_max = j["analysis"].value("tau_max", spec.tau_max);
        spec.bin_width = j["analysis"].value("bin_width", spec.bin_width);
        spec.curve_points = j["analysis"].value("curve_points", spec.curve_points);
    }
    spec.gamma_grid = j.value("gamma_grid", std::vector<double>{});
    spec.omega_grid = j.value("omega_grid", std::vector<double>{});
    if (j.contains("reconstruct")) {
        spec.reconstruct_max_n = j["reconstruct"].value("max_n", -1);
        spec.reconstruct_unfiltered = j["reconstruct"].value("unfiltered", false);
    }
    spec.note = j.value("note", "");
    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open experiment file: " + file.string());
    json j;
    in >> j;
    return spec_from_json(j);
}

void save_spec(const std::filesystem::path& file, const ExperimentSpec& spec) {
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot open for writing: " + file.string());
    out << to_json(spec).dump(2) << "\n";
}

mastereq::CorrelationCurve theory_autocorrelation(const models::CascadeConfig& cascade,
                                                  int detector_index, double tau_max,
                                                  int points) {
    if (cascade.detectors.empty()) {
        // unfiltered: the emitter's own intensity correlation
        const auto l = models::build_source_liouvillian(cascade.source);
        const auto rho = mastereq::steady_state(l);
        return mastereq::g2_regression(l, hilbert::annihilation_tls(), rho, tau_max, points);
    }
    const auto cfg = mastereq::with_converged_truncation(cascade);
    const auto l = models::build_cascaded_liouvillian(cfg);
    const auto rho = mastereq::steady_state(l);
    return mastereq::g2_regression(l, models::embedded_xi(cfg, detector_index), rho, tau_max,
                                   points);
}

mastereq::CorrelationCurve theory_crosscorrelation(const models::CascadeConfig& cascade,
                                                   double tau_max, int points) {
    if (cascade.detectors.size() != 2)
        throw ConfigError("theory_crosscorrelation: needs a two-detector cascade");
    const auto cfg = mastereq::with_converged_truncation(cascade);
    const auto l = models::build_cascaded_liouvillian(cfg);
    const auto rho = mastereq::steady_state(l);
    return mastereq::cross_g2_regression(l, models::embedded_xi(cfg, 0),
                                         models::embedded_xi(cfg, 1), rho, tau_max, points);
}

namespace {

/// Interpolate a uniform-grid curve at tau (clamped to the grid ends).
double curve_at(const mastereq::CorrelationCurve& c, double tau) {
    if (c.tau.size() < 2) throw NumericsError("curve_at: degenerate curve");
    const double t0 = c.tau.front();
    const double dt = c.tau[1] - c.tau[0];
    double x = (tau - t0) / dt;
    x = std::clamp(x, 0.0, static_cast<double>(c.tau.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(x), c.tau.size() - 2);
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * c.g2[i] + f * c.g2[i + 1];
}

std::filesystem::path ensure_dir(const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    return outdir;
}

int detector_channel_index(const mcjump::ClickStream& s, int detector) {
    const std::string want = s.channel_labels.size() > 4 // two-detector channel set
                                 ? "detector" + std::to_string(detector + 1)
                                 : "detector";
    for (std::size_t k = 0; k < s.channel_labels.size(); ++k)
        if (s.channel_labels[k] == want) return static_cast<int>(k);
    return -1;
}

} // namespace

FileList cmd_theory(const ExperimentSpec& spec, const std::filesystem::path& outdir) {
    spec.validate();
    ensure_dir(outdir);
    FileList files;
    const auto& cascade = spec.run.cascade;

    if (spec.kind == "unfiltered-g2") {
        const double pump = cascade.source.pump();
        const auto curve = theory_autocorrelation(
            models::CascadeConfig{cascade.source, {}, 0, 0, 0.5, 0.5}, 0, spec.tau_max,
            spec.curve_points);
        Table t;
        t.columns = {"tau", "g2", "g2_closed_form"};
        for (std::size_t k = 0; k < curve.tau.size(); ++k) {
            const double closed = cascade.source.incoherent()
                                      ? mastereq::closed_form_g2_incoherent(
                                            curve.tau[k], cascade.source.gamma, pump)
                                      : curve.g2[k];
            t.rows.push_back({curve.tau[k], curve.g2[k], closed});
        }
        const auto path = outdir / (spec.name + "_g2_theory.csv");
        streamio::write_table(path, t);
        files.push_back(path);
        return files;
    }

    if (spec.kind == "cross-windows") {
        const auto cross = theory_crosscorrelation(cascade, spec.tau_max, spec.curve_points);
        const auto auto1 = theory_autocorrelation(cascade, 0, spec.tau_max, spec.curve_points);
        const auto auto2 = theory_autocorrelation(cascade, 1, spec.tau_max, spec.curve_points);
        Table t;
        t.columns = {"tau", "g2_cross"};
        for (std::size_t k = 0; k < cross.tau.size(); ++k)
            t.rows.push_back({cross.tau[k], cross.g2[k]});
        const auto path = outdir / (spec.name + "_g2cross_theory.csv");
        streamio::write_table(path, t);
        files.push_back(path);

        Table ta;
        ta.columns = {"tau", "g2_window1", "g2_window2"};
        for (std::size_t k = 0; k < auto1.tau.size(); ++k)
            ta.rows.push_back({auto1.tau[k], auto1.g2[k], auto2.g2[k]});
        const auto patha = outdir / (spec.name + "_g2auto_theory.csv");
        streamio::write_table(patha, ta);
        files.push_back(patha);
        return files;
    }

    // filtered-scan / mollow-windows: curves per filter width or per window
    if (!spec.gamma_grid.empty()) {
        Table t;
        t.columns = {"Gamma", "tau", "g2"};
        for (double G : spec.gamma_grid) {
            auto cfg = cascade;
            if (cfg.detectors.empty()) throw ConfigError("cmd_theory: scan needs a detector");
            cfg.detectors[0].linewidth = G;
            const auto curve = theory_autocorrelation(cfg, 0, spec.tau_max, spec.curve_points);
            for (std::size_t k = 0; k < curve.tau.size(); ++k)
                t.rows.push_back({G, curve.tau[k], curve.g2[k]});
        }
        const auto path = outdir / (spec.name + "_g2_gamma_scan.csv");
        streamio::write_table(path, t);
        files.push_back(path);
    }
    if (!spec.omega_grid.empty() && !cascade.detectors.empty()) {
        // g2(0) landscape across window frequencies, via the sensor
        Table t;
        t.columns = {"omega", "g2_0"};
        for (double w : spec.omega_grid) {
            models::SensorConfig sen;
            sen.omega = w;
            sen.linewidth = cascade.detectors[0].linewidth;
            sen.epsilon = std::min(1e-3, sen.linewidth / 100.0);
            t.rows.push_back({w, mastereq::sensor_correlator(cascade.source, sen, 2)});
        }
        const auto path = outdir / (spec.name + "_g2zero_omega_scan.csv");
        streamio::write_table(path, t);
        files.push_back(path);

        // the lineshape seen through the same window
        Table ts;
        ts.columns = {"omega", "population"};
        const auto pops = mastereq::spectrum_scan(cascade.source,
                                                  cascade.detectors[0].linewidth,
                                                  spec.omega_grid);
        for (std::size_t k = 0; k < spec.omega_grid.size(); ++k)
            ts.rows.push_back({spec.omega_grid[k], pops[k]});
        const auto spath = outdir / (spec.name + "_spectrum.csv");
        streamio::write_table(spath, ts);
        files.push_back(spath);
    }
    if (!spec.omega_grid.empty() && !spec.gamma_grid.empty()) {
        // full (omega, Gamma) landscape of zero-delay correlations
        Table t;
        t.columns = {"omega", "Gamma", "g2_0"};
        for (double w : spec.omega_grid) {
            for (double G : spec.gamma_grid) {
                models::SensorConfig sen;
                sen.omega = w;
                sen.linewidth = G;
                sen.epsilon = std::min(1e-3, G / 100.0);
                t.rows.push_back({w, G, mastereq::sensor_correlator(cascade.source, sen, 2)});
            }
        }
        const auto path = outdir / (spec.name + "_g2zero_landscape.csv");
        streamio::write_table(path, t);
        files.push_back(path);
    }
    if (!cascade.detectors.empty()) {
        const auto curve = theory_autocorrelation(cascade, 0, spec.tau_max, spec.curve_points);
        Table t;
        t.columns = {"tau", "g2"};
        for (std::size_t k = 0; k < curve.tau.size(); ++k)
            t.rows.push_back({curve.tau[k], curve.g2[k]});
        const auto path = outdir / (spec.name + "_g2_theory.csv");
        streamio::write_table(path, t);
        files.push_back(path);
    }
    return files;
}

FileList cmd_simulate(const ExperimentSpec& spec, const std::filesystem::path& outdir) {
    spec.validate();
    ensure_dir(outdir);
    FileList files;
    const auto result = mcjump::run_ensemble(spec.run, spec.trajectories);
    for (const auto& stream : result.streams) {
        const std::string suffix =
            spec.trajectories > 1 ? "_t" + std::to_string(stream.trajectory) : "";
        const auto path = outdir / (spec.name + suffix + "_stream.csv");
        streamio::write_clickstream(path, stream);
        files.push_back(path);
        if (spec.run.cascade.detectors.size() == 2) {
            for (int d = 0; d < 2; ++d) {
                const int ch = detector_channel_index(stream, d);
                if (ch < 0) continue;
                const auto split = clickstats::filter_channel(stream, ch);
                const auto spath = outdir / (spec.name + suffix + "_stream_detector" +
                                             std::to_string(d + 1) + ".csv");
                streamio::write_clickstream(spath, split);
                files.push_back(spath);
            }
        }
    }
    return files;
}

namespace {

/// The estimator battery on one group of streams sharing a window.
experiment::FileList analyze_group(const std::vector<mcjump::ClickStream>& streams,
                                   const ExperimentSpec& spec, const std::string& base,
                                   const std::optional<mastereq::CorrelationCurve>& overlay,
                                   const std::filesystem::path& outdir) {
    experiment::FileList files;

    const auto hist = clickstats::g2_histogram(streams, spec.tau_max, spec.bin_width);
    Table t;
    t.columns = {"tau_center", "g2", "stderr", "count"};
    if (overlay) t.columns.push_back("theory");
    for (std::size_t k = 0; k < hist.tau_center.size(); ++k) {
        std::vector<double> row = {hist.tau_center[k], hist.g2[k], hist.stderr_[k],
                                   static_cast<double>(hist.counts[k])};
        if (overlay) row.push_back(curve_at(*overlay, std::abs(hist.tau_center[k])));
        t.rows.push_back(std::move(row));
    }
    const auto g2path = outdir / (base + "_g2.csv");
    streamio::write_table(g2path, t);
    files.push_back(g2path);

    const auto wt = clickstats::waiting_time(streams, spec.tau_max, spec.bin_width);
    Table tw;
    tw.columns = {"tau_center", "density", "stderr"};
    for (std::size_t k = 0; k < wt.tau_center.size(); ++k)
        tw.rows.push_back({wt.tau_center[k], wt.density[k], wt.stderr_[k]});
    const auto wtpath = outdir / (base + "_waiting.csv");
    streamio::write_table(wtpath, tw);
    files.push_back(wtpath);

    // counting statistics over ten-bin windows
    const double window = 10.0 * spec.bin_width;
    bool long_enough = true;
    for (const auto& s : streams) long_enough = long_enough && s.duration >= 10.0 * window;
    if (long_enough) {
        const auto counts = clickstats::window_counts(streams, window);
        Table tc;
        tc.columns = {"m", "q", "stderr"};
        for (std::size_t m = 0; m < counts.q.size(); ++m)
            tc.rows.push_back({static_cast<double>(m), counts.q[m], counts.stderr_[m]});
        const auto cpath = outdir / (base + "_counting.csv");
        streamio::write_table(cpath, tc);
        files.push_back(cpath);
    }

    Table tb;
    tb.columns = {"tau_c", "fraction"};
    for (double tau_c : {spec.bin_width, 2.0 * spec.bin_width, 5.0 * spec.bin_width})
        tb.rows.push_back({tau_c, clickstats::closely_spaced_fraction(streams, tau_c)});
    const auto bpath = outdir / (base + "_bundle.csv");
    streamio::write_table(bpath, tb);
    files.push_back(bpath);

    return files;
}

} // namespace

FileList cmd_analyze(const std::vector<std::filesystem::path>& stream_files,
                     const ExperimentSpec& spec, const std::filesystem::path& outdir) {
    if (stream_files.empty()) throw ConfigError("cmd_analyze: no stream files given");
    ensure_dir(outdir);
    FileList files;

    std::vector<mcjump::ClickStream> streams;
    streams.reserve(stream_files.size());
    for (const auto& f : stream_files) streams.push_back(streamio::read_clickstream(f));
    for (const auto& s : streams)
        if (s.run_id != streams.front().run_id)
            throw StatisticsError("cmd_analyze: streams from different runs cannot be merged");

    const std::string base = spec.name;
    std::optional<mcjump::RunConfig> run;
    if (!streams.front().config_json.empty())
        run = streamio::run_config_from_json(json::parse(streams.front().config_json));

    // two single-channel groups from one run: per-window batteries plus the
    // cross-correlation of the paired streams
    std::vector<std::string> labels;
    for (const auto& s : streams) {
        if (s.recorded_channels.size() != 1) {
            labels.clear();
            break;
        }
        const auto ch = static_cast<std::size_t>(s.recorded_channels.front());
        const std::string label = ch < s.channel_labels.size() ? s.channel_labels[ch] : "?";
        if (std::find(labels.begin(), labels.end(), label) == labels.end())
            labels.push_back(label);
    }

    if (labels.size() == 2) {
        std::sort(labels.begin(), labels.end());
        std::vector<mcjump::ClickStream> a, b;
        for (const auto& s : streams) {
            const auto ch = static_cast<std::size_t>(s.recorded_channels.front());
            (s.channel_labels[ch] == labels[0] ? a : b).push_back(s);
        }
        auto by_traj = [](const mcjump::ClickStream& x, const mcjump::ClickStream& y) {
            return x.trajectory < y.trajectory;
        };
        std::sort(a.begin(), a.end(), by_traj);
        std::sort(b.begin(), b.end(), by_traj);
        if (a.size() != b.size())
            throw StatisticsError("cmd_analyze: the two window groups do not pair up");

        std::optional<mastereq::CorrelationCurve> cross_overlay;
        std::optional<mastereq::CorrelationCurve> auto1, auto2;
        if (run && run->cascade.detectors.size() == 2) {
            cross_overlay = theory_crosscorrelation(run->cascade, spec.tau_max,
                                                    std::max(spec.curve_points, 2));
            auto1 = theory_autocorrelation(run->cascade, 0, spec.tau_max,
                                           std::max(spec.curve_points, 2));
            auto2 = theory_autocorrelation(run->cascade, 1, spec.tau_max,
                                           std::max(spec.curve_points, 2));
        }

        const auto cross =
            clickstats::cross_g2_histogram(a, b, spec.tau_max, spec.bin_width);
        Table tx;
        tx.columns = {"tau_center", "g2", "stderr", "count"};
        if (cross_overlay) tx.columns.push_back("theory");
        for (std::size_t k = 0; k < cross.tau_center.size(); ++k) {
            std::vector<double> row = {cross.tau_center[k], cross.g2[k], cross.stderr_[k],
                                       static_cast<double>(cross.counts[k])};
            if (cross_overlay) row.push_back(curve_at(*cross_overlay, cross.tau_center[k]));
            tx.rows.push_back(std::move(row));
        }
        const auto xpath = outdir / (base + "_g2cross.csv");
        streamio::write_table(xpath, tx);
        files.push_back(xpath);

        const auto fa = analyze_group(a, spec, base + "_" + labels[0], auto1, outdir);
        const auto fb = analyze_group(b, spec, base + "_" + labels[1], auto2, outdir);
        files.insert(files.end(), fa.begin(), fa.end());
        files.insert(files.end(), fb.begin(), fb.end());
        return files;
    }

    std::optional<mastereq::CorrelationCurve> overlay;
    if (run && run->cascade.detectors.size() < 2)
        overlay =
            theory_autocorrelation(run->cascade, 0, spec.tau_max, std::max(spec.curve_points, 2));
    return analyze_group(streams, spec, base, overlay, outdir);
}

FileList cmd_reconstruct(const ExperimentSpec& spec, const std::filesystem::path& outdir) {
    spec.validate();
    ensure_dir(outdir);
    FileList files;
    const auto& cascade = spec.run.cascade;

    json diagnostics;
    auto emit = [&](const std::string& tag, const reconstruct::PhotonDistribution& dist) {
        const auto fit = reconstruct::fit_distribution(dist);
        Table t;
        t.columns = {"n", "p", "fit_class", "fit_param"};
        t.comments.push_back("fit_class: 0=vacuum 1=fock 2=geometric 3=cothermal 4=other");
        const double fit_param =
            fit.cls == reconstruct::FitClass::Cothermal ? fit.thermal_weight : fit.theta;
        for (int n = 0; n <= dist.max_n(); ++n)
            t.rows.push_back({static_cast<double>(n), dist.p[static_cast<std::size_t>(n)],
                              static_cast<double>(static_cast<int>(fit.cls)), fit_param});
        const auto path = outdir / (spec.name + "_pn_" + tag + ".csv");
        streamio::write_table(path, t);
        files.push_back(path);
        double margin = 0.0;
        const bool ng = reconstruct::nongaussian_check(dist, &margin);
        diagnostics[tag] = {{"fit_class", reconstruct::to_string(fit.cls)},
                            {"theta", fit.theta},
                            {"thermal_weight", fit.thermal_weight},
                            {"residual", fit.residual},
                            {"nongaussian", ng},
                            {"nongaussian_margin", margin},
                            {"clamped_mass", dist.clamped_mass}};
    };

    if (spec.reconstruct_unfiltered)
        emit("unfiltered", reconstruct::emitter_state(cascade.source));

    std::vector<double> widths = spec.gamma_grid;
    if (widths.empty() && !cascade.detectors.empty())
        widths.push_back(cascade.detectors[0].linewidth);
    for (double G : widths) {
        auto cfg = cascade;
        if (cfg.detectors.empty()) throw ConfigError("cmd_reconstruct: needs a detector");
        cfg.detectors[0].linewidth = G;
        cfg = mastereq::with_converged_truncation(cfg);
        const auto l = models::build_cascaded_liouvillian(cfg);
        const auto rho = mastereq::steady_state(l);
        const auto dist = reconstruct::effective_state(cfg, 0, rho, spec.reconstruct_max_n);
        emit("G" + streamio::format_g9(G), dist);
    }

    const auto dpath = outdir / (spec.name + "_reconstruct.json");
    std::ofstream out(dpath);
    out << diagnostics.dump(2) << "\n";
    files.push_back(dpath);
    return files;
}

FileList cmd_spectrum(const ExperimentSpec& spec, const std::filesystem::path& outdir) {
    spec.validate();
    ensure_dir(outdir);
    if (spec.omega_grid.empty()) throw ConfigError("cmd_spectrum: empty frequency grid");
    const double G = spec.run.cascade.detectors.empty()
                         ? 1.0
                         : spec.run.cascade.detectors[0].linewidth;
    const auto pops = mastereq::spectrum_scan(spec.run.cascade.source, G, spec.omega_grid);
    Table t;
    t.columns = {"omega", "population"};
    for (std::size_t k = 0; k < spec.omega_grid.size(); ++k)
        t.rows.push_back({spec.omega_grid[k], pops[k]});
    const auto path = outdir / (spec.name + "_spectrum.csv");
    streamio::write_table(path, t);
    return {path};
}

} // namespace fres::experiment
