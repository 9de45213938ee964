#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fres/clickstats.hpp"
#include "fres/mastereq.hpp"
#include "fres/mcjump.hpp"

namespace fres::experiment {

/// Declarative experiment description: what to simulate, how to analyze it,
/// and which theory tables to emit. Serialized as versioned JSON.
struct ExperimentSpec {
    int schema = 1;
    std::string kind = "filtered-scan"; ///< unfiltered-g2 | filtered-scan | mollow-windows |
                                        ///< cross-windows | reconstruct | spectrum
    std::string name = "experiment";
    mcjump::RunConfig run;
    int trajectories = 1;

    double tau_max = 10.0;   ///< histogram / curve extent
    double bin_width = 0.02; ///< histogram bin
    int curve_points = 401;  ///< theory curve resolution

    std::vector<double> gamma_grid; ///< filter widths for scans and reconstruction sweeps
    std::vector<double> omega_grid; ///< frequency grid for spectra and scans

    int reconstruct_max_n = -1;
    bool reconstruct_unfiltered = false; ///< include the bare-emitter reference

    std::string note;

    void validate() const;
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);
ExperimentSpec load_spec(const std::filesystem::path& file);
void save_spec(const std::filesystem::path& file, const ExperimentSpec& spec);

/// Exact g2 curve of one detector window of the given cascade, sampled on
/// the analysis grid. The single oracle shared by theory tables and
/// histogram overlays.
mastereq::CorrelationCurve theory_autocorrelation(const models::CascadeConfig& cascade,
                                                  int detector_index, double tau_max,
                                                  int points);

mastereq::CorrelationCurve theory_crosscorrelation(const models::CascadeConfig& cascade,
                                                   double tau_max, int points);

/// Files produced by one command invocation.
using FileList = std::vector<std::filesystem::path>;

FileList cmd_theory(const ExperimentSpec& spec, const std::filesystem::path& outdir);
FileList cmd_simulate(const ExperimentSpec& spec, const std::filesystem::path& outdir);
FileList cmd_analyze(const std::vector<std::filesystem::path>& stream_files,
                     const ExperimentSpec& spec, const std::filesystem::path& outdir);
FileList cmd_reconstruct(const ExperimentSpec& spec, const std::filesystem::path& outdir);
FileList cmd_spectrum(const ExperimentSpec& spec, const std::filesystem::path& outdir);

} // namespace fres::experiment

namespace fres::presets {

std::vector<std::string> names();
bool exists(const std::string& name);
experiment::ExperimentSpec get(const std::string& name);

} // namespace fres::presets
