#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fres/models.hpp"
#include "fres/rng.hpp"

namespace fres::mcjump {

using hilbert::Matrix;
using hilbert::Vector;

struct RunConfig {
    models::CascadeConfig cascade;
    double dt = 0.01;
    std::optional<double> duration;              ///< recording time, units 1/gamma
    std::optional<std::uint64_t> target_clicks;  ///< alternative stop rule
    std::uint64_t seed = 1;
    /// Channel indices (into jump channel list) whose clicks are recorded.
    /// Empty selects every monitor channel, or the source channel when the
    /// cascade has no detectors.
    std::vector<int> recorded_channels;
    std::optional<double> transient; ///< default 20 / min(gamma, Gamma_k)
    /// When positive, sample <sigma^dag sigma> every `sample_interval` from
    /// t = 0 (transient skipped) for unraveling-consistency checks.
    double sample_interval = 0.0;
};

struct ClickRecord {
    double time;
    int channel;
};

struct ClickStream {
    std::vector<ClickRecord> records;
    double duration = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    std::string run_id;                      ///< shared by streams with a common clock
    double dt = 0.0;
    double transient = 0.0;
    std::vector<std::string> channel_labels; ///< one per jump channel
    std::vector<int> recorded_channels;
    std::string config_json;                 ///< cascade + run parameter snapshot
    std::vector<double> population_samples;  ///< emitter occupation, if sampled

    std::size_t clicks() const { return records.size(); }
};

/// Precomputed fixed-step propagator: U = exp(-i H_tot dt) with the full
/// non-Hermitian H_tot (cascade channels plus pump absorber), the per-channel
/// jump generators c_k and their rate operators c_k^dag c_k.
class JumpStepper {
public:
    JumpStepper(const models::CascadeConfig& cascade, double dt);

    /// One fixed step. Jump probabilities p_k = <c_k^dag c_k> dt; on a jump
    /// the channel index is returned and psi collapses to c_k psi renormalized,
    /// otherwise psi advances with U and is renormalized.
    std::optional<int> step(Vector& psi, Xoshiro256pp& rng) const;

    double dt() const { return dt_; }
    int dim() const { return static_cast<int>(u_.rows()); }
    int channels() const { return static_cast<int>(jump_ops_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<models::ChannelKind>& kinds() const { return kinds_; }
    /// Total jump probability per step for state psi.
    double total_jump_probability(const Vector& psi) const;

private:
    double dt_;
    Matrix u_;
    std::vector<Matrix> jump_ops_;
    std::vector<Matrix> rate_ops_; ///< c_k^dag c_k
    Matrix rate_total_;
    std::vector<std::string> labels_;
    std::vector<models::ChannelKind> kinds_;
};

/// Single trajectory from the ground state: transient discarded, clicks
/// recorded on the configured channels. Deterministic in (config, seed).
ClickStream run_trajectory(const RunConfig& cfg);

struct EnsembleResult {
    std::vector<ClickStream> streams;
    std::uint64_t total_clicks = 0;
    double total_duration = 0.0;
    std::vector<double> mean_population; ///< averaged samples when sampling is on
};

/// n_traj independent trajectories; trajectory i is seeded with seed ^ i and
/// they run concurrently (thread count from FRES_THREADS, default hardware).
EnsembleResult run_ensemble(const RunConfig& cfg, int n_traj);

/// Homogeneous Poisson click stream via exponential inter-arrival times.
ClickStream generate_poisson_stream(double rate, double duration, std::uint64_t seed);

/// Validated copy of cfg: truncation converged at the steady state and dt
/// halved until max_k p_k <= 0.1. Called by run_trajectory/run_ensemble.
RunConfig prepare_run(const RunConfig& cfg);

/// Stable id for streams sharing one generating run (clock compatibility).
std::string run_identifier(const RunConfig& cfg);

} // namespace fres::mcjump
