#include "fres/mcjump.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "fres/mastereq.hpp"
#include "fres/streamio.hpp"

namespace fres::mcjump {

using hilbert::Complex;

JumpStepper::JumpStepper(const models::CascadeConfig& cascade, double dt) : dt_(dt) {
    if (dt <= 0.0) throw ConfigError("JumpStepper: dt must be positive");

    Matrix h_tot = models::effective_hamiltonian(cascade).mat;
    std::vector<models::CollapseChannel> channels = models::collapse_operators(cascade);
    if (auto pump = models::pump_channel(cascade)) {
        // absorber part of the pump channel, not contained in the cascade H~
        h_tot += Complex(0, -0.5) * (pump->op.mat.adjoint() * pump->op.mat).eval();
        channels.push_back(std::move(*pump));
    }

    const int d = static_cast<int>(h_tot.rows());
    u_ = hilbert::matrix_exponential((Complex(0, -1) * dt * h_tot).eval());
    rate_total_ = Matrix::Zero(d, d);
    for (auto& ch : channels) {
        rate_ops_.push_back((ch.op.mat.adjoint() * ch.op.mat).eval());
        rate_total_ += rate_ops_.back();
        jump_ops_.push_back(ch.op.mat);
        labels_.push_back(ch.label);
        kinds_.push_back(ch.kind);
    }
}

double JumpStepper::total_jump_probability(const Vector& psi) const {
    return dt_ * hilbert::real_expectation(rate_total_, psi);
}

std::optional<int> JumpStepper::step(Vector& psi, Xoshiro256pp& rng) const {
    const double p_total = total_jump_probability(psi);
    if (p_total >= 1.0)
        throw NumericsError("step: total jump probability reached 1, timestep too large");

    if (rng.uniform() < p_total) {
        // channel k with probability p_k / p_total
        const int n = channels();
        const double target = rng.uniform() * p_total;
        int chosen = -1, last_active = -1;
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const double p_k = dt_ * hilbert::real_expectation(rate_ops_[k], psi);
            if (p_k > 0.0) last_active = k;
            acc += p_k;
            if (target < acc) {
                chosen = k;
                break;
            }
        }
        if (chosen < 0) chosen = last_active; // roundoff landed past the last slot
        if (chosen < 0) throw NumericsError("step: no active jump channel");
        psi = jump_ops_[chosen] * psi;
        const double nrm = psi.norm();
        if (nrm <= 0.0) throw NumericsError("step: collapse produced a null state");
        psi /= nrm;
        return chosen;
    }

    psi = u_ * psi;
    psi /= psi.norm();
    return std::nullopt;
}

namespace {

std::vector<int> default_recorded_channels(const JumpStepper& stepper) {
    std::vector<int> out;
    for (int k = 0; k < stepper.channels(); ++k)
        if (stepper.kinds()[k] == models::ChannelKind::Monitor) out.push_back(k);
    if (out.empty())
        for (int k = 0; k < stepper.channels(); ++k)
            if (stepper.kinds()[k] == models::ChannelKind::SourceLoss) out.push_back(k);
    return out;
}

double default_transient(const models::CascadeConfig& cascade) {
    double slowest = cascade.source.gamma;
    for (const auto& d : cascade.detectors) slowest = std::min(slowest, d.linewidth);
    return 20.0 / slowest;
}

/// Diagonal of the embedded emitter occupation, for cheap sampling.
Eigen::VectorXd emitter_occupation_diagonal(const models::CascadeConfig& cascade) {
    const Matrix sigma = models::embedded_sigma(cascade).mat;
    return (sigma.adjoint() * sigma).diagonal().real();
}

} // namespace

RunConfig prepare_run(const RunConfig& cfg) {
    RunConfig out = cfg;
    out.cascade.validate();
    if (!out.duration && !out.target_clicks)
        throw ConfigError("RunConfig: either duration or target_clicks is required");
    if (out.dt <= 0.0) throw ConfigError("RunConfig: dt must be positive");

    if (!out.cascade.detectors.empty())
        out.cascade = mastereq::with_converged_truncation(out.cascade);

    // enforce max_k <c_k^dag c_k> dt <= 0.1 at the steady state
    const auto l = models::build_cascaded_liouvillian(out.cascade);
    const auto rho = mastereq::steady_state(l);
    std::vector<models::CollapseChannel> channels = models::collapse_operators(out.cascade);
    if (auto pump = models::pump_channel(out.cascade)) channels.push_back(std::move(*pump));
    double max_rate = 0.0;
    for (const auto& ch : channels)
        max_rate = std::max(max_rate,
                            (ch.op.mat.adjoint() * ch.op.mat * rho.rho).trace().real());
    while (max_rate * out.dt > 0.1) out.dt *= 0.5;

    if (!out.transient) out.transient = default_transient(out.cascade);
    return out;
}

std::string run_identifier(const RunConfig& cfg) {
    // FNV-1a over the canonical config text; stable across platforms.
    const std::string text = streamio::run_config_json(cfg).dump() + "#" + std::to_string(cfg.seed);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

ClickStream run_prepared_trajectory(const RunConfig& prepared, std::uint64_t trajectory,
                                    const std::string& run_id) {
    const JumpStepper stepper(prepared.cascade, prepared.dt);
    std::vector<int> recorded = prepared.recorded_channels;
    if (recorded.empty()) recorded = default_recorded_channels(stepper);
    std::vector<char> is_recorded(stepper.channels(), 0);
    for (int k : recorded) {
        if (k < 0 || k >= stepper.channels())
            throw ConfigError("RunConfig: recorded channel index out of range");
        is_recorded[static_cast<std::size_t>(k)] = 1;
    }

    ClickStream stream;
    stream.seed = trajectory_seed(prepared.seed, trajectory);
    stream.trajectory = trajectory;
    stream.run_id = run_id;
    stream.dt = stepper.dt();
    stream.transient = *prepared.transient;
    stream.channel_labels = stepper.labels();
    stream.recorded_channels = recorded;
    stream.config_json = streamio::run_config_json(prepared).dump();

    Xoshiro256pp rng(stream.seed);
    Vector psi = Vector::Zero(stepper.dim());
    psi(0) = 1.0; // ground state of every factor

    const double dt = stepper.dt();
    const auto transient_steps = static_cast<long long>(std::ceil(*prepared.transient / dt));
    for (long long s = 0; s < transient_steps; ++s) stepper.step(psi, rng);

    const Eigen::VectorXd occ_diag = prepared.sample_interval > 0.0
                                         ? emitter_occupation_diagonal(prepared.cascade)
                                         : Eigen::VectorXd();
    auto sample_population = [&](const Vector& state) {
        double occ = 0.0;
        for (int i = 0; i < state.size(); ++i) occ += occ_diag(i) * std::norm(state(i));
        stream.population_samples.push_back(occ);
    };

    double t = 0.0;
    long long next_sample = 0;
    const bool until_duration = prepared.duration.has_value();
    const double t_end = prepared.duration.value_or(0.0);
    const std::uint64_t click_target = prepared.target_clicks.value_or(0);

    for (;;) {
        if (until_duration && t >= t_end) break;
        if (!until_duration && stream.records.size() >= click_target) break;
        if (prepared.sample_interval > 0.0 && t >= next_sample * prepared.sample_interval) {
            sample_population(psi);
            ++next_sample;
        }
        const std::optional<int> jumped = stepper.step(psi, rng);
        t += dt;
        if (jumped && is_recorded[static_cast<std::size_t>(*jumped)])
            stream.records.push_back({t, *jumped});
    }
    stream.duration = until_duration ? t_end : t;
    return stream;
}

int thread_count_from_env(int n_tasks) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FRES_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) n = parsed;
    }
    return std::max(1, std::min(n, n_tasks));
}

} // namespace

ClickStream run_trajectory(const RunConfig& cfg) {
    const RunConfig prepared = prepare_run(cfg);
    return run_prepared_trajectory(prepared, 0, run_identifier(prepared));
}

EnsembleResult run_ensemble(const RunConfig& cfg, int n_traj) {
    if (n_traj < 1) throw ConfigError("run_ensemble: need at least one trajectory");
    const RunConfig prepared = prepare_run(cfg);
    const std::string run_id = run_identifier(prepared);

    EnsembleResult result;
    result.streams.resize(n_traj);

    // a click target counts merged clicks: split it across trajectories
    std::vector<RunConfig> per_traj(static_cast<std::size_t>(n_traj), prepared);
    if (prepared.target_clicks) {
        const std::uint64_t total = *prepared.target_clicks;
        for (int i = 0; i < n_traj; ++i) {
            const auto n = static_cast<std::uint64_t>(n_traj);
            per_traj[static_cast<std::size_t>(i)].target_clicks =
                total / n + (static_cast<std::uint64_t>(i) < total % n ? 1 : 0);
        }
    }

    const int n_threads = thread_count_from_env(n_traj);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_traj) return;
            result.streams[static_cast<std::size_t>(i)] = run_prepared_trajectory(
                per_traj[static_cast<std::size_t>(i)], static_cast<std::uint64_t>(i), run_id);
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::size_t min_samples = std::string::npos;
    for (const auto& s : result.streams) {
        result.total_clicks += s.clicks();
        result.total_duration += s.duration;
        if (prepared.sample_interval > 0.0)
            min_samples = std::min(min_samples, s.population_samples.size());
    }
    if (prepared.sample_interval > 0.0 && min_samples != std::string::npos) {
        result.mean_population.assign(min_samples, 0.0);
        for (const auto& s : result.streams)
            for (std::size_t k = 0; k < min_samples; ++k)
                result.mean_population[k] += s.population_samples[k] / n_traj;
    }
    return result;
}

ClickStream generate_poisson_stream(double rate, double duration, std::uint64_t seed) {
    if (rate < 0.0) throw ConfigError("generate_poisson_stream: rate must be >= 0");
    if (duration < 0.0) throw ConfigError("generate_poisson_stream: duration must be >= 0");
    ClickStream stream;
    stream.duration = duration;
    stream.seed = seed;
    stream.run_id = "poisson";
    stream.channel_labels = {"poisson"};
    stream.recorded_channels = {0};
    if (rate == 0.0) return stream;
    Xoshiro256pp rng(seed);
    double t = 0.0;
    for (;;) {
        t += -std::log1p(-rng.uniform()) / rate;
        if (t > duration) break;
        stream.records.push_back({t, 0});
    }
    return stream;
}

} // namespace fres::mcjump
