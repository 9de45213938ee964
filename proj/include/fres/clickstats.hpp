#pragma once

#include <span>
#include <vector>

#include "fres/mcjump.hpp"

namespace fres::clickstats {

using mcjump::ClickStream;

/// Binned two-photon coincidence histogram, normalized to the uncorrelated
/// pair density N(N-1) bin_width (T-|tau|)/T^2 per bin (finite-duration edge
/// correction included). Bin edges sit at integer multiples of the bin width
/// so no bin straddles tau = 0.
struct CorrelationHistogram {
    std::vector<double> tau_center;
    std::vector<double> g2;
    std::vector<double> stderr_;
    std::vector<std::uint64_t> counts;
    double bin_width = 0.0;
    double tau_max = 0.0;
    std::uint64_t total_clicks = 0;
};

/// Empirical distribution of click counts over disjoint windows.
struct CountingDistribution {
    double window_length = 0.0;
    std::vector<double> q;       ///< q[m], sums to 1
    std::vector<double> stderr_;
    std::uint64_t windows = 0;
};

struct WaitingTimeDistribution {
    std::vector<double> tau_center;
    std::vector<double> density;
    std::vector<double> stderr_;
    std::uint64_t intervals = 0;
};

/// Autocorrelation from all ordered click pairs with |t_i - t_j| <= tau_max
/// (self-pairs excluded); symmetric in tau by construction. Accepts several
/// streams (independent trajectories); pairs never cross streams.
CorrelationHistogram g2_histogram(std::span<const ClickStream> streams, double tau_max,
                                  double bin_width);
CorrelationHistogram g2_histogram(const ClickStream& stream, double tau_max, double bin_width);

/// Cross-correlation histogram of t_i^A - t_j^B. Streams must share a clock
/// (same run id and trajectory), pairwise by position in the spans.
CorrelationHistogram cross_g2_histogram(std::span<const ClickStream> a,
                                        std::span<const ClickStream> b, double tau_max,
                                        double bin_width);
CorrelationHistogram cross_g2_histogram(const ClickStream& a, const ClickStream& b,
                                        double tau_max, double bin_width);

/// Density of consecutive inter-click intervals (next-photon waiting time).
WaitingTimeDistribution waiting_time(std::span<const ClickStream> streams, double tau_max,
                                     double bin_width);
WaitingTimeDistribution waiting_time(const ClickStream& stream, double tau_max, double bin_width);

/// q(m) over disjoint consecutive windows; requires T >= 10 window lengths.
CountingDistribution window_counts(std::span<const ClickStream> streams, double window_length);
CountingDistribution window_counts(const ClickStream& stream, double window_length);

/// Fraction of clicks whose nearest neighbour lies closer than tau_c.
double closely_spaced_fraction(std::span<const ClickStream> streams, double tau_c);
double closely_spaced_fraction(const ClickStream& stream, double tau_c);

struct Rate {
    double value = 0.0;
    double stderr_ = 0.0; ///< Poisson error sqrt(N)/T
};

Rate rate(std::span<const ClickStream> streams);
Rate rate(const ClickStream& stream);

/// Streams restricted to single channels, sharing the parent's clock and
/// metadata; used to split multi-window runs into per-window streams.
ClickStream filter_channel(const ClickStream& stream, int channel);

/// Variance/mean of a counting distribution (1 for a Poisson process).
double fano_factor(const CountingDistribution& dist);

} // namespace fres::clickstats
