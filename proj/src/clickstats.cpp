#include "fres/clickstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fres::clickstats {

namespace {

void require_nonempty(std::span<const ClickStream> streams, const char* who) {
    std::size_t total = 0;
    for (const auto& s : streams) total += s.clicks();
    if (streams.empty() || total == 0) throw StatisticsError(std::string(who) + ": empty stream");
}

void require_shared_clock(const ClickStream& a, const ClickStream& b) {
    if (a.run_id != b.run_id || a.trajectory != b.trajectory)
        throw StatisticsError("cross_g2_histogram: streams come from different runs "
                              "(incompatible clocks)");
}

struct BinGrid {
    double bin_width;
    int half_bins; ///< bins per side; bin b covers [(b)*w, (b+1)*w) for b >= 0
    double tau_max;

    BinGrid(double tau_max_in, double width) {
        if (width <= 0.0) throw ConfigError("histogram: bin width must be positive");
        if (tau_max_in < width) throw ConfigError("histogram: tau_max smaller than one bin");
        bin_width = width;
        half_bins = static_cast<int>(std::floor(tau_max_in / width + 1e-9));
        tau_max = half_bins * width;
    }

    int total_bins() const { return 2 * half_bins; }
    /// Index for a signed delay, or -1 when out of range.
    int index(double tau) const {
        const double shifted = tau / bin_width + half_bins;
        if (shifted < 0.0 || shifted >= total_bins()) return -1;
        return static_cast<int>(shifted);
    }
    double center(int b) const { return (b - half_bins + 0.5) * bin_width; }
};

/// Expected uncorrelated ordered-pair count in one bin for one stream pair.
double expected_pairs(double n_ordered_pairs, double t_total, double tau_center,
                      double bin_width) {
    const double edge = std::max(0.0, (t_total - std::abs(tau_center)) / t_total);
    return n_ordered_pairs * bin_width * edge / t_total;
}

CorrelationHistogram finalize(const BinGrid& grid, std::vector<std::uint64_t> counts,
                              const std::vector<double>& expected, std::uint64_t total_clicks) {
    CorrelationHistogram h;
    h.bin_width = grid.bin_width;
    h.tau_max = grid.tau_max;
    h.total_clicks = total_clicks;
    for (int b = 0; b < grid.total_bins(); ++b) {
        h.tau_center.push_back(grid.center(b));
        h.counts.push_back(counts[static_cast<std::size_t>(b)]);
        const double exp_b = expected[static_cast<std::size_t>(b)];
        const double c = static_cast<double>(counts[static_cast<std::size_t>(b)]);
        h.g2.push_back(exp_b > 0.0 ? c / exp_b : 0.0);
        h.stderr_.push_back(exp_b > 0.0 ? std::sqrt(std::max(c, 1.0)) / exp_b : 0.0);
    }
    return h;
}

} // namespace

CorrelationHistogram g2_histogram(std::span<const ClickStream> streams, double tau_max,
                                  double bin_width) {
    require_nonempty(streams, "g2_histogram");
    const BinGrid grid(tau_max, bin_width);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(grid.total_bins()), 0);
    std::vector<double> expected(static_cast<std::size_t>(grid.total_bins()), 0.0);
    std::uint64_t total_clicks = 0;

    for (const auto& s : streams) {
        const auto& rec = s.records;
        const std::size_t n = rec.size();
        total_clicks += n;
        // sliding window over the sorted record times: O(N k)
        std::size_t j_lo = 0;
        for (std::size_t i = 0; i < n; ++i) {
            while (j_lo < n && rec[j_lo].time < rec[i].time - grid.tau_max) ++j_lo;
            for (std::size_t j = j_lo; j < i; ++j) {
                const double tau = rec[i].time - rec[j].time; // > 0
                const int b_pos = grid.index(tau);
                const int b_neg = grid.index(-tau);
                if (b_pos >= 0) ++counts[static_cast<std::size_t>(b_pos)];
                if (b_neg >= 0) ++counts[static_cast<std::size_t>(b_neg)];
            }
        }
        if (n >= 2 && s.duration > 0.0) {
            const double pairs = static_cast<double>(n) * (static_cast<double>(n) - 1.0);
            for (int b = 0; b < grid.total_bins(); ++b)
                expected[static_cast<std::size_t>(b)] +=
                    expected_pairs(pairs, s.duration, grid.center(b), grid.bin_width);
        }
    }
    return finalize(grid, std::move(counts), expected, total_clicks);
}

CorrelationHistogram g2_histogram(const ClickStream& stream, double tau_max, double bin_width) {
    return g2_histogram(std::span<const ClickStream>(&stream, 1), tau_max, bin_width);
}

CorrelationHistogram cross_g2_histogram(std::span<const ClickStream> a,
                                        std::span<const ClickStream> b, double tau_max,
                                        double bin_width) {
    if (a.size() != b.size() || a.empty())
        throw StatisticsError("cross_g2_histogram: stream lists must pair up");
    const BinGrid grid(tau_max, bin_width);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(grid.total_bins()), 0);
    std::vector<double> expected(static_cast<std::size_t>(grid.total_bins()), 0.0);
    std::uint64_t total_clicks = 0;

    for (std::size_t s = 0; s < a.size(); ++s) {
        require_shared_clock(a[s], b[s]);
        const auto& ra = a[s].records;
        const auto& rb = b[s].records;
        total_clicks += ra.size() + rb.size();
        std::size_t j_lo = 0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            while (j_lo < rb.size() && rb[j_lo].time < ra[i].time - grid.tau_max) ++j_lo;
            for (std::size_t j = j_lo; j < rb.size(); ++j) {
                const double tau = ra[i].time - rb[j].time; // t_A - t_B
                if (tau < -grid.tau_max) break;
                const int bin = grid.index(tau);
                if (bin >= 0) ++counts[static_cast<std::size_t>(bin)];
            }
        }
        const double t_total = a[s].duration;
        if (t_total > 0.0 && !ra.empty() && !rb.empty()) {
            const double pairs = static_cast<double>(ra.size()) * static_cast<double>(rb.size());
            for (int bin = 0; bin < grid.total_bins(); ++bin)
                expected[static_cast<std::size_t>(bin)] +=
                    expected_pairs(pairs, t_total, grid.center(bin), grid.bin_width);
        }
    }
    return finalize(grid, std::move(counts), expected, total_clicks);
}

CorrelationHistogram cross_g2_histogram(const ClickStream& a, const ClickStream& b,
                                        double tau_max, double bin_width) {
    return cross_g2_histogram(std::span<const ClickStream>(&a, 1),
                              std::span<const ClickStream>(&b, 1), tau_max, bin_width);
}

WaitingTimeDistribution waiting_time(std::span<const ClickStream> streams, double tau_max,
                                     double bin_width) {
    require_nonempty(streams, "waiting_time");
    if (bin_width <= 0.0 || tau_max < bin_width)
        throw ConfigError("waiting_time: invalid binning");
    const int bins = static_cast<int>(std::floor(tau_max / bin_width + 1e-9));
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins), 0);
    std::uint64_t intervals = 0;
    for (const auto& s : streams) {
        for (std::size_t i = 1; i < s.records.size(); ++i) {
            const double gap = s.records[i].time - s.records[i - 1].time;
            ++intervals;
            const int b = static_cast<int>(gap / bin_width);
            if (b >= 0 && b < bins) ++counts[static_cast<std::size_t>(b)];
        }
    }
    if (intervals < 1) throw StatisticsError("waiting_time: need at least two clicks");
    WaitingTimeDistribution d;
    d.intervals = intervals;
    const double norm = static_cast<double>(intervals) * bin_width;
    for (int b = 0; b < bins; ++b) {
        d.tau_center.push_back((b + 0.5) * bin_width);
        const double c = static_cast<double>(counts[static_cast<std::size_t>(b)]);
        d.density.push_back(c / norm);
        d.stderr_.push_back(std::sqrt(std::max(c, 1.0)) / norm);
    }
    return d;
}

WaitingTimeDistribution waiting_time(const ClickStream& stream, double tau_max,
                                     double bin_width) {
    return waiting_time(std::span<const ClickStream>(&stream, 1), tau_max, bin_width);
}

CountingDistribution window_counts(std::span<const ClickStream> streams, double window_length) {
    if (window_length <= 0.0) throw ConfigError("window_counts: window length must be positive");
    CountingDistribution d;
    d.window_length = window_length;
    std::vector<std::uint64_t> counts; // counts[m] = number of windows with m clicks
    for (const auto& s : streams) {
        if (s.duration < 10.0 * window_length)
            throw ConfigError("window_counts: stream shorter than ten windows");
        const auto n_windows = static_cast<std::uint64_t>(s.duration / window_length);
        std::size_t i = 0;
        for (std::uint64_t w = 0; w < n_windows; ++w) {
            const double t_end = (static_cast<double>(w) + 1.0) * window_length;
            std::uint64_t m = 0;
            while (i < s.records.size() && s.records[i].time < t_end) {
                ++m;
                ++i;
            }
            if (counts.size() <= m) counts.resize(m + 1, 0);
            ++counts[m];
            ++d.windows;
        }
    }
    if (d.windows == 0) throw StatisticsError("window_counts: no complete windows");
    for (std::uint64_t c : counts) {
        const double q = static_cast<double>(c) / static_cast<double>(d.windows);
        d.q.push_back(q);
        d.stderr_.push_back(std::sqrt(std::max(static_cast<double>(c), 1.0)) /
                            static_cast<double>(d.windows));
    }
    return d;
}

CountingDistribution window_counts(const ClickStream& stream, double window_length) {
    return window_counts(std::span<const ClickStream>(&stream, 1), window_length);
}

double closely_spaced_fraction(std::span<const ClickStream> streams, double tau_c) {
    if (tau_c <= 0.0) throw ConfigError("closely_spaced_fraction: tau_c must be positive");
    std::uint64_t close = 0, total = 0;
    for (const auto& s : streams) {
        const auto& rec = s.records;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            if (i > 0) nearest = std::min(nearest, rec[i].time - rec[i - 1].time);
            if (i + 1 < rec.size()) nearest = std::min(nearest, rec[i + 1].time - rec[i].time);
            ++total;
            if (nearest < tau_c) ++close;
        }
    }
    if (total == 0) throw StatisticsError("closely_spaced_fraction: empty stream");
    return static_cast<double>(close) / static_cast<double>(total);
}

double closely_spaced_fraction(const ClickStream& stream, double tau_c) {
    return closely_spaced_fraction(std::span<const ClickStream>(&stream, 1), tau_c);
}

Rate rate(std::span<const ClickStream> streams) {
    double t_total = 0.0;
    std::uint64_t n = 0;
    for (const auto& s : streams) {
        t_total += s.duration;
        n += s.clicks();
    }
    if (t_total <= 0.0) throw StatisticsError("rate: zero total duration");
    return {static_cast<double>(n) / t_total, std::sqrt(static_cast<double>(n)) / t_total};
}

Rate rate(const ClickStream& stream) {
    return rate(std::span<const ClickStream>(&stream, 1));
}

ClickStream filter_channel(const ClickStream& stream, int channel) {
    ClickStream out = stream;
    out.records.clear();
    out.recorded_channels = {channel};
    for (const auto& r : stream.records)
        if (r.channel == channel) out.records.push_back(r);
    return out;
}

double fano_factor(const CountingDistribution& dist) {
    double mean = 0.0, second = 0.0;
    for (std::size_t m = 0; m < dist.q.size(); ++m) {
        mean += static_cast<double>(m) * dist.q[m];
        second += static_cast<double>(m) * static_cast<double>(m) * dist.q[m];
    }
    const double var = second - mean * mean;
    if (mean <= 0.0) throw StatisticsError("fano_factor: empty counting distribution");
    return var / mean;
}

} // namespace fres::clickstats
