#include <doctest.h>

#include <cmath>

#include "fres/clickstats.hpp"

using namespace fres;
using namespace fres::clickstats;
using mcjump::ClickStream;

namespace {

mcjump::RunConfig quick_run(models::Drive drive, double duration, std::uint64_t seed) {
    mcjump::RunConfig cfg;
    cfg.cascade.source.drive = drive;
    cfg.duration = duration;
    cfg.seed = seed;
    return cfg;
}

} // namespace

namespace {

ClickStream periodic_stream(double period, int n) {
    ClickStream s;
    s.duration = period * (n + 1);
    s.run_id = "periodic";
    s.channel_labels = {"tick"};
    for (int k = 1; k <= n; ++k) s.records.push_back({k * period, 0});
    return s;
}

} // namespace

TEST_CASE("poisson control calibrates the g2 estimator to one") {
    const auto s = mcjump::generate_poisson_stream(1.0, 200000.0, 99);
    const auto h = g2_histogram(s, 10.0, 0.1);
    int outliers = 0;
    double mean = 0.0;
    for (std::size_t k = 0; k < h.g2.size(); ++k) {
        if (std::abs(h.g2[k] - 1.0) > 3.0 * h.stderr_[k]) ++outliers;
        mean += h.g2[k] / static_cast<double>(h.g2.size());
    }
    // at most 1% of bins beyond three sigma
    CHECK(outliers <= static_cast<int>(h.g2.size() / 100));
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("autocorrelation is symmetric by construction") {
    const auto s = mcjump::generate_poisson_stream(0.7, 50000.0, 5);
    const auto h = g2_histogram(s, 5.0, 0.05);
    const std::size_t n = h.g2.size();
    for (std::size_t k = 0; k < n / 2; ++k) {
        CHECK(h.counts[k] == h.counts[n - 1 - k]);
        CHECK(h.tau_center[k] == doctest::Approx(-h.tau_center[n - 1 - k]));
    }
}

TEST_CASE("periodic stream has empty forbidden region") {
    const auto s = periodic_stream(1.0, 2000);
    const auto h = g2_histogram(s, 0.9, 0.1);
    for (std::size_t k = 0; k < h.counts.size(); ++k) CHECK(h.counts[k] == 0);
}

TEST_CASE("per-bin error shrinks as one over sqrt of clicks") {
    const auto s1 = mcjump::generate_poisson_stream(1.0, 100000.0, 7);
    const auto s2 = mcjump::generate_poisson_stream(1.0, 200000.0, 8);
    const auto h1 = g2_histogram(s1, 4.0, 0.1);
    const auto h2 = g2_histogram(s2, 4.0, 0.1);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t k = 0; k < h1.stderr_.size(); ++k) {
        e1 += h1.stderr_[k];
        e2 += h2.stderr_[k];
    }
    CHECK(e1 / e2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("cross histogram") {
    SUBCASE("independent poisson streams are flat") {
        auto a = mcjump::generate_poisson_stream(0.8, 100000.0, 21);
        auto b = mcjump::generate_poisson_stream(0.5, 100000.0, 22);
        const auto h = cross_g2_histogram(a, b, 5.0, 0.25);
        int outliers = 0;
        for (std::size_t k = 0; k < h.g2.size(); ++k)
            if (std::abs(h.g2[k] - 1.0) > 3.0 * h.stderr_[k]) ++outliers;
        CHECK(outliers <= std::max<int>(1, static_cast<int>(h.g2.size() / 100)));
    }
    SUBCASE("self-pairing shows up only when correlating a stream with itself") {
        const auto s = mcjump::generate_poisson_stream(1.0, 20000.0, 23);
        const auto auto_h = g2_histogram(s, 2.0, 0.1);
        const auto cross_h = cross_g2_histogram(s, s, 2.0, 0.1);
        // the bin just above tau = 0 collects exactly the N self pairs extra
        const std::size_t zero_bin = cross_h.counts.size() / 2;
        CHECK(cross_h.counts[zero_bin] == auto_h.counts[zero_bin] + s.clicks());
    }
    SUBCASE("streams with different clocks are rejected") {
        auto a = mcjump::generate_poisson_stream(1.0, 1000.0, 24);
        auto b = a;
        b.run_id = "other";
        CHECK_THROWS_AS(cross_g2_histogram(a, b, 1.0, 0.1), StatisticsError);
    }
}

TEST_CASE("waiting-time distributions") {
    SUBCASE("poisson gaps are exponential") {
        const double r = 0.5;
        const auto s = mcjump::generate_poisson_stream(r, 400000.0, 31);
        const auto w = waiting_time(s, 8.0, 0.25);
        for (std::size_t k = 0; k < w.density.size(); ++k) {
            // bin-averaged exponential density
            const double lo = static_cast<double>(k) * 0.25;
            const double expected = (std::exp(-r * lo) - std::exp(-r * (lo + 0.25))) / 0.25;
            CHECK(std::abs(w.density[k] - expected) < 4.0 * w.stderr_[k] + 1e-4);
        }
    }
    SUBCASE("periodic stream is a point mass") {
        const auto s = periodic_stream(1.0, 500);
        const auto w = waiting_time(s, 2.0, 0.25);
        for (std::size_t k = 0; k < w.density.size(); ++k) {
            const bool is_period_bin = k == 4; // [1.0, 1.25)
            CHECK(w.density[k] == doctest::Approx(is_period_bin ? 4.0 : 0.0));
        }
    }
    SUBCASE("antibunched emitter gaps vanish toward zero delay") {
        const auto s = mcjump::run_trajectory(quick_run(models::IncoherentDrive{2.0},
                                                        30000.0, 71));
        const auto w = waiting_time(s, 3.0, 0.05);
        // density at the origin is suppressed relative to the body
        double peak = 0.0;
        for (double v : w.density) peak = std::max(peak, v);
        CHECK(w.density.front() < 0.1 * peak);
    }
}

TEST_CASE("narrow-filtered thermal light counts super-Poissonian") {
    mcjump::RunConfig cfg;
    cfg.cascade.source.drive = models::IncoherentDrive{2.0};
    cfg.cascade.detectors = {models::DetectorConfig{0.0, 0.5, 6}};
    cfg.cascade.chi2 = 0.5;
    cfg.duration = 80000.0;
    cfg.seed = 72;
    const auto s = mcjump::run_trajectory(cfg);
    const auto counts = window_counts(s, 10.0); // window of a few coherence times
    CHECK(fano_factor(counts) > 1.1);
}

TEST_CASE("window counting statistics") {
    SUBCASE("poisson counts have unit Fano factor") {
        const auto s = mcjump::generate_poisson_stream(1.0, 200000.0, 41);
        const auto c = window_counts(s, 2.0);
        double sum = 0.0;
        for (double q : c.q) sum += q;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fano_factor(c) == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("empty stream counts nothing but vacuum") {
        ClickStream s;
        s.duration = 1000.0;
        const auto c = window_counts(s, 10.0);
        CHECK(c.q.size() == 1);
        CHECK(c.q[0] == doctest::Approx(1.0));
    }
    SUBCASE("short streams are rejected") {
        ClickStream s;
        s.duration = 5.0;
        CHECK_THROWS_AS(window_counts(s, 1.0), ConfigError);
    }
}

TEST_CASE("closely spaced fraction") {
    SUBCASE("periodic stream has none below the period") {
        const auto s = periodic_stream(1.0, 1000);
        CHECK(closely_spaced_fraction(s, 0.5) == doctest::Approx(0.0));
    }
    SUBCASE("poisson nearest-neighbour law 1 - exp(-2 r tau_c)") {
        const double r = 1.0, tau_c = 0.3;
        const auto s = mcjump::generate_poisson_stream(r, 300000.0, 51);
        const double expected = 1.0 - std::exp(-2.0 * r * tau_c);
        CHECK(closely_spaced_fraction(s, tau_c) == doctest::Approx(expected).epsilon(0.02));
    }
}

TEST_CASE("rate estimator") {
    SUBCASE("empty stream has zero rate") {
        ClickStream s;
        s.duration = 100.0;
        const auto r = rate(s);
        CHECK(r.value == doctest::Approx(0.0));
    }
    SUBCASE("poisson rate within three sigma") {
        const auto s = mcjump::generate_poisson_stream(2.0, 50000.0, 61);
        const auto r = rate(s);
        CHECK(std::abs(r.value - 2.0) < 3.0 * r.stderr_);
    }
}

TEST_CASE("channel filtering keeps clock metadata") {
    ClickStream s;
    s.duration = 10.0;
    s.run_id = "r";
    s.trajectory = 3;
    s.channel_labels = {"a", "b"};
    s.records = {{1.0, 0}, {2.0, 1}, {3.0, 0}};
    const auto only_b = filter_channel(s, 1);
    CHECK(only_b.clicks() == 1);
    CHECK(only_b.records[0].time == doctest::Approx(2.0));
    CHECK(only_b.run_id == "r");
    CHECK(only_b.trajectory == 3);
    CHECK(only_b.duration == doctest::Approx(10.0));
}

TEST_CASE("empty input is rejected") {
    ClickStream s;
    s.duration = 10.0;
    CHECK_THROWS_AS(g2_histogram(s, 1.0, 0.1), StatisticsError);
}
