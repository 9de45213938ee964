#include <doctest.h>

#include "fres/mastereq.hpp"
#include "oracles.hpp"

using namespace fres;
using namespace fres::mastereq;
using namespace fres::models;
using hilbert::Complex;
using hilbert::Matrix;

namespace {

SourceConfig incoherent(double pump) {
    SourceConfig src;
    src.drive = IncoherentDrive{pump};
    return src;
}

SourceConfig coherent(double rabi, double detuning = 0.0) {
    SourceConfig src;
    src.drive = CoherentDrive{rabi, detuning};
    return src;
}

CascadeConfig cascade(SourceConfig src, double omega, double Gamma, int n_max) {
    CascadeConfig cfg;
    cfg.source = std::move(src);
    cfg.detectors = {DetectorConfig{omega, Gamma, n_max}};
    cfg.chi1 = 0.0;
    cfg.chi2 = 0.5;
    return cfg;
}

} // namespace

TEST_CASE("steady states of the bare emitter") {
    SUBCASE("undriven decay ends in the ground state") {
        const auto rho = steady_state(build_source_liouvillian(coherent(0.0)));
        CHECK(rho.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
        validate_density(rho);
    }
    SUBCASE("incoherent pumping balances at P/(P+gamma)") {
        const auto rho = steady_state(build_source_liouvillian(incoherent(2.0)));
        CHECK(rho.rho(1, 1).real() ==
              doctest::Approx(oracles::rate_balance_population(2.0, 1.0)).epsilon(1e-10));
    }
    SUBCASE("saturation at strong pumping") {
        const auto rho = steady_state(build_source_liouvillian(incoherent(100.0)));
        CHECK(rho.rho(1, 1).real() == doctest::Approx(100.0 / 101.0).epsilon(1e-10));
    }
    SUBCASE("degenerate generators are rejected") {
        hilbert::Superoperator dead{hilbert::SpaceLayout({2}), Matrix::Zero(4, 4)};
        CHECK_THROWS_AS(steady_state(dead), NumericsError);
    }
}

TEST_CASE("propagation") {
    const auto l = build_source_liouvillian(incoherent(2.0));
    DensityMatrix excited{l.layout, Matrix::Zero(2, 2)};
    excited.rho(1, 1) = 1.0;

    SUBCASE("t = 0 returns the input") {
        const auto same = propagate(l, excited, 0.0);
        CHECK((same.rho - excited.rho).norm() == doctest::Approx(0.0));
    }
    SUBCASE("long-time limit is the steady state, trace preserved") {
        const auto late = propagate(l, excited, 50.0);
        const auto ss = steady_state(l);
        CHECK((late.rho - ss.rho).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(late.rho.trace() - Complex(1, 0)) < 1e-10);
    }
    SUBCASE("pure decay follows exp(-gamma t)") {
        const auto l0 = build_source_liouvillian(coherent(0.0));
        DensityMatrix up{l0.layout, Matrix::Zero(2, 2)};
        up.rho(1, 1) = 1.0;
        for (double t : {0.3, 1.0, 2.5}) {
            const auto rho_t = propagate(l0, up, t);
            CHECK(rho_t.rho(1, 1).real() == doctest::Approx(std::exp(-t)).epsilon(1e-10));
        }
    }
}

TEST_CASE("quantum regression reproduces the closed-form emitter g2") {
    for (double pump : {0.1, 2.0, 100.0}) {
        const auto l = build_source_liouvillian(incoherent(pump));
        const auto rho = steady_state(l);
        const auto curve =
            g2_regression(l, hilbert::annihilation_tls(), rho, 6.0 / (1.0 + pump), 121);
        for (std::size_t k = 0; k < curve.tau.size(); ++k) {
            const double expected = closed_form_g2_incoherent(curve.tau[k], 1.0, pump);
            CHECK(std::abs(curve.g2[k] - expected) < 1e-8);
        }
        CHECK(curve.g2.front() == doctest::Approx(0.0).epsilon(1e-12)); // sigma^2 = 0
    }
}

TEST_CASE("wide filtering approaches the unfiltered antibunching") {
    auto cfg = cascade(incoherent(2.0), 0.0, 100.0, 2);
    cfg = with_converged_truncation(cfg);
    const auto l = build_cascaded_liouvillian(cfg);
    const auto rho = steady_state(l);
    const auto xi = embedded_xi(cfg, 0);
    const double g2_0 =
        factorial_moment(rho, xi, 2) / std::pow(factorial_moment(rho, xi, 1), 2);
    CHECK(g2_0 < 0.05);
}

TEST_CASE("filtered correlations wash out at long delays") {
    for (double Gamma : {0.5, 1.0, 4.0}) {
        auto cfg = cascade(incoherent(2.0), 0.0, Gamma, 4);
        cfg = with_converged_truncation(cfg);
        const auto l = build_cascaded_liouvillian(cfg);
        const auto rho = steady_state(l);
        validate_density(rho);
        const double horizon = 12.0 * (1.0 / Gamma + 1.0 / 3.0);
        const auto curve = g2_regression(l, embedded_xi(cfg, 0), rho, horizon, 241);
        CHECK(curve.g2.back() == doctest::Approx(1.0).epsilon(1e-3));
        for (double v : curve.g2) CHECK(v >= -1e-12);
    }
}

TEST_CASE("correlations of an empty window are undefined") {
    const auto l = build_source_liouvillian(coherent(0.0));
    const auto rho = steady_state(l); // vacuum
    CHECK_THROWS_AS(g2_regression(l, hilbert::annihilation_tls(), rho, 1.0, 11),
                    NumericsError);
}

TEST_CASE("oversized joint dimensions are rejected") {
    CascadeConfig cfg;
    cfg.source = incoherent(2.0);
    cfg.detectors = {DetectorConfig{0.0, 1.0, 9}, DetectorConfig{0.0, 1.0, 9}};
    cfg.chi0 = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("cross regression with identical windows reduces to autocorrelation") {
    auto cfg = cascade(incoherent(2.0), 0.0, 1.0, 4);
    cfg = with_converged_truncation(cfg);
    const auto l = build_cascaded_liouvillian(cfg);
    const auto rho = steady_state(l);
    const auto xi = embedded_xi(cfg, 0);
    const auto cross = cross_g2_regression(l, xi, xi, rho, 5.0, 101);
    const auto direct = g2_regression(l, xi, rho, 5.0, 101);
    for (int k = 0; k < 101; ++k) {
        CHECK(cross.g2[static_cast<std::size_t>(100 + k)] ==
              doctest::Approx(direct.g2[static_cast<std::size_t>(k)]).epsilon(1e-12));
        // mirrored side identical for equal windows
        CHECK(cross.g2[static_cast<std::size_t>(100 - k)] ==
              doctest::Approx(direct.g2[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
}

TEST_CASE("sideband cross-correlations are symmetric at resonance") {
    CascadeConfig cfg;
    cfg.source = coherent(5.0);
    cfg.detectors = {DetectorConfig{-10.0, 1.0, 2}, DetectorConfig{10.0, 1.0, 2}};
    cfg.chi0 = 0.5;
    cfg.chi2 = 0.5;
    cfg.chi3 = 0.5;
    const auto converged = with_converged_truncation(cfg);
    const auto l = build_cascaded_liouvillian(converged);
    const auto rho = steady_state(l);
    const auto cross = cross_g2_regression(l, embedded_xi(converged, 0),
                                           embedded_xi(converged, 1), rho, 4.0, 81);
    const std::size_t mid = cross.tau.size() / 2;
    for (std::size_t k = 0; k <= mid; ++k)
        CHECK(std::abs(cross.g2[mid + k] - cross.g2[mid - k]) < 1e-8);
}

TEST_CASE("closed-form emitter g2") {
    CHECK(closed_form_g2_incoherent(0.0, 1.0, 2.0) == doctest::Approx(0.0));
    CHECK(closed_form_g2_incoherent(100.0, 1.0, 2.0) == doctest::Approx(1.0));
    CHECK(closed_form_g2_incoherent(std::log(2.0) / 3.0, 1.0, 2.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("incoherent filtered population closed form") {
    SUBCASE("printed value at the reference point") {
        CHECK(closed_form_population_incoherent(2.0, 1.0, 1.0, 0.0) ==
              doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("limits") {
        CHECK(closed_form_population_incoherent(1e-12, 1.0, 1.0, 0.0) < 1e-11);
        CHECK(closed_form_population_incoherent(2.0, 1.0, 1.0, 1e9) < 1e-12);
    }
    SUBCASE("matches the cascaded detected population across a (Gamma, delta) grid") {
        // the closed form's Delta variable is twice the physical detuning;
        // truncation tightened well past the comparison tolerance
        for (double Gamma : {0.5, 1.0, 4.0}) {
            for (double delta : {0.0, 0.8, 2.0}) {
                auto cfg = cascade(incoherent(2.0), delta, Gamma, 3);
                cfg = with_converged_truncation(cfg, 40, 1e-11);
                const auto rho = steady_state(build_cascaded_liouvillian(cfg));
                const double detected = detected_population(cfg, 0, rho);
                const double closed =
                    closed_form_population_incoherent_physical(2.0, 1.0, Gamma, delta);
                CHECK(detected == doctest::Approx(closed).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("coherent filtered population closed form") {
    SUBCASE("limits") {
        CHECK(closed_form_population_coherent(0.0, 1.0, 1.0, 0.0) == doctest::Approx(0.0));
        CHECK(closed_form_population_coherent(5.0, 1.0, 1.0, 1e9) < 1e-12);
    }
    SUBCASE("matches the cascaded detected population at drive 5") {
        auto cfg = cascade(coherent(5.0), 0.0, 1.0, 4);
        cfg = with_converged_truncation(cfg, 40, 1e-11);
        const auto rho = steady_state(build_cascaded_liouvillian(cfg));
        const double detected = detected_population(cfg, 0, rho);
        CHECK(detected ==
              doctest::Approx(closed_form_population_coherent_physical(5.0, 1.0, 1.0, 0.0))
                  .epsilon(1e-6));
        // as printed (without the sqrt(2) drive identification) the value is
        // measurably different; the solver is the authority
        CHECK(std::abs(detected - closed_form_population_coherent(5.0, 1.0, 1.0, 0.0)) /
                  detected >
              1e-3);
    }
}

TEST_CASE("sensor method agrees with the cascaded correlators") {
    for (double Gamma : {0.1, 1.0, 10.0}) {
        auto cfg = cascade(incoherent(2.0), 0.0, Gamma, 5);
        cfg = with_converged_truncation(cfg);
        const auto rho = steady_state(build_cascaded_liouvillian(cfg));
        const auto xi = embedded_xi(cfg, 0);
        const double g2_cascade =
            factorial_moment(rho, xi, 2) / std::pow(factorial_moment(rho, xi, 1), 2);

        SensorConfig sen;
        sen.epsilon = 1e-3;
        sen.linewidth = Gamma;
        const double g2_sensor = sensor_correlator(cfg.source, sen, 2);
        CHECK(std::abs(g2_sensor - g2_cascade) / g2_cascade < 1e-3);
    }
}

TEST_CASE("sensor stability guard rejects strong coupling") {
    SensorConfig sen;
    sen.epsilon = 0.4; // far outside the probe regime
    sen.linewidth = 0.3;
    CHECK_THROWS_AS(sensor_correlator(incoherent(2.0), sen, 2), NumericsError);
}

TEST_CASE("narrow filtering of weak coherent scattering is uncorrelated") {
    // low drive, window well inside the Rayleigh line
    SensorConfig sen;
    sen.epsilon = 5e-5;
    sen.linewidth = 0.005;
    const double g2 = sensor_correlator(coherent(0.05), sen, 2);
    CHECK(g2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("spectrum scans") {
    SUBCASE("strongly driven emitter shows three peaks") {
        std::vector<double> grid;
        for (double w = -15.0; w <= 15.0 + 1e-9; w += 0.5) grid.push_back(w);
        const auto pops = spectrum_scan(coherent(5.0), 1.0, grid);
        // local maxima near -10, 0, +10
        int maxima = 0;
        for (std::size_t k = 1; k + 1 < pops.size(); ++k)
            if (pops[k] > pops[k - 1] && pops[k] > pops[k + 1]) {
                ++maxima;
                const double w = grid[k];
                const bool near_line = std::abs(w) < 1.0 || std::abs(std::abs(w) - 10.0) < 1.0;
                CHECK(near_line);
            }
        CHECK(maxima == 3);
    }
    SUBCASE("incoherent line is a Lorentzian of width gamma + P + Gamma") {
        const double pump = 2.0, Gamma = 1.0;
        const double fwhm_expected = 1.0 + pump + Gamma;
        std::vector<double> grid = {0.0, fwhm_expected / 2.0};
        const auto pops = spectrum_scan(incoherent(pump), Gamma, grid);
        // half maximum exactly one half-width out
        CHECK(pops[1] / pops[0] == doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("no drive, no photons") {
        const auto pops = spectrum_scan(incoherent(0.0), 1.0, {0.0, 1.0});
        for (double p : pops) CHECK(p < 1e-12);
    }
}

TEST_CASE("truncation check") {
    SUBCASE("generous truncation passes") {
        auto cfg = cascade(incoherent(2.0), 0.0, 4.0, 8);
        const auto rho = steady_state(build_cascaded_liouvillian(cfg));
        const auto rep = truncation_check(cfg, rho);
        CHECK(rep.pass);
        CHECK(rep.top_occupancy[0] < 1e-6);
    }
    SUBCASE("a bunched narrow window overflows n_max = 1") {
        auto cfg = cascade(incoherent(2.0), 0.0, 0.125, 1);
        const auto rho = steady_state(build_cascaded_liouvillian(cfg));
        CHECK_FALSE(truncation_check(cfg, rho).pass);
    }
    SUBCASE("pass status is monotone in n_max") {
        bool seen_pass = false;
        for (int n_max = 1; n_max <= 14; ++n_max) {
            auto cfg = cascade(incoherent(2.0), 0.0, 0.125, n_max);
            const auto rho = steady_state(build_cascaded_liouvillian(cfg));
            const bool pass = truncation_check(cfg, rho).pass;
            if (seen_pass) CHECK(pass);
            if (pass) seen_pass = true;
        }
        CHECK(seen_pass);
    }
}

TEST_CASE("steady-state density matrices are physical across configurations") {
    for (double Gamma : {0.25, 1.0, 8.0}) {
        auto cfg = cascade(incoherent(2.0), 0.3, Gamma, 4);
        cfg = with_converged_truncation(cfg);
        const auto rho = steady_state(build_cascaded_liouvillian(cfg));
        validate_density(rho);
    }
    auto coh_cfg = cascade(coherent(5.0), 5.0, 1.0, 4);
    coh_cfg = with_converged_truncation(coh_cfg);
    validate_density(steady_state(build_cascaded_liouvillian(coh_cfg)));
}
