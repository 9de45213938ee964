#pragma once

#include <vector>

#include "fres/models.hpp"

namespace fres::mastereq {

using hilbert::Matrix;
using hilbert::Operator;
using hilbert::SpaceLayout;
using hilbert::Superoperator;

struct DensityMatrix {
    SpaceLayout layout;
    Matrix rho;

    double trace_real() const { return rho.trace().real(); }
};

/// Hermiticity to 1e-12, unit trace to 1e-12, eigenvalues >= -1e-10.
void validate_density(const DensityMatrix& rho);

/// Normalized two-time intensity correlation on a uniform tau grid.
struct CorrelationCurve {
    std::vector<double> tau;
    std::vector<double> g2;
    double omega1 = 0.0, omega2 = 0.0; ///< window centres (equal for autocorrelation)
    double linewidth = 0.0;
};

/// Unique steady state of a relaxing Liouvillian. Throws NumericsError when
/// the null space is degenerate or the residual exceeds 1e-10.
DensityMatrix steady_state(const Superoperator& l);

/// e^{L t} rho0.
DensityMatrix propagate(const Superoperator& l, const DensityMatrix& rho0, double t);

/// g2(tau) = Tr[xi^dag xi e^{L tau}(xi rho_ss xi^dag)] / <xi^dag xi>^2 on a
/// uniform grid 0..tau_max with `points` samples.
CorrelationCurve g2_regression(const Superoperator& l, const Operator& xi,
                               const DensityMatrix& rho_ss, double tau_max, int points);

/// Cross-correlation g2_12(tau) for tau in [-tau_max, tau_max]; positive tau
/// propagates xi1 rho xi1^dag and measures on xi2, negative tau swaps roles.
CorrelationCurve cross_g2_regression(const Superoperator& l, const Operator& xi1,
                                     const Operator& xi2, const DensityMatrix& rho_ss,
                                     double tau_max, int points);

/// 1 - exp[-(gamma + pump) tau].
double closed_form_g2_incoherent(double tau, double gamma, double pump);

/// Detected filtered population of the incoherently pumped emitter,
///   P (P + Gamma + gamma) / [(P + gamma)((P + Gamma + gamma)^2 + Delta^2)],
/// exactly as the closed form is printed. Note: its Delta variable equals
/// twice the physical detector-emitter detuning of the cascaded model; see
/// closed_form_population_incoherent_physical.
double closed_form_population_incoherent(double pump, double gamma, double Gamma, double Delta);

/// Same closed form evaluated at a physical detuning (Delta -> 2 delta).
double closed_form_population_incoherent_physical(double pump, double gamma, double Gamma,
                                                  double delta);

/// Detected filtered population under coherent drive, evaluated exactly as
/// printed with gamma_ij = i Gamma + j gamma. Its Omega variable equals
/// sqrt(2) times the drive amplitude of H = rabi (sigma + sigma^dag); its
/// Delta is the physical detuning (unlike the incoherent form).
double closed_form_population_coherent(double rabi, double gamma, double Gamma, double Delta);

/// Same closed form evaluated for the drive Hamiltonian used here
/// (rabi -> sqrt(2) rabi, physical detuning).
double closed_form_population_coherent_physical(double rabi, double gamma, double Gamma,
                                                double delta);

/// g^(n)(0) of the frequency window via the vanishing-coupling sensor.
/// Re-checks stability at epsilon/10 and throws NumericsError when the two
/// estimates differ by more than 1e-3 relative.
double sensor_correlator(const models::SourceConfig& src, const models::SensorConfig& sen, int n);

/// Steady-state factorial moment <x^dag^n x^n>.
double factorial_moment(const DensityMatrix& rho, const Operator& x, int n);

/// Detector populations <xi^dag xi> across a frequency grid (lineshape as
/// seen through a width-Gamma window). Truncation chosen automatically.
std::vector<double> spectrum_scan(const models::SourceConfig& src, double Gamma,
                                  const std::vector<double>& omega_grid);

struct TruncationReport {
    bool pass = true;
    std::vector<double> top_occupancy; ///< one entry per detector
};

/// Occupancy of each detector's top Fock level; passes when all < 1e-6.
TruncationReport truncation_check(const models::CascadeConfig& cfg, const DensityMatrix& rho_ss);

/// Smallest truncation (starting from the configured n_max) whose top-level
/// occupancy falls below `occupancy`; throws past `limit`. The default
/// matches truncation_check; tighter thresholds serve the closed-form
/// comparisons.
models::CascadeConfig with_converged_truncation(models::CascadeConfig cfg, int limit = 40,
                                                double occupancy = 1e-6);

/// Steady detected population of a window: monitored click rate / Gamma,
/// i.e. chi_mon <xi^dag xi>. This is what the closed forms above describe
/// for the lossless splitting chi1 = 0, chi2 = 1/2.
double detected_population(const models::CascadeConfig& cfg, int detector_index,
                           const DensityMatrix& rho_ss);

} // namespace fres::mastereq
