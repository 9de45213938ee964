#pragma once

#include <string>
#include <vector>

#include "fres/mastereq.hpp"

namespace fres::reconstruct {

using mastereq::DensityMatrix;
using hilbert::Operator;

enum class MomentKind { Detector, Source };

/// Factorial moments <x^dag^n x^n>, n = 1..order().
struct MomentVector {
    std::vector<double> values;
    MomentKind kind = MomentKind::Detector;

    int order() const { return static_cast<int>(values.size()); }
    double at(int n) const { return values.at(static_cast<std::size_t>(n - 1)); }
};

enum class FitClass { Vacuum, Fock, Geometric, Cothermal, Other };

std::string to_string(FitClass cls);

struct FitResult {
    FitClass cls = FitClass::Other;
    double theta = 0.0;          ///< geometric parameter, when applicable
    double thermal_mean = 0.0;   ///< cothermal: mean of the thermal part
    double coherent_mean = 0.0;  ///< cothermal: mean of the uncorrelated part
    double thermal_weight = 0.0; ///< cothermal: thermal fraction of the flux
    double residual = 0.0;
    bool nongaussian = false;
    double nongaussian_margin = 0.0;
};

struct PhotonDistribution {
    std::vector<double> p; ///< p[0..N]
    double clamped_mass = 0.0; ///< negative probability clipped during inversion

    int max_n() const { return static_cast<int>(p.size()) - 1; }
};

/// Exact steady-state factorial moments of a detector mode. The detector
/// truncation must exceed the requested order.
MomentVector detector_moments(const DensityMatrix& rho_ss, const Operator& xi, int order);

/// Refer raw detector moments back to a lossless splitting (chi1 = 0,
/// chi2 = 1/2): divides moment n by (4 alpha)^n. Makes every downstream
/// quantity independent of the chi fractions.
MomentVector refer_to_ideal_detector(const MomentVector& raw, const models::CascadeConfig& cfg,
                                     int detector_index);

/// <s^dag^n s^n> = (Gamma/gamma)^n <xi^dag^n xi^n>: the effective source whose
/// emission rate gamma <s^dag s> equals the detected rate Gamma <xi^dag xi>.
MomentVector source_moments_from_detector(const MomentVector& detected, double Gamma,
                                          double gamma_sigma);

/// Invert <s^dag^n s^n> = sum_{k>=n} k!/(k-n)! p(k) by back-substitution from
/// k = N down; p(0) = 1 - sum p(k). Negative p beyond -1e-6 is an error,
/// smaller negatives are clamped and reported.
PhotonDistribution invert_moments(const MomentVector& source_moments, int max_n);

/// Forward map p(n) -> factorial moments, the test oracle's direction.
MomentVector moments_from_distribution(const std::vector<double>& p, int order);

/// Least-squares classification against vacuum / Fock |1> / geometric /
/// cothermal (superposed coherent and thermal flux); log-probability space
/// except for the Fock candidate. Also evaluates the non-Gaussian witness.
FitResult fit_distribution(const PhotonDistribution& dist);

/// p(1) above 3 sqrt(3) / (4 e) certifies a non-Gaussian state.
bool nongaussian_check(const PhotonDistribution& dist, double* margin = nullptr);

double nongaussian_threshold();

/// Photon-number distribution of superposed coherent (mean s) and thermal
/// (mean n) fields; reduces to Poisson at n -> 0 and geometric at s -> 0.
double cothermal_pn(int n, double thermal_mean, double coherent_mean);

/// Full pipeline: raw detector moments -> ideal-detector referral -> source
/// rescaling -> inversion. `max_n` defaults to detector n_max - 2.
PhotonDistribution effective_state(const models::CascadeConfig& cfg, int detector_index,
                                   const DensityMatrix& rho_ss, int max_n = -1);

/// The unfiltered reference: the emitter's own moments (sigma^2 = 0 makes the
/// distribution {1 - n, n} exactly).
PhotonDistribution emitter_state(const models::SourceConfig& src);

} // namespace fres::reconstruct
