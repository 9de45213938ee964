#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fres/hilbert.hpp"

namespace fres::models {

using hilbert::Matrix;
using hilbert::Operator;
using hilbert::SpaceLayout;
using hilbert::Superoperator;

/// Incoherent pumping at rate `pump` (units of the emitter decay rate).
struct IncoherentDrive {
    double pump = 0.0;
};

/// Coherent drive in the frame rotating at the laser:
///   H = detuning * sigma^dag sigma + rabi * (sigma + sigma^dag),
/// `detuning` = emitter - laser. The Mollow sidebands sit at
/// +- sqrt((2 rabi)^2 + detuning^2) from the laser.
struct CoherentDrive {
    double rabi = 0.0;
    double detuning = 0.0;
};

using Drive = std::variant<IncoherentDrive, CoherentDrive>;

struct SourceConfig {
    double gamma = 1.0; ///< emitter decay rate; the unit of every other rate
    double omega = 0.0; ///< emitter frequency, zero in the working frame
    Drive drive = IncoherentDrive{};

    bool incoherent() const { return std::holds_alternative<IncoherentDrive>(drive); }
    double pump() const;
    const CoherentDrive* coherent() const { return std::get_if<CoherentDrive>(&drive); }
};

/// One Lorentzian detection window, modelled as a cascaded bosonic mode.
/// `omega` is measured from the drive reference: the emitter for incoherent
/// pumping, the laser for coherent driving (identical at resonance).
struct DetectorConfig {
    double omega = 0.0;
    double linewidth = 1.0; ///< full width Gamma of the window
    int n_max = 3;          ///< bosonic truncation
};

/// Vanishing-coupling probe for exact normalized correlators.
struct SensorConfig {
    double epsilon = 1e-3;
    double theta = 0.0;
    double omega = 0.0;
    double linewidth = 1.0;
    int truncation = 2; ///< sensor levels above vacuum; >= n for g^(n)
};

/// Full cascaded system: source plus one or two detectors with splitting
/// fractions. Single detector uses chi1 (source loss channel) and chi2
/// (monitored detector channel); two detectors add chi0 (source fraction
/// routed to detector 1) and chi3 (monitored channel of detector 2).
struct CascadeConfig {
    SourceConfig source;
    std::vector<DetectorConfig> detectors;
    double chi0 = 0.0;
    double chi1 = 0.0;
    double chi2 = 0.5;
    double chi3 = 0.5;

    /// Single-detector coupling fraction alpha = (1-chi1)(1-chi2).
    double alpha_single() const { return (1.0 - chi1) * (1.0 - chi2); }
    /// Two-detector coupling fractions, consistent with the collapse set:
    /// alpha1 = chi0 (1-chi2), alpha2 = (1-chi0-chi1)(1-chi3).
    double alpha1() const { return chi0 * (1.0 - chi2); }
    double alpha2() const { return (1.0 - chi0 - chi1) * (1.0 - chi3); }
    /// Coupling fraction feeding detector k in either configuration.
    double alpha_of(int detector_index) const;
    /// Monitored-channel fraction of detector k (chi2 or chi3).
    double monitor_fraction(int detector_index) const;

    SpaceLayout layout() const;
    void validate() const;
};

enum class ChannelKind { Joint, SourceLoss, Monitor, Pump };

struct CollapseChannel {
    Operator op;
    ChannelKind kind;
    int detector = -1; ///< detector index for Joint/Monitor channels
    std::string label;
};

/// Liouvillian of the bare source (dim 4 superoperator).
Superoperator build_source_liouvillian(const SourceConfig& cfg);

/// Cascaded master equation, assembled in the asymmetric-coupling form:
/// one-directional terms sqrt(alpha_k gamma Gamma_k) {[sigma rho, xi_k^dag] + [xi_k, rho sigma^dag]}.
Superoperator build_cascaded_liouvillian(const CascadeConfig& cfg);

/// Same generator assembled as a sum of Lindblad dissipators over the
/// collapse set plus the cascade commutator term. Agrees with
/// build_cascaded_liouvillian to machine precision.
Superoperator build_cascaded_liouvillian_lindblad(const CascadeConfig& cfg);

/// Source + sensor Liouvillian, Hamiltonian coupling eps sigma^dag xi + h.c.
Superoperator build_sensor_liouvillian(const SourceConfig& src, const SensorConfig& sen);

/// Collapse operators of the cascaded decay channels: three for one detector,
/// five for two, with channel labels. The incoherent-pump channel is not part
/// of this set; see pump_channel().
std::vector<CollapseChannel> collapse_operators(const CascadeConfig& cfg);

/// Absorption channel sqrt(P) sigma^dag for incoherent pumping, if any.
std::optional<CollapseChannel> pump_channel(const CascadeConfig& cfg);

/// Non-Hermitian Hamiltonian of the cascaded decay channels,
/// H - i sum_k sqrt(alpha_k gamma Gamma_k) xi_k^dag sigma - (i/2)(gamma n_sigma + sum Gamma_k n_k).
/// The pump channel, when present, contributes a further -(i/2) P sigma sigma^dag
/// which jump propagators add on top of this operator.
Operator effective_hamiltonian(const CascadeConfig& cfg);

/// Hermitian part of the cascade Hamiltonian: free evolution plus the
/// one-directional coupling -(i/2) sum_k sqrt(alpha_k gamma Gamma_k)(xi_k^dag sigma - sigma^dag xi_k).
Operator coherent_hamiltonian(const CascadeConfig& cfg);

struct LeapfrogLines {
    double omega_plus;                       ///< sideband splitting
    std::array<double, 3> two_photon_sums;   ///< omega1 + omega2 = {-omega_plus, 0, +omega_plus}
    std::array<double, 3> degenerate_windows;///< equal-frequency windows {-omega_plus/2, 0, +omega_plus/2}
};

/// Two-photon lines of the driven emitter, omega_plus = sqrt((2 Omega)^2 + Delta_L^2).
LeapfrogLines leapfrog_frequencies(double rabi, double detuning);

// Helpers shared with the rest of the library -------------------------------

/// Emitter lowering operator embedded in the cascade layout.
Operator embedded_sigma(const CascadeConfig& cfg);
/// Detector lowering operator embedded in the cascade layout.
Operator embedded_xi(const CascadeConfig& cfg, int detector_index);
/// Hamiltonian of the source alone on its 2-dimensional space.
Matrix source_hamiltonian(const SourceConfig& cfg);

} // namespace fres::models
