#include "fres/models.hpp"

#include <cmath>

namespace fres::models {

using hilbert::Complex;
using hilbert::annihilation_boson;
using hilbert::annihilation_tls;
using hilbert::embed;
using hilbert::sop_amb;
using hilbert::sop_dissipator;
using hilbert::sop_hamiltonian;

double SourceConfig::pump() const {
    if (const auto* inc = std::get_if<IncoherentDrive>(&drive)) return inc->pump;
    return 0.0;
}

double CascadeConfig::alpha_of(int k) const {
    if (detectors.size() == 1) return alpha_single();
    return k == 0 ? alpha1() : alpha2();
}

double CascadeConfig::monitor_fraction(int k) const {
    if (detectors.size() == 1) return chi2;
    return k == 0 ? chi2 : chi3;
}

SpaceLayout CascadeConfig::layout() const {
    std::vector<int> dims{2};
    for (const auto& d : detectors) dims.push_back(d.n_max + 1);
    return SpaceLayout(dims);
}

void CascadeConfig::validate() const {
    if (source.gamma <= 0.0) throw ConfigError("CascadeConfig: gamma must be positive");
    if (source.pump() < 0.0) throw ConfigError("CascadeConfig: pump rate must be >= 0");
    if (const auto* coh = source.coherent())
        if (coh->rabi < 0.0) throw ConfigError("CascadeConfig: drive amplitude must be >= 0");
    if (detectors.size() > 2)
        throw ConfigError("CascadeConfig: at most two detectors are supported");
    for (const auto& d : detectors) {
        if (d.linewidth <= 0.0) throw ConfigError("CascadeConfig: detector linewidth must be positive");
        if (d.n_max < 1) throw ConfigError("CascadeConfig: detector truncation must be >= 1");
        if (!std::isfinite(d.omega)) throw ConfigError("CascadeConfig: detector frequency must be finite");
    }
    for (double chi : {chi0, chi1, chi2, chi3})
        if (chi < 0.0 || chi > 1.0) throw ConfigError("CascadeConfig: splitting fractions must lie in [0,1]");
    if (detectors.size() == 2 && chi0 + chi1 > 1.0 + 1e-12)
        throw ConfigError("CascadeConfig: chi0 + chi1 must not exceed 1");
    if (layout().dim() > 128)
        throw ConfigError("CascadeConfig: joint dimension exceeds the dense-solver budget");
}

Matrix source_hamiltonian(const SourceConfig& cfg) {
    const Operator sigma = annihilation_tls();
    const Matrix n = sigma.mat.adjoint() * sigma.mat;
    if (const auto* coh = cfg.coherent())
        return (cfg.omega + coh->detuning) * n + coh->rabi * (sigma.mat + sigma.mat.adjoint());
    return cfg.omega * n;
}

Superoperator build_source_liouvillian(const SourceConfig& cfg) {
    const Operator sigma = annihilation_tls();
    Matrix l = sop_hamiltonian(source_hamiltonian(cfg));
    l += cfg.gamma * sop_dissipator(sigma.mat);
    if (cfg.incoherent() && cfg.pump() > 0.0)
        l += cfg.pump() * sop_dissipator(sigma.mat.adjoint().eval());
    return {SpaceLayout({2}), std::move(l)};
}

Operator embedded_sigma(const CascadeConfig& cfg) {
    return embed(annihilation_tls(), 0, cfg.layout());
}

Operator embedded_xi(const CascadeConfig& cfg, int k) {
    if (k < 0 || k >= static_cast<int>(cfg.detectors.size()))
        throw ConfigError("embedded_xi: no such detector");
    return embed(annihilation_boson(cfg.detectors[k].n_max), k + 1, cfg.layout());
}

/// Free Hamiltonian of the full cascade layout (no coupling terms).
static Matrix free_hamiltonian(const CascadeConfig& cfg) {
    const SpaceLayout lay = cfg.layout();
    Matrix h = embed(Operator(SpaceLayout({2}), source_hamiltonian(cfg.source)), 0, lay).mat;
    for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
        const Matrix xi = embedded_xi(cfg, static_cast<int>(k)).mat;
        h += cfg.detectors[k].omega * (xi.adjoint() * xi);
    }
    return h;
}

Superoperator build_cascaded_liouvillian(const CascadeConfig& cfg) {
    cfg.validate();
    const SpaceLayout lay = cfg.layout();
    const int d = lay.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix sigma = embedded_sigma(cfg).mat;

    Matrix l = sop_hamiltonian(free_hamiltonian(cfg));
    l += cfg.source.gamma * sop_dissipator(sigma);
    if (cfg.source.incoherent() && cfg.source.pump() > 0.0)
        l += cfg.source.pump() * sop_dissipator(sigma.adjoint().eval());

    for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
        const Matrix xi = embedded_xi(cfg, static_cast<int>(k)).mat;
        l += cfg.detectors[k].linewidth * sop_dissipator(xi);
        const double g = std::sqrt(cfg.alpha_of(static_cast<int>(k)) * cfg.source.gamma *
                                   cfg.detectors[k].linewidth);
        if (g == 0.0) continue;
        // g { [sigma rho, xi^dag] + [xi, rho sigma^dag] }
        //   = g ( sigma rho xi^dag - xi^dag sigma rho + xi rho sigma^dag - rho sigma^dag xi )
        l += g * (sop_amb(sigma, xi.adjoint()) - sop_amb((xi.adjoint() * sigma).eval(), id) +
                  sop_amb(xi, sigma.adjoint()) - sop_amb(id, (sigma.adjoint() * xi).eval()));
    }
    return {lay, std::move(l)};
}

std::vector<CollapseChannel> collapse_operators(const CascadeConfig& cfg) {
    cfg.validate();
    const double gs = cfg.source.gamma;
    const Operator sigma = embedded_sigma(cfg);
    std::vector<CollapseChannel> out;

    if (cfg.detectors.empty()) {
        out.push_back({std::sqrt(gs) * Complex(1, 0) * sigma, ChannelKind::SourceLoss, -1, "source"});
        return out;
    }

    if (cfg.detectors.size() == 1) {
        const Operator xi = embedded_xi(cfg, 0);
        const double gx = cfg.detectors[0].linewidth;
        Operator joint = Complex(std::sqrt((1.0 - cfg.chi1) * gs), 0) * sigma +
                         Complex(std::sqrt((1.0 - cfg.chi2) * gx), 0) * xi;
        out.push_back({std::move(joint), ChannelKind::Joint, 0, "joint"});
        out.push_back({Complex(std::sqrt(cfg.chi1 * gs), 0) * sigma, ChannelKind::SourceLoss, -1, "source"});
        out.push_back({Complex(std::sqrt(cfg.chi2 * gx), 0) * xi, ChannelKind::Monitor, 0, "detector"});
        return out;
    }

    const Operator xi1 = embedded_xi(cfg, 0);
    const Operator xi2 = embedded_xi(cfg, 1);
    const double g1 = cfg.detectors[0].linewidth;
    const double g2 = cfg.detectors[1].linewidth;
    Operator c1 = Complex(std::sqrt(cfg.chi0 * gs), 0) * sigma +
                  Complex(std::sqrt((1.0 - cfg.chi2) * g1), 0) * xi1;
    Operator c2 = Complex(std::sqrt((1.0 - cfg.chi0 - cfg.chi1) * gs), 0) * sigma +
                  Complex(std::sqrt((1.0 - cfg.chi3) * g2), 0) * xi2;
    out.push_back({std::move(c1), ChannelKind::Joint, 0, "joint1"});
    out.push_back({std::move(c2), ChannelKind::Joint, 1, "joint2"});
    out.push_back({Complex(std::sqrt(cfg.chi1 * gs), 0) * sigma, ChannelKind::SourceLoss, -1, "source"});
    out.push_back({Complex(std::sqrt(cfg.chi2 * g1), 0) * xi1, ChannelKind::Monitor, 0, "detector1"});
    out.push_back({Complex(std::sqrt(cfg.chi3 * g2), 0) * xi2, ChannelKind::Monitor, 1, "detector2"});
    return out;
}

std::optional<CollapseChannel> pump_channel(const CascadeConfig& cfg) {
    if (!cfg.source.incoherent() || cfg.source.pump() <= 0.0) return std::nullopt;
    Operator up = Complex(std::sqrt(cfg.source.pump()), 0) * embedded_sigma(cfg).adjoint();
    return CollapseChannel{std::move(up), ChannelKind::Pump, -1, "pump"};
}

Operator coherent_hamiltonian(const CascadeConfig& cfg) {
    const SpaceLayout lay = cfg.layout();
    Matrix h = free_hamiltonian(cfg);
    const Matrix sigma = embedded_sigma(cfg).mat;
    for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
        const double g = std::sqrt(cfg.alpha_of(static_cast<int>(k)) * cfg.source.gamma *
                                   cfg.detectors[k].linewidth);
        if (g == 0.0) continue;
        const Matrix xi = embedded_xi(cfg, static_cast<int>(k)).mat;
        const Matrix cross = xi.adjoint() * sigma - sigma.adjoint() * xi; // anti-Hermitian
        h += Complex(0, -0.5) * g * cross;
    }
    return {lay, std::move(h)};
}

Superoperator build_cascaded_liouvillian_lindblad(const CascadeConfig& cfg) {
    const SpaceLayout lay = cfg.layout();
    Matrix l = sop_hamiltonian(coherent_hamiltonian(cfg).mat);
    for (const auto& ch : collapse_operators(cfg))
        l += sop_dissipator(ch.op.mat);
    if (auto pump = pump_channel(cfg))
        l += sop_dissipator(pump->op.mat);
    return {lay, std::move(l)};
}

Operator effective_hamiltonian(const CascadeConfig& cfg) {
    cfg.validate();
    const SpaceLayout lay = cfg.layout();
    Matrix h = free_hamiltonian(cfg);
    const Matrix sigma = embedded_sigma(cfg).mat;
    h += Complex(0, -0.5) * (cfg.source.gamma * (sigma.adjoint() * sigma)).eval();
    for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
        const Matrix xi = embedded_xi(cfg, static_cast<int>(k)).mat;
        const double g = std::sqrt(cfg.alpha_of(static_cast<int>(k)) * cfg.source.gamma *
                                   cfg.detectors[k].linewidth);
        // the coupling enters one-directionally: xi^dag sigma only
        h += Complex(0, -1) * g * (xi.adjoint() * sigma).eval();
        h += Complex(0, -0.5) * (cfg.detectors[k].linewidth * (xi.adjoint() * xi)).eval();
    }
    return {lay, std::move(h)};
}

Superoperator build_sensor_liouvillian(const SourceConfig& src, const SensorConfig& sen) {
    if (sen.epsilon < 0.0) throw ConfigError("SensorConfig: epsilon must be >= 0");
    if (sen.linewidth <= 0.0) throw ConfigError("SensorConfig: linewidth must be positive");
    if (sen.truncation < 1) throw ConfigError("SensorConfig: truncation must be >= 1");

    const SpaceLayout lay({2, sen.truncation + 1});
    const Matrix sigma = embed(annihilation_tls(), 0, lay).mat;
    const Matrix xi = embed(annihilation_boson(sen.truncation), 1, lay).mat;
    const Complex eps = std::polar(sen.epsilon, sen.theta);

    Matrix h = embed(Operator(SpaceLayout({2}), source_hamiltonian(src)), 0, lay).mat;
    h += sen.omega * (xi.adjoint() * xi).eval();
    h += eps * (sigma.adjoint() * xi).eval() + std::conj(eps) * (sigma * xi.adjoint()).eval();

    Matrix l = sop_hamiltonian(h);
    l += src.gamma * sop_dissipator(sigma);
    if (src.incoherent() && src.pump() > 0.0)
        l += src.pump() * sop_dissipator(sigma.adjoint().eval());
    l += sen.linewidth * sop_dissipator(xi);
    return {lay, std::move(l)};
}

LeapfrogLines leapfrog_frequencies(double rabi, double detuning) {
    if (rabi <= 0.0) throw ConfigError("leapfrog_frequencies: drive amplitude must be positive");
    const double op = std::sqrt(4.0 * rabi * rabi + detuning * detuning);
    return {op, {-op, 0.0, op}, {-0.5 * op, 0.0, 0.5 * op}};
}

} // namespace fres::models
