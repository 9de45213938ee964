#include "fres/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fres::reconstruct {

std::string to_string(FitClass cls) {
    switch (cls) {
        case FitClass::Vacuum: return "vacuum";
        case FitClass::Fock: return "fock";
        case FitClass::Geometric: return "geometric";
        case FitClass::Cothermal: return "cothermal";
        case FitClass::Other: return "other";
    }
    return "other";
}

MomentVector detector_moments(const DensityMatrix& rho_ss, const Operator& xi, int order) {
    if (order < 1) throw ConfigError("detector_moments: order must be >= 1");
    MomentVector m;
    m.kind = MomentKind::Detector;
    for (int n = 1; n <= order; ++n)
        m.values.push_back(std::max(0.0, mastereq::factorial_moment(rho_ss, xi, n)));
    return m;
}

MomentVector refer_to_ideal_detector(const MomentVector& raw, const models::CascadeConfig& cfg,
                                     int detector_index) {
    const double alpha = cfg.alpha_of(detector_index);
    if (alpha <= 0.0)
        throw ConfigError("refer_to_ideal_detector: detector is decoupled (alpha = 0)");
    MomentVector out = raw;
    double factor = 1.0; // becomes (4 alpha)^-n for moment n
    for (auto& v : out.values) {
        factor /= 4.0 * alpha;
        v *= factor;
    }
    return out;
}

MomentVector source_moments_from_detector(const MomentVector& detected, double Gamma,
                                          double gamma_sigma) {
    if (Gamma <= 0.0 || gamma_sigma <= 0.0)
        throw ConfigError("source_moments_from_detector: rates must be positive");
    MomentVector out;
    out.kind = MomentKind::Source;
    double factor = 1.0;
    for (double v : detected.values) {
        factor *= Gamma / gamma_sigma;
        out.values.push_back(factor * v);
    }
    return out;
}

PhotonDistribution invert_moments(const MomentVector& source_moments, int max_n) {
    if (max_n < 1) throw ConfigError("invert_moments: max_n must be >= 1");
    if (source_moments.order() < max_n)
        throw ConfigError("invert_moments: not enough moments for requested max_n");

    // factorial-moment relation: m_n = sum_{k=n}^{N} k!/(k-n)! p(k)
    std::vector<double> p(static_cast<std::size_t>(max_n) + 1, 0.0);
    for (int n = max_n; n >= 1; --n) {
        double tail = 0.0;
        for (int k = n + 1; k <= max_n; ++k) {
            double w = 1.0; // k!/(k-n)!
            for (int j = 0; j < n; ++j) w *= static_cast<double>(k - j);
            tail += w * p[static_cast<std::size_t>(k)];
        }
        double fact_n = 1.0;
        for (int j = 2; j <= n; ++j) fact_n *= j;
        p[static_cast<std::size_t>(n)] = (source_moments.at(n) - tail) / fact_n;
    }
    double occupied = 0.0;
    for (int k = 1; k <= max_n; ++k) occupied += p[static_cast<std::size_t>(k)];
    p[0] = 1.0 - occupied;

    PhotonDistribution dist;
    for (double& v : p) {
        if (v < -1e-6)
            throw NumericsError("invert_moments: inconsistent moments, p(n) = " +
                                std::to_string(v));
        if (v < 0.0) {
            dist.clamped_mass += -v;
            v = 0.0;
        }
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    if (sum <= 0.0) throw NumericsError("invert_moments: distribution vanished");
    for (double& v : p) v /= sum;
    dist.p = std::move(p);
    return dist;
}

MomentVector moments_from_distribution(const std::vector<double>& p, int order) {
    MomentVector m;
    m.kind = MomentKind::Source;
    for (int n = 1; n <= order; ++n) {
        double sum = 0.0;
        for (int k = n; k < static_cast<int>(p.size()); ++k) {
            double w = 1.0;
            for (int j = 0; j < n; ++j) w *= static_cast<double>(k - j);
            sum += w * p[static_cast<std::size_t>(k)];
        }
        m.values.push_back(sum);
    }
    return m;
}

double nongaussian_threshold() { return 3.0 * std::sqrt(3.0) / (4.0 * std::exp(1.0)); }

bool nongaussian_check(const PhotonDistribution& dist, double* margin) {
    const double p1 = dist.p.size() > 1 ? dist.p[1] : 0.0;
    const double m = p1 - nongaussian_threshold();
    if (margin) *margin = m;
    return m > 0.0;
}

namespace {

double laguerre(int n, double x) {
    if (n == 0) return 1.0;
    double lm1 = 1.0, l = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        const double lp1 = ((2.0 * k + 1.0 - x) * l - k * lm1) / (k + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

} // namespace

double cothermal_pn(int n, double thermal_mean, double coherent_mean) {
    const double nt = std::max(thermal_mean, 0.0);
    const double s = std::max(coherent_mean, 0.0);
    if (nt < 1e-12) { // Poisson limit
        double log_p = -s + n * std::log(std::max(s, 1e-300));
        for (int k = 2; k <= n; ++k) log_p -= std::log(static_cast<double>(k));
        return n == 0 && s == 0.0 ? 1.0 : std::exp(log_p);
    }
    const double ratio = nt / (1.0 + nt);
    const double pref = std::pow(ratio, n) / (1.0 + nt) * std::exp(-s / (1.0 + nt));
    return pref * laguerre(n, -s / (nt * (1.0 + nt)));
}

namespace {

double log_residual(const std::vector<double>& p, const std::vector<double>& q) {
    // least squares in log-probability space over the supported entries
    double r = 0.0;
    int used = 0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (p[n] < 1e-14) continue;
        const double qn = std::max(q[n], 1e-300);
        const double d = std::log(p[n]) - std::log(qn);
        r += d * d;
        ++used;
    }
    return used > 0 ? r / used : 0.0;
}

std::vector<double> cothermal_vector(std::size_t size, double nt, double s) {
    std::vector<double> q(size);
    for (std::size_t n = 0; n < size; ++n)
        q[n] = cothermal_pn(static_cast<int>(n), nt, s);
    return q;
}

/// Nelder-Mead on the 2-parameter cothermal residual, log-parameterised.
std::pair<double, double> fit_cothermal(const std::vector<double>& p, double mean) {
    auto objective = [&](double lnt, double ls) {
        return log_residual(p, cothermal_vector(p.size(), std::exp(lnt), std::exp(ls)));
    };
    struct Pt {
        double x, y, f;
    };
    const double guess = std::log(std::max(mean, 1e-6));
    std::vector<Pt> simplex = {{guess, guess - 1.0, 0.0},
                               {guess + 0.7, guess - 1.0, 0.0},
                               {guess, guess + 0.3, 0.0}};
    for (auto& v : simplex) v.f = objective(v.x, v.y);
    for (int it = 0; it < 300; ++it) {
        std::sort(simplex.begin(), simplex.end(), [](const Pt& a, const Pt& b) { return a.f < b.f; });
        if (std::abs(simplex[2].f - simplex[0].f) < 1e-14) break;
        const double cx = 0.5 * (simplex[0].x + simplex[1].x);
        const double cy = 0.5 * (simplex[0].y + simplex[1].y);
        Pt refl{cx + (cx - simplex[2].x), cy + (cy - simplex[2].y), 0.0};
        refl.f = objective(refl.x, refl.y);
        if (refl.f < simplex[0].f) {
            Pt expd{cx + 2.0 * (cx - simplex[2].x), cy + 2.0 * (cy - simplex[2].y), 0.0};
            expd.f = objective(expd.x, expd.y);
            simplex[2] = expd.f < refl.f ? expd : refl;
        } else if (refl.f < simplex[1].f) {
            simplex[2] = refl;
        } else {
            Pt cont{cx + 0.5 * (simplex[2].x - cx), cy + 0.5 * (simplex[2].y - cy), 0.0};
            cont.f = objective(cont.x, cont.y);
            if (cont.f < simplex[2].f) {
                simplex[2] = cont;
            } else {
                for (int k = 1; k < 3; ++k) {
                    simplex[k].x = 0.5 * (simplex[k].x + simplex[0].x);
                    simplex[k].y = 0.5 * (simplex[k].y + simplex[0].y);
                    simplex[k].f = objective(simplex[k].x, simplex[k].y);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), [](const Pt& a, const Pt& b) { return a.f < b.f; });
    return {std::exp(simplex[0].x), std::exp(simplex[0].y)};
}

} // namespace

FitResult fit_distribution(const PhotonDistribution& dist) {
    if (dist.p.empty()) throw ConfigError("fit_distribution: empty distribution");
    const std::vector<double>& p = dist.p;
    FitResult fit;
    fit.nongaussian = nongaussian_check(dist, &fit.nongaussian_margin);

    double mean = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) mean += static_cast<double>(n) * p[n];

    if (p[0] > 1.0 - 1e-9) {
        fit.cls = FitClass::Vacuum;
        return fit;
    }

    // Fock |1>: scored in linear space (zeros break the log residual)
    double fock_res = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double target = n == 1 ? 1.0 : 0.0;
        fock_res += (p[n] - target) * (p[n] - target);
    }
    fock_res /= static_cast<double>(p.size());

    // geometric: exact linear regression of log p(n) on n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (p[n] < 1e-14) continue;
        const double x = static_cast<double>(n), y = std::log(p[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    double geo_res = std::numeric_limits<double>::infinity();
    double theta = 0.0;
    if (pts >= 2 && sxx * pts - sx * sx > 0) {
        const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
        theta = std::min(std::exp(slope), 0.999999);
        std::vector<double> q(p.size());
        for (std::size_t n = 0; n < p.size(); ++n)
            q[n] = (1.0 - theta) * std::pow(theta, static_cast<double>(n));
        geo_res = log_residual(p, q);
    }

    auto [nt, s] = fit_cothermal(p, mean);
    const double co_res = log_residual(p, cothermal_vector(p.size(), nt, s));

    if (fock_res < 1e-3 && p.size() > 1 && p[1] > 0.5) {
        fit.cls = FitClass::Fock;
        fit.residual = fock_res;
        return fit;
    }
    fit.theta = theta;
    fit.thermal_mean = nt;
    fit.coherent_mean = s;
    fit.thermal_weight = nt + s > 0.0 ? nt / (nt + s) : 0.0;
    // parsimony: the one-parameter family wins whenever it fits well on its
    // own (the mixture contains it), and a mean squared log misfit beyond
    // 0.02 per supported level fits neither family
    if (geo_res < 1e-2 || geo_res <= 1.5 * co_res + 1e-12) {
        fit.cls = geo_res < 0.02 ? FitClass::Geometric : FitClass::Other;
        fit.residual = geo_res;
    } else {
        fit.cls = co_res < 0.02 ? FitClass::Cothermal : FitClass::Other;
        fit.residual = co_res;
    }
    return fit;
}

PhotonDistribution effective_state(const models::CascadeConfig& cfg, int detector_index,
                                   const DensityMatrix& rho_ss, int max_n) {
    if (detector_index < 0 || detector_index >= static_cast<int>(cfg.detectors.size()))
        throw ConfigError("effective_state: no such detector");
    const models::DetectorConfig& det = cfg.detectors[static_cast<std::size_t>(detector_index)];
    if (max_n < 1) max_n = std::max(1, det.n_max - 2); // two guard levels
    if (max_n > det.n_max)
        throw ConfigError("effective_state: max_n exceeds the detector truncation");

    const Operator xi = models::embedded_xi(cfg, detector_index);
    const MomentVector raw = detector_moments(rho_ss, xi, max_n);
    const MomentVector ideal = refer_to_ideal_detector(raw, cfg, detector_index);
    const MomentVector src =
        source_moments_from_detector(ideal, det.linewidth, cfg.source.gamma);
    return invert_moments(src, max_n);
}

PhotonDistribution emitter_state(const models::SourceConfig& src) {
    const auto l = models::build_source_liouvillian(src);
    const DensityMatrix rho = mastereq::steady_state(l);
    const double n = rho.rho(1, 1).real();
    PhotonDistribution dist;
    dist.p = {1.0 - n, n};
    return dist;
}

} // namespace fres::reconstruct
