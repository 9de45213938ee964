#include "fres/mastereq.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace fres::mastereq {

using hilbert::Complex;
using hilbert::Vector;
using hilbert::matrix_exponential;
using hilbert::unvectorize;
using hilbert::vectorize;

void validate_density(const DensityMatrix& rho) {
    const Matrix& r = rho.rho;
    if (r.rows() != rho.layout.dim())
        throw ConfigError("DensityMatrix: dimension does not match layout");
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw NumericsError("DensityMatrix: not Hermitian to 1e-12");
    if (std::abs(r.trace() - Complex(1, 0)) > 1e-12)
        throw NumericsError("DensityMatrix: trace not 1 to 1e-12");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw NumericsError("DensityMatrix: negative eigenvalue beyond -1e-10");
}

namespace {

/// Null vector of L normalized to unit trace, via LU on L with one row
/// replaced by the trace constraint.
hilbert::Vector trace_normalized_null_vector(const Matrix& l, int d, int replaced_row) {
    const int n = d * d;
    Matrix a = l;
    a.row(replaced_row).setZero();
    for (int k = 0; k < d; ++k) a(replaced_row, k * d + k) = 1.0;
    hilbert::Vector b = hilbert::Vector::Zero(n);
    b(replaced_row) = 1.0;
    Eigen::PartialPivLU<Matrix> lu(a);
    return lu.solve(b);
}

} // namespace

DensityMatrix steady_state(const Superoperator& l) {
    const int d = l.hilbert_dim();
    const int n = d * d;

    // Uniqueness guard. Small systems get a rank certificate; for large ones
    // a full-pivot factorization is prohibitive, so solve with two different
    // replaced rows instead: a degenerate null space makes them disagree.
    if (n <= 1200) {
        Eigen::FullPivLU<Matrix> lu(l.mat);
        lu.setThreshold(1e-12);
        if (lu.rank() < n - 1)
            throw NumericsError("steady_state: Liouvillian null space is degenerate");
    }

    Vector x = trace_normalized_null_vector(l.mat, d, 0);
    if (n > 1200) {
        const Vector y = trace_normalized_null_vector(l.mat, d, n - 1);
        if ((x - y).norm() > 1e-8 * x.norm())
            throw NumericsError("steady_state: Liouvillian null space is degenerate");
    }

    Matrix rho = unvectorize(x, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();

    double residual = (l.mat * vectorize(rho)).norm();
    if (residual > 1e-10) {
        // fall back to least squares on [L; trace-row], robust to an unlucky
        // row replacement
        Matrix a(n + 1, n);
        a.topRows(n) = l.mat;
        a.row(n).setZero();
        for (int k = 0; k < d; ++k) a(n, k * d + k) = 1.0;
        Vector b = Vector::Zero(n + 1);
        b(n) = 1.0;
        rho = unvectorize(a.colPivHouseholderQr().solve(b), d);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        rho /= rho.trace();
        residual = (l.mat * vectorize(rho)).norm();
        if (residual > 1e-10)
            throw NumericsError("steady_state: residual " + std::to_string(residual) +
                                " exceeds 1e-10");
    }
    return {l.layout, std::move(rho)};
}

DensityMatrix propagate(const Superoperator& l, const DensityMatrix& rho0, double t) {
    if (t < 0.0) throw ConfigError("propagate: time must be >= 0");
    if (rho0.layout != l.layout) throw ConfigError("propagate: layout mismatch");
    if (t == 0.0) return rho0;
    const Matrix u = matrix_exponential((t * l.mat).eval());
    Matrix rho = unvectorize(u * vectorize(rho0.rho), l.hilbert_dim());
    return {l.layout, std::move(rho)};
}

namespace {

double population(const Matrix& number_op, const Matrix& rho) {
    return (number_op * rho).trace().real();
}

/// Exponential action e^{A} v by scaled Taylor summation; exact to machine
/// precision, avoids forming e^{A} when A is large.
Vector expm_action(const Matrix& a, Vector v) {
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    if (!std::isfinite(norm) || norm > 1e4)
        throw NumericsError("expm_action: generator norm out of range");
    const int scale = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(norm, 1e-300)))) + 1);
    const double inv = std::ldexp(1.0, -scale);
    for (long s = 0; s < (1L << scale); ++s) {
        Vector term = v;
        for (int k = 1; k <= 24; ++k) {
            term = (inv / static_cast<double>(k)) * (a * term).eval();
            v += term;
            if (term.norm() < 1e-16 * v.norm()) break;
        }
    }
    return v;
}

/// Walk v_{k+1} = e^{L dtau} v_k and record Tr[measure * unvec(v_k)].
/// Small systems use one dense exponential; large ones use Taylor action.
std::vector<double> regression_walk(const Superoperator& l, const Matrix& measure,
                                    const Matrix& seeded, double dtau, int points) {
    const int d = l.hilbert_dim();
    const bool dense = l.mat.rows() <= 700;
    Matrix step;
    if (dense) step = matrix_exponential((dtau * l.mat).eval());
    const Matrix l_dtau = dense ? Matrix() : (dtau * l.mat).eval();
    Vector v = vectorize(seeded);
    std::vector<double> out;
    out.reserve(points);
    for (int k = 0; k < points; ++k) {
        out.push_back((measure * unvectorize(v, d)).trace().real());
        if (k + 1 < points) v = dense ? (step * v).eval() : expm_action(l_dtau, v);
    }
    return out;
}

} // namespace

CorrelationCurve g2_regression(const Superoperator& l, const Operator& xi,
                               const DensityMatrix& rho_ss, double tau_max, int points) {
    if (points < 2) throw ConfigError("g2_regression: need at least two grid points");
    if (tau_max <= 0.0) throw ConfigError("g2_regression: tau_max must be positive");
    const Matrix number = xi.mat.adjoint() * xi.mat;
    const double n = population(number, rho_ss.rho);
    if (n <= 0.0)
        throw NumericsError("g2_regression: window population vanishes, correlation undefined");

    const double dtau = tau_max / (points - 1);
    const Matrix seeded = xi.mat * rho_ss.rho * xi.mat.adjoint();
    const std::vector<double> raw = regression_walk(l, number, seeded, dtau, points);

    CorrelationCurve curve;
    curve.tau.resize(points);
    curve.g2.resize(points);
    for (int k = 0; k < points; ++k) {
        curve.tau[k] = k * dtau;
        curve.g2[k] = raw[k] / (n * n);
    }
    return curve;
}

CorrelationCurve cross_g2_regression(const Superoperator& l, const Operator& xi1,
                                     const Operator& xi2, const DensityMatrix& rho_ss,
                                     double tau_max, int points) {
    if (points < 2) throw ConfigError("cross_g2_regression: need at least two grid points");
    const Matrix n1_op = xi1.mat.adjoint() * xi1.mat;
    const Matrix n2_op = xi2.mat.adjoint() * xi2.mat;
    const double n1 = population(n1_op, rho_ss.rho);
    const double n2 = population(n2_op, rho_ss.rho);
    if (n1 <= 0.0 || n2 <= 0.0)
        throw NumericsError("cross_g2_regression: a window population vanishes");

    const double dtau = tau_max / (points - 1);
    // tau > 0: collapse on xi1 first, measure xi2 later. tau < 0: swap roles.
    const std::vector<double> fwd = regression_walk(
        l, n2_op, (xi1.mat * rho_ss.rho * xi1.mat.adjoint()).eval(), dtau, points);
    const std::vector<double> bwd = regression_walk(
        l, n1_op, (xi2.mat * rho_ss.rho * xi2.mat.adjoint()).eval(), dtau, points);

    CorrelationCurve curve;
    curve.tau.resize(2 * points - 1);
    curve.g2.resize(2 * points - 1);
    const double norm = n1 * n2;
    for (int k = 0; k < points; ++k) {
        curve.tau[points - 1 - k] = -k * dtau;
        curve.g2[points - 1 - k] = bwd[k] / norm;
        curve.tau[points - 1 + k] = k * dtau;
        curve.g2[points - 1 + k] = fwd[k] / norm;
    }
    return curve;
}

double closed_form_g2_incoherent(double tau, double gamma, double pump) {
    if (gamma + pump <= 0.0) throw ConfigError("closed_form_g2_incoherent: gamma + pump must be > 0");
    if (tau < 0.0) throw ConfigError("closed_form_g2_incoherent: tau must be >= 0");
    return 1.0 - std::exp(-(gamma + pump) * tau);
}

double closed_form_population_incoherent(double pump, double gamma, double Gamma, double Delta) {
    if (pump < 0.0 || gamma <= 0.0 || Gamma <= 0.0)
        throw ConfigError("closed_form_population_incoherent: rates out of range");
    const double lam = pump + Gamma + gamma;
    return pump * lam / ((pump + gamma) * (lam * lam + Delta * Delta));
}

double closed_form_population_incoherent_physical(double pump, double gamma, double Gamma,
                                                  double delta) {
    return closed_form_population_incoherent(pump, gamma, Gamma, 2.0 * delta);
}

double closed_form_population_coherent(double rabi, double gamma, double Gamma, double Delta) {
    if (rabi < 0.0 || gamma <= 0.0 || Gamma <= 0.0)
        throw ConfigError("closed_form_population_coherent: rates out of range");
    auto gij = [&](int i, int j) { return i * Gamma + j * gamma; };
    const double g01 = gij(0, 1), g10 = gij(1, 0), g11 = gij(1, 1), g12 = gij(1, 2),
                 g32 = gij(3, 2);
    const double W2 = rabi * rabi, D2 = Delta * Delta;

    const double numerator =
        2.0 * g01 * W2 *
        (g10 * std::pow(g11 * g11 + 4.0 * D2, 2) * (g12 * g12 + 4.0 * D2) +
         4.0 * W2 *
             (g10 * g11 * g11 * g12 * g32 +
              4.0 *
                  (2.0 * std::pow(g10, 3) + 16.0 * g10 * g10 * g01 + 23.0 * g10 * g01 * g01 +
                   8.0 * std::pow(g01, 3)) *
                  D2 -
              16.0 * (g10 - 2.0 * g01) * D2 * D2) +
         32.0 * g11 * (g10 * g10 + 4.0 * D2) * W2 * W2);

    const double brace =
        std::pow(g10, 4) + 6.0 * std::pow(g10, 3) * g01 +
        12.0 * g10 * g01 * (g01 * g01 + 2.0 * D2 + 4.0 * W2) +
        g10 * g10 * (13.0 * g01 * g01 + 8.0 * (D2 + 2.0 * W2)) +
        4.0 * (std::pow(g01, 4) + 4.0 * std::pow(D2 - 2.0 * W2, 2) +
               g01 * g01 * (5.0 * D2 + 8.0 * W2));

    const double denominator =
        (g10 * g10 + 4.0 * D2) * (g11 * g11 + 4.0 * D2) * (g01 * g01 + 4.0 * W2) * brace;
    return numerator / denominator;
}

double closed_form_population_coherent_physical(double rabi, double gamma, double Gamma,
                                                double delta) {
    return closed_form_population_coherent(std::sqrt(2.0) * rabi, gamma, Gamma, delta);
}

double factorial_moment(const DensityMatrix& rho, const Operator& x, int n) {
    if (n < 1) throw ConfigError("factorial_moment: order must be >= 1");
    Matrix xn = Matrix::Identity(x.dim(), x.dim());
    for (int k = 0; k < n; ++k) xn = (xn * x.mat).eval();
    return (xn.adjoint() * xn * rho.rho).trace().real();
}

namespace {

/// Sensor correlator evaluated in the epsilon-rescaled basis. Sensor blocks of
/// the steady state scale as eps^(n+m); the similarity transform
/// rho~ = S rho S with S = diag(|eps|^-n) makes every block O(1), so the
/// linear solve stays well conditioned down to vanishing coupling. Each
/// superoperator term A rho B maps to (S A S^-1) rho~ (S^-1 B S), and the
/// exact eps powers are reapplied analytically when summing the moments.
double sensor_g_n(const models::SourceConfig& src, models::SensorConfig sen, int n) {
    sen.truncation = std::max(sen.truncation, n);
    const int levels = sen.truncation + 1;
    const SpaceLayout lay({2, levels});
    const int d = lay.dim();
    const hilbert::Complex eps = std::polar(sen.epsilon, sen.theta);
    const double mag = sen.epsilon;

    const Matrix sigma = hilbert::embed(hilbert::annihilation_tls(), 0, lay).mat;
    const Matrix xi = hilbert::embed(hilbert::annihilation_boson(sen.truncation), 1, lay).mat;
    const Matrix n_xi = xi.adjoint() * xi;
    const Matrix id = Matrix::Identity(d, d);

    // S xi S^-1 = |eps| xi and S xi^dag S^-1 = xi^dag / |eps|
    Matrix h0 = hilbert::embed(hilbert::Operator(SpaceLayout({2}),
                                                 models::source_hamiltonian(src)),
                               0, lay)
                    .mat;
    h0 += (sen.omega * n_xi).eval();

    const Matrix coupling = (sigma.adjoint() * xi).eval();           // sigma^dag xi
    const Matrix coupling_dag = (sigma * xi.adjoint()).eval();       // sigma xi^dag
    const Matrix h_left = (eps * mag) * coupling + (std::conj(eps) / mag) * coupling_dag;
    const Matrix h_right = (eps / mag) * coupling + (std::conj(eps) * mag) * coupling_dag;

    Matrix gen = hilbert::sop_hamiltonian(h0);
    // i[rho, H_int] with side-dependent images of the scaled coupling
    gen += hilbert::Complex(0, 1) *
           (hilbert::sop_amb(id, h_right) - hilbert::sop_amb(h_left, id));
    gen += src.gamma * hilbert::sop_dissipator(sigma);
    if (src.incoherent() && src.pump() > 0.0)
        gen += src.pump() * hilbert::sop_dissipator(sigma.adjoint().eval());
    // sensor decay: sandwich scaled by |eps|^2, anticommutator invariant
    gen += sen.linewidth * (mag * mag * hilbert::sop_amb(xi, xi.adjoint()) -
                            0.5 * (hilbert::sop_amb(n_xi, id) + hilbert::sop_amb(id, n_xi)));

    const DensityMatrix scaled = steady_state({lay, std::move(gen)});

    // level sums t_k = Tr_tls rho~_(k,k); physical weights carry |eps|^(2k)
    std::vector<double> level(static_cast<std::size_t>(levels), 0.0);
    for (int k = 0; k < levels; ++k)
        for (int s = 0; s < 2; ++s)
            level[static_cast<std::size_t>(k)] += scaled.rho(s * levels + k, s * levels + k).real();

    auto weighted = [&](int order) {
        double sum = 0.0;
        for (int k = order; k < levels; ++k) {
            double w = 1.0;
            for (int j = 0; j < order; ++j) w *= static_cast<double>(k - j);
            sum += w * std::pow(mag, 2 * k) * level[static_cast<std::size_t>(k)];
        }
        return sum;
    };
    const double trace = weighted(0);
    const double m1 = weighted(1) / trace;
    if (m1 <= 0.0) throw NumericsError("sensor_correlator: sensor population vanishes");
    return (weighted(n) / trace) / std::pow(m1, n);
}

} // namespace

double sensor_correlator(const models::SourceConfig& src, const models::SensorConfig& sen, int n) {
    if (n < 1) throw ConfigError("sensor_correlator: order must be >= 1");
    const double g_eps = sensor_g_n(src, sen, n);
    models::SensorConfig tighter = sen;
    tighter.epsilon = sen.epsilon / 10.0;
    const double g_check = sensor_g_n(src, tighter, n);
    if (std::abs(g_eps - g_check) > 1e-3 * std::abs(g_check))
        throw NumericsError("sensor_correlator: result not converged in epsilon; "
                            "reduce the sensor coupling");
    return g_eps;
}

std::vector<double> spectrum_scan(const models::SourceConfig& src, double Gamma,
                                  const std::vector<double>& omega_grid) {
    std::vector<double> out;
    out.reserve(omega_grid.size());
    for (double w : omega_grid) {
        models::CascadeConfig cfg;
        cfg.source = src;
        cfg.detectors = {models::DetectorConfig{w, Gamma, 2}};
        cfg.chi1 = 0.0;
        cfg.chi2 = 0.5;
        cfg = with_converged_truncation(cfg);
        const auto l = models::build_cascaded_liouvillian(cfg);
        const DensityMatrix rho = steady_state(l);
        out.push_back(factorial_moment(rho, models::embedded_xi(cfg, 0), 1));
    }
    return out;
}

TruncationReport truncation_check(const models::CascadeConfig& cfg, const DensityMatrix& rho_ss) {
    TruncationReport report;
    const SpaceLayout lay = cfg.layout();
    for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
        const int nd = cfg.detectors[k].n_max + 1;
        Matrix proj = Matrix::Zero(nd, nd);
        proj(nd - 1, nd - 1) = 1.0;
        const Operator top = hilbert::embed(Operator(SpaceLayout({nd}), proj),
                                            static_cast<int>(k) + 1, lay);
        const double occ = (top.mat * rho_ss.rho).trace().real();
        report.top_occupancy.push_back(occ);
        if (occ >= 1e-6) report.pass = false;
    }
    return report;
}

models::CascadeConfig with_converged_truncation(models::CascadeConfig cfg, int limit,
                                                double occupancy) {
    cfg.validate();
    for (;;) {
        const auto l = models::build_cascaded_liouvillian(cfg);
        const DensityMatrix rho = steady_state(l);
        const TruncationReport rep = truncation_check(cfg, rho);
        bool grew = false;
        for (std::size_t k = 0; k < cfg.detectors.size(); ++k) {
            if (rep.top_occupancy[k] >= occupancy) {
                if (cfg.detectors[k].n_max + 1 > limit)
                    throw NumericsError("with_converged_truncation: truncation limit reached");
                cfg.detectors[k].n_max += 1;
                grew = true;
            }
        }
        if (!grew) return cfg;
    }
}

double detected_population(const models::CascadeConfig& cfg, int detector_index,
                           const DensityMatrix& rho_ss) {
    const double n_xi = factorial_moment(rho_ss, models::embedded_xi(cfg, detector_index), 1);
    return cfg.monitor_fraction(detector_index) * n_xi;
}

} // namespace fres::mastereq
