#include "stfsim/precoder.hpp"

#include <cmath>
#include <stdexcept>

namespace stfsim {

namespace {

void require_psd(const Eigen::MatrixXcd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    const double floor = -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < floor) {
        throw std::invalid_argument(std::string(what) + " must be positive semi-definite");
    }
}

Eigen::MatrixXcd psd_root(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double hermitian_det(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    double det = 1.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) det *= es.eigenvalues()(i);
    return det;
}

}  // namespace

EigenSpectrum spectrum_of(const CorrelationModel& model, int m) {
    if (m < 1 || m > model.n_tx) throw std::invalid_argument("stream count out of range");
    const EigenSystem es = sorted_eig(model.r0);
    EigenSpectrum s;
    s.values = es.values.head(m).cwiseMax(0.0);
    s.basis = es.vectors.leftCols(m);
    return s;
}

CodewordDistance ostbc_distance(double mu0, int m) {
    if (mu0 <= 0.0) throw std::invalid_argument("mu0 must be > 0");
    CodewordDistance d;
    d.a0 = mu0 * Eigen::MatrixXcd::Identity(m, m);
    d.mu0 = mu0;
    d.v_a = Eigen::MatrixXcd::Identity(m, m);
    d.d_a = Eigen::VectorXd::Constant(m, mu0);
    return d;
}

EffectiveSinr effective_sinr(double rho, int n_v, double noise_var, double mui_var, int l_taps) {
    if (rho < 0.0 || noise_var < 0.0 || mui_var < 0.0)
        throw std::invalid_argument("powers must be non-negative");
    const double denom = 4.0 * (n_v * noise_var + mui_var);
    if (denom <= 0.0) throw std::invalid_argument("noise plus MUI power must be positive");
    EffectiveSinr s;
    s.eta = rho / denom;
    s.gamma = s.eta * l_taps * n_v;
    return s;
}

double pep_bound(const Precoder& prec, const CodewordDistance& dist,
                 const CorrelationModel& model, const EffectiveSinr& sinr, int n_v) {
    require_psd(dist.a0, "A0");
    require_psd(model.r0, "R0");
    const double scale = sinr.eta * static_cast<double>(model.tap_count) * n_v;
    // det(I_Nt + s F A0 F^H R0) = det(I_M + s A0^{1/2} F^H R0 F A0^{1/2})
    const Eigen::MatrixXcd f = prec.matrix();
    const Eigen::MatrixXcd a_half = psd_root(dist.a0);
    const Eigen::MatrixXcd core = a_half * f.adjoint() * model.r0 * f * a_half;
    const int m = prec.streams();
    const double det = hermitian_det(Eigen::MatrixXcd::Identity(m, m) + scale * core);
    return 1.0 / det;
}

double pep_bound_monte_carlo(const Precoder& prec, const CodewordDistance& dist,
                             const CorrelationModel& model, const EffectiveSinr& sinr,
                             int n_v, long draws, Rng& rng) {
    if (draws < 1) throw std::invalid_argument("draws must be >= 1");
    require_psd(dist.a0, "A0");
    require_psd(model.r0, "R0");
    const Eigen::MatrixXcd f = prec.matrix();
    const Eigen::MatrixXcd b = sinr.eta * f * dist.a0 * f.adjoint();  // N_t x N_t
    const Eigen::MatrixXcd color =
        std::sqrt(static_cast<double>(model.tap_count) * n_v) * model.r0_sqrt;

    const int n = model.n_tx;
    Eigen::RowVectorXcd z(n), phi(n);
    double sum = 0.0;
    for (long k = 0; k < draws; ++k) {
        for (int i = 0; i < n; ++i) z(i) = rng.cgauss();
        phi = z * color;
        const double q = (phi * b * phi.adjoint())(0, 0).real();
        sum += std::exp(-q);
    }
    return sum / static_cast<double>(draws);
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> design_direction(const EigenSpectrum& spectrum,
                                                               const CodewordDistance& dist) {
    return {spectrum.basis, dist.v_a};
}

Eigen::VectorXd waterfill_powers(const Eigen::VectorXd& c) {
    const int m = static_cast<int>(c.size());
    if (m < 1) throw std::invalid_argument("empty gain vector");
    const double c_max = c.maxCoeff();
    if (!(c_max > 0.0)) throw std::invalid_argument("all-zero spectrum");

    const auto total = [&](double nu) {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
            if (c(i) > nu) s += 1.0 / nu - 1.0 / c(i);
        return s;
    };

    // total(nu) decreases monotonically from +inf to 0 on (0, c_max];
    // bracket then bisect until sum(d^2) = 1 within 1e-10.
    double hi = c_max;
    double lo = c_max;
    int guard = 0;
    while (total(lo) < 1.0) {
        hi = lo;
        lo *= 0.5;
        if (++guard > 2000) throw std::runtime_error("waterfill bracketing failed");
    }
    double nu = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        nu = 0.5 * (lo + hi);
        const double t = total(nu);
        if (std::abs(t - 1.0) <= 1e-10) break;
        (t > 1.0 ? lo : hi) = nu;
    }

    // Exact multiplier for the active set found by bisection.
    double inv_sum = 0.0;
    int active = 0;
    for (int i = 0; i < m; ++i) {
        if (c(i) > nu) {
            inv_sum += 1.0 / c(i);
            ++active;
        }
    }
    if (active == 0) throw std::runtime_error("waterfill found empty active set");
    const double nu_star = active / (1.0 + inv_sum);

    Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i)
        if (c(i) > nu) p(i) = std::max(1.0 / nu_star - 1.0 / c(i), 0.0);
    if (std::abs(p.sum() - 1.0) > 1e-9)
        throw std::runtime_error("waterfill did not converge");
    return p;
}

Eigen::VectorXd waterfill(const EigenSpectrum& spectrum, const CodewordDistance& dist,
                          const EffectiveSinr& sinr, int n_v, const CorrelationModel& model) {
    if (!(spectrum.values.maxCoeff() > 0.0)) throw std::invalid_argument("all-zero spectrum");
    const double g = sinr.eta * dist.mu0 * static_cast<double>(model.tap_count) * n_v;
    if (!(g > 0.0)) throw std::invalid_argument("eta * mu0 * L * N_v must be > 0");
    return waterfill_powers(g * spectrum.values);
}

Eigen::VectorXd equal_power(int m) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    return Eigen::VectorXd::Constant(m, 1.0 / m);
}

Eigen::VectorXd single_beam(const EigenSpectrum& spectrum, const CodewordDistance& dist) {
    const int m = spectrum.streams();
    if (m < 1 || !(spectrum.values.maxCoeff() > 0.0))
        throw std::invalid_argument("degenerate spectrum");
    int best = 0;
    double best_gain = dist.d_a(0) * spectrum.values(0);
    for (int i = 1; i < m; ++i) {
        const double gain = dist.d_a(i) * spectrum.values(i);
        if (gain > best_gain) {
            best_gain = gain;
            best = i;
        }
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
    p(best) = 1.0;
    return p;
}

double coding_gain(const Eigen::VectorXd& d2, const CodewordDistance& dist,
                   const EigenSpectrum& spectrum, int l_taps, int n_v) {
    const int m = static_cast<int>(d2.size());
    if (m != spectrum.streams() || m != dist.d_a.size())
        throw std::invalid_argument("dimension mismatch");
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
        const double factor = d2(i) * dist.d_a(i) * spectrum.values(i);
        if (factor <= 0.0) return 0.0;
        prod *= factor;
    }
    const double g_d = spectrum.n_tx();
    return static_cast<double>(l_taps) * n_v * std::pow(prod, 1.0 / g_d);
}

double diversity_slope(const std::vector<std::pair<double, double>>& curve) {
    if (curve.size() < 2) throw std::invalid_argument("need at least 2 samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [eta, pbar] : curve) {
        if (!(eta > 0.0) || !(pbar > 0.0))
            throw std::invalid_argument("curve values must be positive");
        const double x = std::log(eta);
        const double y = -std::log(pbar);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(curve.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Precoder optimal_precoder(const CorrelationModel& model, const CodewordDistance& dist,
                          const EffectiveSinr& sinr, int n_v, int m) {
    const EigenSpectrum spectrum = spectrum_of(model, m);
    auto [v0, u0] = design_direction(spectrum, dist);
    const Eigen::VectorXd p = waterfill(spectrum, dist, sinr, n_v, model);
    return Precoder{std::move(v0), p.cwiseSqrt(), std::move(u0)};
}

}  // namespace stfsim
