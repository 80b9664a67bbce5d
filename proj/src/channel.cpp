#include "stfsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stfsim {

namespace {

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 1e-12 ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

CorrelationModel CorrelationModel::from_matrix(const Eigen::MatrixXcd& r0, int tap_count) {
    if (r0.rows() != r0.cols() || r0.rows() < 1)
        throw std::invalid_argument("correlation matrix must be square and non-empty");
    if (tap_count < 1) throw std::invalid_argument("tap_count must be >= 1");
    if (!r0.isApprox(r0.adjoint(), 1e-10))
        throw std::invalid_argument("correlation matrix must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r0, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw std::invalid_argument("correlation matrix must be positive semi-definite");

    CorrelationModel m;
    m.n_tx = static_cast<int>(r0.rows());
    m.kappa = 0.0;
    m.tap_count = tap_count;
    m.r0 = r0;
    m.r0_sqrt = psd_sqrt(r0);
    return m;
}

CorrelationModel exponential_correlation(double kappa, int n_tx, int tap_count) {
    if (!(kappa >= 0.0 && kappa < 1.0))
        throw std::invalid_argument("kappa must lie in [0, 1)");
    if (n_tx < 1) throw std::invalid_argument("n_tx must be >= 1");
    if (tap_count < 1) throw std::invalid_argument("tap_count must be >= 1");

    Eigen::MatrixXcd r0(n_tx, n_tx);
    for (int m = 0; m < n_tx; ++m)
        for (int n = 0; n < n_tx; ++n)
            r0(m, n) = std::pow(kappa, std::abs(m - n));

    CorrelationModel model;
    model.n_tx = n_tx;
    model.kappa = kappa;
    model.tap_count = tap_count;
    model.r0 = std::move(r0);
    model.r0_sqrt = psd_sqrt(model.r0);
    return model;
}

EigenSystem sorted_eig(const Eigen::MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
    const int n = static_cast<int>(hermitian.rows());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });

    EigenSystem out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(order[i]);
        out.vectors.col(i) = es.eigenvectors().col(order[i]);
    }
    return out;
}

MultipathChannel draw_taps(const CorrelationModel& model, Rng& rng) {
    Eigen::MatrixXcd iid(model.tap_count, model.n_tx);
    for (int l = 0; l < model.tap_count; ++l)
        for (int t = 0; t < model.n_tx; ++t) iid(l, t) = rng.cgauss();
    return MultipathChannel{iid * model.r0_sqrt};
}

SubcarrierResponse frequency_response(const MultipathChannel& chan, int n, int n_c) {
    if (n < 0 || n >= n_c) throw std::invalid_argument("subcarrier index out of range");
    SubcarrierResponse out;
    out.index = n;
    out.h = Eigen::RowVectorXcd::Zero(chan.n_tx());
    for (int l = 0; l < chan.tap_count(); ++l) {
        const double phase = -2.0 * Rng::pi() * static_cast<double>(n) * l / n_c;
        out.h += chan.taps.row(l) * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return out;
}

Eigen::MatrixXcd subcarrier_covariance(const CorrelationModel& model) {
    return static_cast<double>(model.tap_count) * model.r0;
}

JakesProcess::JakesProcess(const CorrelationModel& model, double doppler_hz, double frame_s,
                           Rng& rng, int oscillators)
    : n_tx_(model.n_tx),
      taps_(model.tap_count),
      n_osc_(oscillators),
      doppler_hz_(doppler_hz),
      frame_s_(frame_s),
      color_(model.r0_sqrt) {
    if (doppler_hz < 0.0) throw std::invalid_argument("doppler_hz must be >= 0");
    if (frame_s <= 0.0) throw std::invalid_argument("frame_s must be > 0");
    if (oscillators < 1) throw std::invalid_argument("oscillators must be >= 1");

    const long total = static_cast<long>(taps_) * n_tx_ * n_osc_;
    w_re_.resize(total);
    w_im_.resize(total);
    ph_re_.resize(total);
    ph_im_.resize(total);
    long idx = 0;
    for (int l = 0; l < taps_; ++l) {
        for (int t = 0; t < n_tx_; ++t) {
            const double theta = (2.0 * rng.uniform() - 1.0) * Rng::pi();
            for (int k = 1; k <= n_osc_; ++k, ++idx) {
                const double alpha = (2.0 * Rng::pi() * k - Rng::pi() + theta) / (4.0 * n_osc_);
                w_re_[idx] = 2.0 * Rng::pi() * doppler_hz_ * std::cos(alpha);
                w_im_[idx] = 2.0 * Rng::pi() * doppler_hz_ * std::sin(alpha);
                ph_re_[idx] = (2.0 * rng.uniform() - 1.0) * Rng::pi();
                ph_im_[idx] = (2.0 * rng.uniform() - 1.0) * Rng::pi();
            }
        }
    }
}

MultipathChannel JakesProcess::next(const MultipathChannel& current) {
    if (doppler_hz_ == 0.0) return current;
    ++frame_;
    const double t = static_cast<double>(frame_) * frame_s_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_osc_));

    Eigen::MatrixXcd iid(taps_, n_tx_);
    long idx = 0;
    for (int l = 0; l < taps_; ++l) {
        for (int a = 0; a < n_tx_; ++a) {
            double re = 0.0, im = 0.0;
            for (int k = 0; k < n_osc_; ++k, ++idx) {
                re += std::cos(w_re_[idx] * t + ph_re_[idx]);
                im += std::cos(w_im_[idx] * t + ph_im_[idx]);
            }
            iid(l, a) = std::complex<double>(re * scale, im * scale);
        }
    }
    return MultipathChannel{iid * color_};
}

MultipathChannel evolve(JakesProcess& proc, const MultipathChannel& chan) {
    return proc.next(chan);
}

}  // namespace stfsim
