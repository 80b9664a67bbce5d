#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stfsim/rng.hpp"

namespace stfsim {

// Transmit-side statistics of the multipath channel: the N_t x N_t
// correlation matrix R0 plus the tap count L. Taps are mutually
// independent (tap correlation fixed to identity), so the per-subcarrier
// covariance is L * R0 for every subcarrier.
struct CorrelationModel {
    int n_tx = 0;
    double kappa = 0.0;
    int tap_count = 1;
    Eigen::MatrixXcd r0;
    Eigen::MatrixXcd r0_sqrt;  // PSD square root, eigenvalues clamped at 1e-12

    // Generic Hermitian PSD correlation (no unit-diagonal requirement).
    static CorrelationModel from_matrix(const Eigen::MatrixXcd& r0, int tap_count);
};

// R0(m,n) = kappa^|m-n|, 0 <= kappa < 1.
CorrelationModel exponential_correlation(double kappa, int n_tx, int tap_count = 1);

// Hermitian eigensystem with eigenvalues sorted descending (stable ties).
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;  // columns match values
};
EigenSystem sorted_eig(const Eigen::MatrixXcd& hermitian);

// L independent rows G_{0,l}, each CN(0, R0); delay of row l is l samples.
struct MultipathChannel {
    Eigen::MatrixXcd taps;  // L x N_t

    int tap_count() const { return static_cast<int>(taps.rows()); }
    int n_tx() const { return static_cast<int>(taps.cols()); }
};

MultipathChannel draw_taps(const CorrelationModel& model, Rng& rng);

struct SubcarrierResponse {
    int index = 0;
    Eigen::RowVectorXcd h;  // 1 x N_t
};

// H_{0,n} = sum_l G_{0,l} exp(-j 2 pi n l / N_c)
SubcarrierResponse frequency_response(const MultipathChannel& chan, int n, int n_c);

// L * R0 (identical for every subcarrier under independent taps).
Eigen::MatrixXcd subcarrier_covariance(const CorrelationModel& model);

// Sum-of-sinusoids Rayleigh fader (Zheng-Xiao style arrival angles), one
// oscillator bank per tap entry. The channel is constant within a frame;
// evolve() advances one frame and returns the faded channel, colored by
// R0^{1/2} so the spatial covariance is preserved. Zero Doppler returns
// the input unchanged.
class JakesProcess {
public:
    JakesProcess(const CorrelationModel& model, double doppler_hz, double frame_s,
                 Rng& rng, int oscillators = 16);

    double doppler_hz() const { return doppler_hz_; }
    double frame_s() const { return frame_s_; }
    int oscillators() const { return n_osc_; }

    MultipathChannel next(const MultipathChannel& current);

private:
    int n_tx_;
    int taps_;
    int n_osc_;
    double doppler_hz_;
    double frame_s_;
    long frame_ = 0;
    Eigen::MatrixXcd color_;
    // flattened per (tap, antenna, oscillator)
    std::vector<double> w_re_, w_im_, ph_re_, ph_im_;
};

MultipathChannel evolve(JakesProcess& proc, const MultipathChannel& chan);

}  // namespace stfsim
