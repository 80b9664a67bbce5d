#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stfsim/precoder.hpp"
#include "stfsim/stfbc.hpp"

namespace stfsim {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SystemConfig {
    int n_c = 64;        // subcarriers
    int n_v = 8;         // spread factor
    int n_t = 4;         // transmit antennas
    int n_u = 4;         // users per subcarrier
    int l_taps = 1;      // resoluble delay taps
    double rho = 1.0;    // total transmit power
    double noise_var = 1.0;
    double kappa = 0.3;
    double doppler_hz = 50.0;
    double frame_s = 0.005;
    std::uint64_t seed = 1;
    long trials = 2000000;  // frame cap per sweep point

    void validate() const;  // throws config_error naming the offending key
};

struct MuiModel {
    double variance = 0.0;
    long sample_count = 0;
};

struct TrialResult {
    long symbol_errors = 0;
    long symbols_sent = 0;
};

enum class Scheme {
    open_loop,
    antenna_selection,
    statistical_waterfill,
    statistical_equal,
    statistical_single_beam,
    ideal,
};

const char* scheme_name(Scheme s);
bool scheme_from_name(const std::string& name, Scheme& out);

// Fixed ingredients of one (config, scheme) pair. Immutable once built, so
// trials can share it across threads.
struct LinkContext {
    SystemConfig cfg;
    Scheme scheme = Scheme::open_loop;
    double mui_var = 0.0;
    CorrelationModel model;
    SpreadingCodeSet codes;
    Eigen::MatrixXd code_pm;      // codes as a dense +-1 matrix (N_u x N_v)
    std::vector<int> group;       // subcarrier indices of group 0
    Precoder fixed;               // open-loop / statistical schemes
    Eigen::MatrixXcd fixed_f;     // fixed.matrix()
};

LinkContext make_link_context(const SystemConfig& cfg, Scheme scheme, double mui_var);

// Transmission schemes. Statistical precoders use only R0 and eta; the
// selection and ideal baselines take the instantaneous group responses
// (rows of group_h are H_{0,i}).
Precoder scheme_open_loop(const SystemConfig& cfg);
Precoder scheme_antenna_selection(const SystemConfig& cfg, const Eigen::MatrixXcd& group_h);
std::vector<Precoder> scheme_ideal_precoding(const SystemConfig& cfg,
                                             const Eigen::MatrixXcd& group_h);
Precoder statistical_precoder(const SystemConfig& cfg, Scheme scheme, double mui_var);

// Frequency responses at the group indices from one multipath draw.
Eigen::MatrixXcd group_responses(const MultipathChannel& chan, const std::vector<int>& idx,
                                 int n_c);

// One frame over given channels: desired user plus N_u - 1 interferers,
// per-subcarrier noise, despreading and ML detection.
TrialResult simulate_frame_with_channels(const LinkContext& ctx, const Eigen::MatrixXcd& group_h,
                                         Rng& sym_rng, Rng& noise_rng, Rng& isym_rng,
                                         Rng& ichan_rng);

// Seed-addressed frame (channel drawn from the trial's own streams).
TrialResult simulate_frame(const LinkContext& ctx, std::uint64_t point_seed, long trial);

// Despread interference term alone (no desired signal, no noise).
Eigen::RowVector2cd despread_mui_sample(const LinkContext& ctx, std::uint64_t point_seed,
                                        long trial);

// Despread noise alone (zero signal), for calibration checks.
Eigen::RowVector2cd despread_noise_sample(const LinkContext& ctx, std::uint64_t point_seed,
                                          long trial);

struct SweepOptions {
    long trial_cap = 2000000;
    long target_errors = 300;
    long batch = 8192;
    int threads = 0;         // 0 = OpenMP default, 1 = serial reference
    long mui_frames = 20000;
};

// Sample variance of the despread MUI entries over random frames.
MuiModel estimate_mui_variance(const SystemConfig& cfg, Scheme scheme, long frames = 20000,
                               int threads = 0);

struct CurvePoint {
    std::string scheme_label;
    double snr_db = 0.0;
    double ser = 0.0;
    double ci_half_width = 0.0;
    long errors = 0;
    long symbols = 0;
    long trials = 0;
};

// One (scheme, SNR) point with adaptive stopping. Exposed so the serial
// and parallel paths can be compared directly.
CurvePoint run_point(const SystemConfig& cfg, Scheme scheme, double mui_var, double snr_db,
                     const SweepOptions& opts);

// Full sweep; schemes share trial seeds per SNR point (common random
// numbers) and sigma_MUI is estimated once per scheme.
std::vector<CurvePoint> run_ser_sweep(const SystemConfig& cfg, const std::vector<Scheme>& schemes,
                                      const std::vector<double>& snr_grid_db,
                                      const SweepOptions& opts);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t point_seed_for(std::uint64_t master, double snr_db);

}  // namespace stfsim
