#include "stfsim/link.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stfsim {

namespace {

constexpr std::uint64_t kStreamChannel = 1;
constexpr std::uint64_t kStreamSymbols = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamInterfSymbols = 4;
constexpr std::uint64_t kStreamInterfChannels = 5;
constexpr std::uint64_t kMuiTag = 0x4d5549;  // "MUI"

int thread_count(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

// Interferer precoder matrices for one frame. Statistical schemes reuse
// the fixed matrix (homogeneous network); selection and ideal design from
// the interferer's own, independently drawn channel.
struct InterfererSet {
    std::vector<Eigen::MatrixXcd> common;                 // per interferer
    std::vector<std::vector<Eigen::MatrixXcd>> per_sub;   // ideal: per interferer, per subcarrier
    bool per_subcarrier = false;
};

InterfererSet draw_interferers(const LinkContext& ctx, Rng& ichan_rng) {
    InterfererSet set;
    const int others = ctx.cfg.n_u - 1;
    if (others <= 0) return set;
    switch (ctx.scheme) {
        case Scheme::open_loop:
        case Scheme::statistical_waterfill:
        case Scheme::statistical_equal:
        case Scheme::statistical_single_beam:
            set.common.assign(others, ctx.fixed_f);
            break;
        case Scheme::antenna_selection:
            set.common.reserve(others);
            for (int k = 0; k < others; ++k) {
                const MultipathChannel own = draw_taps(ctx.model, ichan_rng);
                const Eigen::MatrixXcd h = group_responses(own, ctx.group, ctx.cfg.n_c);
                set.common.push_back(scheme_antenna_selection(ctx.cfg, h).matrix());
            }
            break;
        case Scheme::ideal: {
            set.per_subcarrier = true;
            set.per_sub.resize(others);
            for (int k = 0; k < others; ++k) {
                const MultipathChannel own = draw_taps(ctx.model, ichan_rng);
                const Eigen::MatrixXcd h = group_responses(own, ctx.group, ctx.cfg.n_c);
                const std::vector<Precoder> ps = scheme_ideal_precoding(ctx.cfg, h);
                set.per_sub[k].reserve(ps.size());
                for (const Precoder& p : ps) set.per_sub[k].push_back(p.matrix());
            }
            break;
        }
    }
    return set;
}

Eigen::RowVector2cd mui_row(const LinkContext& ctx, const Eigen::MatrixXcd& group_h,
                            Rng& isym_rng, Rng& ichan_rng) {
    Eigen::RowVector2cd out = Eigen::RowVector2cd::Zero();
    const int others = ctx.cfg.n_u - 1;
    if (others <= 0) return out;
    const InterfererSet set = draw_interferers(ctx, ichan_rng);
    const Constellation& cons = Constellation::qam16();
    const double sqrt_rho = std::sqrt(ctx.cfg.rho);
    for (int k = 0; k < others; ++k) {
        const Codeword xk =
            encode(cons.point(isym_rng.uniform_int(16)), cons.point(isym_rng.uniform_int(16)));
        for (int i = 0; i < ctx.cfg.n_v; ++i) {
            const Eigen::MatrixXcd& fk = set.per_subcarrier ? set.per_sub[k][i] : set.common[k];
            const Eigen::RowVector2cd hf = group_h.row(i) * fk;
            out += (sqrt_rho * ctx.code_pm(k + 1, i) * ctx.code_pm(0, i)) * (hf * xk.x);
        }
    }
    return out;
}

}  // namespace

void SystemConfig::validate() const {
    const auto fail = [](const std::string& key, const std::string& why) {
        throw config_error(key + ": " + why);
    };
    if (n_c < 1) fail("n_c", "must be >= 1");
    if (n_v < 1) fail("n_v", "must be >= 1");
    if (n_t < 2) fail("n_t", "need at least 2 transmit antennas for the 2-stream code");
    if (n_u < 1) fail("n_u", "must be >= 1");
    if (l_taps < 1) fail("l_taps", "must be >= 1");
    if (n_c % n_v != 0)
        fail("n_v", "N_c mod N_v != 0 (n_c=" + std::to_string(n_c) + ", n_v=" + std::to_string(n_v) + ")");
    if ((n_v & (n_v - 1)) != 0) fail("n_v", "spread factor must be a power of two");
    if (n_u > n_v) fail("n_u", "user count cannot exceed the spread factor");
    if (!(rho > 0.0)) fail("rho", "must be > 0");
    if (!(noise_var > 0.0)) fail("noise_var", "must be > 0");
    if (!(kappa >= 0.0 && kappa < 1.0)) fail("kappa", "must lie in [0, 1)");
    if (doppler_hz < 0.0) fail("doppler_hz", "must be >= 0");
    if (!(frame_s > 0.0)) fail("frame_s", "must be > 0");
    if (trials < 0) fail("trials", "must be >= 0");
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::open_loop: return "open-loop";
        case Scheme::antenna_selection: return "antenna-selection";
        case Scheme::statistical_waterfill: return "waterfill";
        case Scheme::statistical_equal: return "equal-power";
        case Scheme::statistical_single_beam: return "single-beam";
        case Scheme::ideal: return "ideal";
    }
    return "unknown";
}

bool scheme_from_name(const std::string& name, Scheme& out) {
    for (Scheme s : {Scheme::open_loop, Scheme::antenna_selection, Scheme::statistical_waterfill,
                     Scheme::statistical_equal, Scheme::statistical_single_beam, Scheme::ideal}) {
        if (name == scheme_name(s)) {
            out = s;
            return true;
        }
    }
    return false;
}

Eigen::MatrixXcd group_responses(const MultipathChannel& chan, const std::vector<int>& idx,
                                 int n_c) {
    Eigen::MatrixXcd h(static_cast<int>(idx.size()), chan.n_tx());
    if (chan.tap_count() == 1) {
        for (int i = 0; i < h.rows(); ++i) h.row(i) = chan.taps.row(0);
        return h;
    }
    for (int i = 0; i < h.rows(); ++i) h.row(i) = frequency_response(chan, idx[i], n_c).h;
    return h;
}

Precoder scheme_open_loop(const SystemConfig& cfg) {
    Precoder p;
    p.v = Eigen::MatrixXcd::Zero(cfg.n_t, 2);
    p.v(0, 0) = 1.0;
    p.v(1, 1) = 1.0;
    p.d = equal_power(2).cwiseSqrt();
    p.u = Eigen::MatrixXcd::Identity(2, 2);
    return p;
}

Precoder scheme_antenna_selection(const SystemConfig& cfg, const Eigen::MatrixXcd& group_h) {
    Eigen::VectorXd power(cfg.n_t);
    for (int a = 0; a < cfg.n_t; ++a) power(a) = group_h.col(a).squaredNorm();
    int best_a = 0, best_b = 1;
    double best = power(0) + power(1);
    for (int a = 0; a < cfg.n_t; ++a) {
        for (int b = a + 1; b < cfg.n_t; ++b) {
            if (power(a) + power(b) > best) {
                best = power(a) + power(b);
                best_a = a;
                best_b = b;
            }
        }
    }
    Precoder p;
    p.v = Eigen::MatrixXcd::Zero(cfg.n_t, 2);
    p.v(best_a, 0) = 1.0;
    p.v(best_b, 1) = 1.0;
    p.d = equal_power(2).cwiseSqrt();
    p.u = Eigen::MatrixXcd::Identity(2, 2);
    return p;
}

std::vector<Precoder> scheme_ideal_precoding(const SystemConfig& cfg,
                                             const Eigen::MatrixXcd& group_h) {
    std::vector<Precoder> out;
    out.reserve(group_h.rows());
    for (int i = 0; i < group_h.rows(); ++i) {
        const Eigen::RowVectorXcd h = group_h.row(i);
        const double norm = h.norm();
        Precoder p;
        if (norm <= 0.0) {
            p = scheme_open_loop(cfg);
        } else {
            // Matched filter on the dominant (only) eigen-direction of
            // h^H h; instantaneous water-filling puts all power there.
            Eigen::VectorXcd v1 = h.adjoint() / norm;
            int pivot = 0;
            double smallest = std::abs(v1(0));
            for (int j = 1; j < cfg.n_t; ++j) {
                if (std::abs(v1(j)) < smallest) {
                    smallest = std::abs(v1(j));
                    pivot = j;
                }
            }
            Eigen::VectorXcd v2 = Eigen::VectorXcd::Zero(cfg.n_t);
            v2(pivot) = 1.0;
            v2 -= (v1.adjoint() * v2)(0, 0) * v1;
            v2 /= v2.norm();
            p.v = Eigen::MatrixXcd(cfg.n_t, 2);
            p.v.col(0) = v1;
            p.v.col(1) = v2;
            p.d = Eigen::Vector2d(1.0, 0.0);
            p.u = Eigen::MatrixXcd::Identity(2, 2);
        }
        out.push_back(std::move(p));
    }
    return out;
}

Precoder statistical_precoder(const SystemConfig& cfg, Scheme scheme, double mui_var) {
    const CorrelationModel model = exponential_correlation(cfg.kappa, cfg.n_t, cfg.l_taps);
    const CodewordDistance dist = ostbc_distance(Constellation::qam16().min_distance_sq(), 2);
    const EffectiveSinr sinr = effective_sinr(cfg.rho, cfg.n_v, cfg.noise_var, mui_var, cfg.l_taps);
    const EigenSpectrum spectrum = spectrum_of(model, 2);
    auto [v0, u0] = design_direction(spectrum, dist);

    Eigen::VectorXd p;
    switch (scheme) {
        case Scheme::statistical_equal: p = equal_power(2); break;
        case Scheme::statistical_single_beam: p = single_beam(spectrum, dist); break;
        default: p = waterfill(spectrum, dist, sinr, cfg.n_v, model); break;
    }
    return Precoder{std::move(v0), p.cwiseSqrt(), std::move(u0)};
}

LinkContext make_link_context(const SystemConfig& cfg, Scheme scheme, double mui_var) {
    cfg.validate();
    LinkContext ctx;
    ctx.cfg = cfg;
    ctx.scheme = scheme;
    ctx.mui_var = mui_var;
    ctx.model = exponential_correlation(cfg.kappa, cfg.n_t, cfg.l_taps);
    ctx.codes = SpreadingCodeSet::walsh_hadamard(cfg.n_u, cfg.n_v);
    ctx.code_pm.resize(cfg.n_u, cfg.n_v);
    for (int k = 0; k < cfg.n_u; ++k) ctx.code_pm.row(k) = ctx.codes.row(k);
    ctx.group = group_subcarriers(0, cfg.n_c, cfg.n_v);
    switch (scheme) {
        case Scheme::open_loop: ctx.fixed = scheme_open_loop(cfg); break;
        case Scheme::antenna_selection:
        case Scheme::ideal:
            ctx.fixed = scheme_open_loop(cfg);  // placeholder, per-frame designs used
            break;
        default: ctx.fixed = statistical_precoder(cfg, scheme, mui_var); break;
    }
    ctx.fixed_f = ctx.fixed.matrix();
    return ctx;
}

TrialResult simulate_frame_with_channels(const LinkContext& ctx, const Eigen::MatrixXcd& group_h,
                                         Rng& sym_rng, Rng& noise_rng, Rng& isym_rng,
                                         Rng& ichan_rng) {
    const SystemConfig& cfg = ctx.cfg;
    const Constellation& cons = Constellation::qam16();
    const double sqrt_rho = std::sqrt(cfg.rho);
    const double noise_sd = std::sqrt(cfg.noise_var);

    // desired precoder(s)
    Eigen::MatrixXcd f0_common;
    std::vector<Eigen::MatrixXcd> f0_sub;
    switch (ctx.scheme) {
        case Scheme::antenna_selection:
            f0_common = scheme_antenna_selection(cfg, group_h).matrix();
            break;
        case Scheme::ideal: {
            const std::vector<Precoder> ps = scheme_ideal_precoding(cfg, group_h);
            f0_sub.reserve(ps.size());
            for (const Precoder& p : ps) f0_sub.push_back(p.matrix());
            break;
        }
        default: f0_common = ctx.fixed_f; break;
    }

    const int i1 = sym_rng.uniform_int(16);
    const int i2 = sym_rng.uniform_int(16);
    const Codeword x0 = encode(cons.point(i1), cons.point(i2));

    const InterfererSet interferers = draw_interferers(ctx, ichan_rng);
    std::vector<Codeword> xk;
    xk.reserve(cfg.n_u - 1);
    for (int k = 0; k + 1 < cfg.n_u; ++k)
        xk.push_back(
            encode(cons.point(isym_rng.uniform_int(16)), cons.point(isym_rng.uniform_int(16))));

    Eigen::RowVector2cd ybar = Eigen::RowVector2cd::Zero();
    Eigen::RowVector2cd h_eff = Eigen::RowVector2cd::Zero();
    for (int i = 0; i < cfg.n_v; ++i) {
        const Eigen::MatrixXcd& f0i = ctx.scheme == Scheme::ideal ? f0_sub[i] : f0_common;
        const Eigen::RowVector2cd hf = group_h.row(i) * f0i;
        h_eff += hf;

        const double c0i = ctx.code_pm(0, i);
        Eigen::RowVector2cd y = (sqrt_rho * c0i) * (hf * x0.x);
        for (int k = 0; k + 1 < cfg.n_u; ++k) {
            const Eigen::MatrixXcd& fk =
                interferers.per_subcarrier ? interferers.per_sub[k][i] : interferers.common[k];
            const Eigen::RowVector2cd hfk = group_h.row(i) * fk;
            y += (sqrt_rho * ctx.code_pm(k + 1, i)) * (hfk * xk[k].x);
        }
        y(0) += noise_sd * noise_rng.cgauss();
        y(1) += noise_sd * noise_rng.cgauss();

        ybar += c0i * y;
    }

    const auto [d1, d2] = ml_detect_decoupled(ybar, sqrt_rho * h_eff, cons);
    TrialResult r;
    r.symbols_sent = 2;
    r.symbol_errors = (d1 != i1 ? 1 : 0) + (d2 != i2 ? 1 : 0);
    return r;
}

TrialResult simulate_frame(const LinkContext& ctx, std::uint64_t point_seed, long trial) {
    Rng chan = Rng::for_trial(point_seed, kStreamChannel, trial);
    Rng sym = Rng::for_trial(point_seed, kStreamSymbols, trial);
    Rng noise = Rng::for_trial(point_seed, kStreamNoise, trial);
    Rng isym = Rng::for_trial(point_seed, kStreamInterfSymbols, trial);
    Rng ichan = Rng::for_trial(point_seed, kStreamInterfChannels, trial);
    const MultipathChannel mp = draw_taps(ctx.model, chan);
    const Eigen::MatrixXcd group_h = group_responses(mp, ctx.group, ctx.cfg.n_c);
    return simulate_frame_with_channels(ctx, group_h, sym, noise, isym, ichan);
}

Eigen::RowVector2cd despread_mui_sample(const LinkContext& ctx, std::uint64_t point_seed,
                                        long trial) {
    Rng chan = Rng::for_trial(point_seed, kStreamChannel, trial);
    Rng isym = Rng::for_trial(point_seed, kStreamInterfSymbols, trial);
    Rng ichan = Rng::for_trial(point_seed, kStreamInterfChannels, trial);
    const MultipathChannel mp = draw_taps(ctx.model, chan);
    const Eigen::MatrixXcd group_h = group_responses(mp, ctx.group, ctx.cfg.n_c);
    return mui_row(ctx, group_h, isym, ichan);
}

Eigen::RowVector2cd despread_noise_sample(const LinkContext& ctx, std::uint64_t point_seed,
                                          long trial) {
    Rng noise = Rng::for_trial(point_seed, kStreamNoise, trial);
    const double noise_sd = std::sqrt(ctx.cfg.noise_var);
    Eigen::RowVector2cd out = Eigen::RowVector2cd::Zero();
    for (int i = 0; i < ctx.cfg.n_v; ++i) {
        out(0) += ctx.code_pm(0, i) * noise_sd * noise.cgauss();
        out(1) += ctx.code_pm(0, i) * noise_sd * noise.cgauss();
    }
    return out;
}

MuiModel estimate_mui_variance(const SystemConfig& cfg, Scheme scheme, long frames, int threads) {
    cfg.validate();
    if (frames < 1) throw std::invalid_argument("frames must be >= 1");
    // Design-side estimate: the precoder is built at sigma_MUI = 0 and the
    // measured variance then feeds eta (detection never uses it).
    const LinkContext ctx = make_link_context(cfg, scheme, 0.0);
    const std::uint64_t seed =
        mix_seed(cfg.seed, mix_seed(kMuiTag, static_cast<std::uint64_t>(scheme)));

    std::vector<double> energy(frames);
    const int nthreads = thread_count(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads > 1)
#endif
    for (long t = 0; t < frames; ++t) {
        energy[t] = despread_mui_sample(ctx, seed, t).squaredNorm();
    }
    double sum = 0.0;
    for (double e : energy) sum += e;  // fixed order, thread-count independent

    MuiModel m;
    m.sample_count = 2 * frames;
    m.variance = sum / static_cast<double>(m.sample_count);
    return m;
}

CurvePoint run_point(const SystemConfig& cfg, Scheme scheme, double mui_var, double snr_db,
                     const SweepOptions& opts) {
    SystemConfig point_cfg = cfg;
    point_cfg.noise_var = cfg.rho * std::pow(10.0, -snr_db / 10.0);
    point_cfg.trials = opts.trial_cap;
    const LinkContext ctx = make_link_context(point_cfg, scheme, mui_var);
    const std::uint64_t seed = point_seed_for(cfg.seed, snr_db);

    long errors = 0;
    long frames_done = 0;
    const int nthreads = thread_count(opts.threads);
    while (frames_done < opts.trial_cap && errors < opts.target_errors) {
        const long batch = std::min(opts.batch, opts.trial_cap - frames_done);
        long batch_errors = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads > 1) \
    reduction(+ : batch_errors)
#endif
        for (long t = frames_done; t < frames_done + batch; ++t) {
            batch_errors += simulate_frame(ctx, seed, t).symbol_errors;
        }
        errors += batch_errors;
        frames_done += batch;
    }

    CurvePoint p;
    p.scheme_label = scheme_name(scheme);
    p.snr_db = snr_db;
    p.trials = frames_done;
    p.symbols = 2 * frames_done;
    p.errors = errors;
    p.ser = static_cast<double>(errors) / static_cast<double>(p.symbols);
    p.ci_half_width = 1.96 * std::sqrt(p.ser * std::max(0.0, 1.0 - p.ser) / p.symbols);
    return p;
}

std::vector<CurvePoint> run_ser_sweep(const SystemConfig& cfg, const std::vector<Scheme>& schemes,
                                      const std::vector<double>& snr_grid_db,
                                      const SweepOptions& opts) {
    cfg.validate();
    if (snr_grid_db.empty()) throw std::invalid_argument("empty SNR grid (no data)");
    if (opts.trial_cap < 1) throw std::invalid_argument("trial cap must be >= 1 (no data)");
    if (schemes.empty()) throw std::invalid_argument("no schemes requested");

    std::vector<CurvePoint> out;
    out.reserve(schemes.size() * snr_grid_db.size());
    for (Scheme s : schemes) {
        const double mui_var =
            estimate_mui_variance(cfg, s, opts.mui_frames, opts.threads).variance;
        for (double snr : snr_grid_db) {
            out.push_back(run_point(cfg, s, mui_var, snr, opts));
        }
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 1) + (b >> 3));
    std::uint64_t r = splitmix64(s);
    return splitmix64(s) ^ r;
}

std::uint64_t point_seed_for(std::uint64_t master, double snr_db) {
    return mix_seed(master, std::bit_cast<std::uint64_t>(snr_db));
}

}  // namespace stfsim
