#include "stfsim/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace stfsim {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* b = value.data();
    const char* e = b + value.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw config_error(key + ": expected a number, got '" + value + "'");
    return v;
}

long parse_integer(const std::string& key, const std::string& value) {
    long v = 0;
    const char* b = value.data();
    const char* e = b + value.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw config_error(key + ": expected an integer, got '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const char* b = value.data();
    const char* e = b + value.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw config_error(key + ": expected an unsigned integer, got '" + value + "'");
    return v;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& item : split_list(value)) out.push_back(parse_real(key, item));
    return out;
}

std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

std::string join_schemes(const std::vector<Scheme>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += scheme_name(v[i]);
    }
    return out;
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double x = lo; x <= hi + 1e-9; x += step) g.push_back(x);
    return g;
}

}  // namespace

const char* preset_name(Preset p) {
    switch (p) {
        case Preset::fig2_schemes: return "fig2-schemes";
        case Preset::fig3_power: return "fig3-power";
        case Preset::fig4_correlation: return "fig4-correlation";
        case Preset::bound_validation: return "bound-validation";
        case Preset::custom: return "custom";
    }
    return "unknown";
}

bool preset_from_name(const std::string& name, Preset& out) {
    for (Preset p : {Preset::fig2_schemes, Preset::fig3_power, Preset::fig4_correlation,
                     Preset::bound_validation, Preset::custom}) {
        if (name == preset_name(p)) {
            out = p;
            return true;
        }
    }
    return false;
}

ExperimentSpec preset_spec(Preset preset) {
    ExperimentSpec spec;
    spec.preset = preset;
    // Desk-scale defaults: Table-1 values for N_v, N_t, N_u; N_c shrunk to
    // 64; one tap per group so the spreading stays exactly orthogonal.
    spec.base = SystemConfig{};
    spec.base.trials = 2000000;
    switch (preset) {
        case Preset::fig2_schemes:
            spec.base.kappa = 0.3;
            spec.schemes = {Scheme::open_loop, Scheme::antenna_selection,
                            Scheme::statistical_waterfill, Scheme::ideal};
            spec.snr_grid_db = grid(0.0, 16.0, 2.0);
            spec.output_path = "fig2_schemes.csv";
            break;
        case Preset::fig3_power:
            spec.base.kappa = 0.1;
            spec.schemes = {Scheme::statistical_waterfill, Scheme::statistical_equal,
                            Scheme::statistical_single_beam};
            spec.snr_grid_db = grid(0.0, 24.0, 2.0);
            spec.output_path = "fig3_power.csv";
            break;
        case Preset::fig4_correlation:
            spec.schemes = {Scheme::statistical_waterfill};
            spec.kappas = {0.1, 0.4};
            spec.snr_grid_db = grid(0.0, 14.0, 2.0);
            spec.output_path = "fig4_correlation.csv";
            break;
        case Preset::bound_validation:
            spec.output_path = "bound_validation.csv";
            break;
        case Preset::custom:
            spec.schemes = {Scheme::open_loop, Scheme::statistical_waterfill};
            spec.snr_grid_db = grid(0.0, 16.0, 2.0);
            spec.output_path = "curves.csv";
            break;
    }
    return spec;
}

void apply_override(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "preset") {
        Preset p;
        if (!preset_from_name(value, p)) throw config_error("preset: unknown preset '" + value + "'");
        spec.preset = p;
    } else if (key == "n_c") {
        spec.base.n_c = static_cast<int>(parse_integer(key, value));
    } else if (key == "n_v") {
        spec.base.n_v = static_cast<int>(parse_integer(key, value));
    } else if (key == "n_t") {
        spec.base.n_t = static_cast<int>(parse_integer(key, value));
    } else if (key == "n_u") {
        spec.base.n_u = static_cast<int>(parse_integer(key, value));
    } else if (key == "l_taps") {
        spec.base.l_taps = static_cast<int>(parse_integer(key, value));
    } else if (key == "rho") {
        spec.base.rho = parse_real(key, value);
    } else if (key == "noise_var") {
        spec.base.noise_var = parse_real(key, value);
    } else if (key == "kappa") {
        spec.base.kappa = parse_real(key, value);
    } else if (key == "doppler_hz") {
        spec.base.doppler_hz = parse_real(key, value);
    } else if (key == "frame_s") {
        spec.base.frame_s = parse_real(key, value);
    } else if (key == "seed") {
        spec.base.seed = parse_u64(key, value);
    } else if (key == "trials") {
        spec.base.trials = parse_integer(key, value);
    } else if (key == "target_errors") {
        spec.target_errors = parse_integer(key, value);
    } else if (key == "threads") {
        spec.threads = static_cast<int>(parse_integer(key, value));
    } else if (key == "mc_draws") {
        spec.mc_draws = parse_integer(key, value);
    } else if (key == "snr_db") {
        spec.snr_grid_db = parse_real_list(key, value);
    } else if (key == "kappas") {
        spec.kappas = parse_real_list(key, value);
    } else if (key == "schemes") {
        std::vector<Scheme> schemes;
        for (const std::string& name : split_list(value)) {
            Scheme s;
            if (!scheme_from_name(name, s))
                throw config_error("schemes: unknown scheme '" + name + "'");
            schemes.push_back(s);
        }
        spec.schemes = std::move(schemes);
    } else if (key == "output") {
        spec.output_path = value;
    } else {
        throw config_error("unknown key '" + key + "'");
    }
}

ExperimentSpec parse_config(const std::string& text, Preset preset) {
    // A preset line in the file replaces the baseline before other keys.
    std::istringstream scan(text);
    std::string line;
    while (std::getline(scan, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos && trim(line.substr(0, eq)) == "preset") {
            Preset p;
            const std::string v = trim(line.substr(eq + 1));
            if (!preset_from_name(v, p)) throw config_error("preset: unknown preset '" + v + "'");
            preset = p;
        }
    }

    ExperimentSpec spec = preset_spec(preset);
    std::istringstream in(text);
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("malformed line (expected key = value): '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "preset") continue;  // already applied
        apply_override(spec, key, value);
    }
    resolve(spec);
    return spec;
}

void resolve(ExperimentSpec& spec) {
    spec.base.validate();
    if (spec.kappas.empty()) spec.kappas = {spec.base.kappa};
    for (double k : spec.kappas) {
        if (!(k >= 0.0 && k < 1.0)) throw config_error("kappas: must lie in [0, 1)");
    }
    if (spec.preset != Preset::bound_validation) {
        if (spec.schemes.empty()) throw config_error("schemes: none selected");
        if (spec.snr_grid_db.empty()) throw config_error("snr_db: empty grid");
    }
    if (spec.target_errors < 1) throw config_error("target_errors: must be >= 1");
    if (spec.mc_draws < 1) throw config_error("mc_draws: must be >= 1");
    std::sort(spec.snr_grid_db.begin(), spec.snr_grid_db.end());
    spec.snr_grid_db.erase(std::unique(spec.snr_grid_db.begin(), spec.snr_grid_db.end()),
                           spec.snr_grid_db.end());
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

namespace {

void write_provenance(std::string& out, const ExperimentSpec& spec) {
    const auto kv = [&out](const std::string& k, const std::string& v) {
        out += "# " + k + " = " + v + "\n";
    };
    kv("preset", preset_name(spec.preset));
    kv("n_c", std::to_string(spec.base.n_c));
    kv("n_v", std::to_string(spec.base.n_v));
    kv("n_t", std::to_string(spec.base.n_t));
    kv("n_u", std::to_string(spec.base.n_u));
    kv("l_taps", std::to_string(spec.base.l_taps));
    kv("rho", format_double(spec.base.rho));
    kv("noise_var", format_double(spec.base.noise_var));
    kv("kappa", format_double(spec.base.kappa));
    kv("doppler_hz", format_double(spec.base.doppler_hz));
    kv("frame_s", format_double(spec.base.frame_s));
    kv("seed", std::to_string(spec.base.seed));
    kv("trials", std::to_string(spec.base.trials));
    kv("target_errors", std::to_string(spec.target_errors));
    kv("mc_draws", std::to_string(spec.mc_draws));
    if (!spec.snr_grid_db.empty()) kv("snr_db", join_reals(spec.snr_grid_db));
    if (!spec.schemes.empty()) kv("schemes", join_schemes(spec.schemes));
    kv("kappas", join_reals(spec.kappas));
}

std::string run_bound_validation(const ExperimentSpec& spec, std::ostream* progress) {
    std::string out = "## stfsim bound validation\n";
    write_provenance(out, spec);
    out += "kappa,l_taps,n_v,eta,bound,bound_mc,rel_err\n";

    const double kappa_axis[] = {0.0, 0.3, 0.6};
    const int tap_axis[] = {1, 5, 20};
    const int spread_axis[] = {1, 8};
    const double eta_mult[] = {0.5, 1.0, 2.0, 4.0, 8.0};
    const double mu0 = Constellation::qam16().min_distance_sq();

    Rng pick(mix_seed(spec.base.seed, 0xb0u));
    for (int row = 0; row < 5; ++row) {
        const double kappa = kappa_axis[pick.uniform_int(3)];
        const int l_taps = tap_axis[pick.uniform_int(3)];
        const int n_v = spread_axis[pick.uniform_int(2)];
        const double eta = eta_mult[row] / (mu0 * l_taps * n_v);

        const CorrelationModel model = exponential_correlation(kappa, spec.base.n_t, l_taps);
        const CodewordDistance dist = ostbc_distance(mu0, 2);
        const EffectiveSinr sinr{eta, eta * l_taps * n_v};
        const Precoder prec = optimal_precoder(model, dist, sinr, n_v, 2);

        const double closed = pep_bound(prec, dist, model, sinr, n_v);
        Rng mc_rng(mix_seed(spec.base.seed, 0xb1u + row));
        const double mc =
            pep_bound_monte_carlo(prec, dist, model, sinr, n_v, spec.mc_draws, mc_rng);
        const double rel = std::abs(mc - closed) / closed;
        out += format_double(kappa) + "," + std::to_string(l_taps) + "," + std::to_string(n_v) +
               "," + format_double(eta) + "," + format_double(closed) + "," + format_double(mc) +
               "," + format_double(rel) + "\n";
        if (progress)
            (*progress) << "bound kappa=" << kappa << " L=" << l_taps << " Nv=" << n_v
                        << " rel_err=" << rel << "\n";
    }
    return out;
}

std::string run_sweeps(const ExperimentSpec& spec, std::ostream* progress) {
    std::string out = "## stfsim curve table\n";
    write_provenance(out, spec);
    out += "scheme,snr_db,ser,ci_half_width,errors,symbols,trials\n";

    SweepOptions opts;
    opts.trial_cap = spec.base.trials;
    opts.target_errors = spec.target_errors;
    opts.threads = spec.threads;

    const bool multi_kappa = spec.kappas.size() > 1;
    for (double kappa : spec.kappas) {
        SystemConfig cfg = spec.base;
        cfg.kappa = kappa;
        const std::vector<CurvePoint> points =
            run_ser_sweep(cfg, spec.schemes, spec.snr_grid_db, opts);
        for (const CurvePoint& p : points) {
            std::string label = p.scheme_label;
            if (multi_kappa) label += "-kappa" + format_double(kappa);
            out += label + "," + format_double(p.snr_db) + "," + format_double(p.ser) + "," +
                   format_double(p.ci_half_width) + "," + std::to_string(p.errors) + "," +
                   std::to_string(p.symbols) + "," + std::to_string(p.trials) + "\n";
            if (progress)
                (*progress) << label << " snr=" << p.snr_db << " ser=" << p.ser
                            << " trials=" << p.trials << "\n";
        }
    }
    return out;
}

}  // namespace

std::string run(const ExperimentSpec& spec, std::ostream* progress) {
    const std::string out = spec.preset == Preset::bound_validation
                                ? run_bound_validation(spec, progress)
                                : run_sweeps(spec, progress);
    if (!spec.output_path.empty()) {
        std::ofstream f(spec.output_path, std::ios::binary);
        if (!f) throw io_error("cannot open output path '" + spec.output_path + "'");
        f << out;
        if (!f) throw io_error("write failed for '" + spec.output_path + "'");
    }
    return out;
}

std::string provenance_to_config(const std::string& output_text) {
    std::istringstream in(output_text);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0 && line.find(" = ") != std::string::npos) {
            out += line.substr(2) + "\n";
        }
    }
    return out;
}

}  // namespace stfsim
