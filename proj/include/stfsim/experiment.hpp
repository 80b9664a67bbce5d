#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stfsim/link.hpp"

namespace stfsim {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Preset {
    fig2_schemes,
    fig3_power,
    fig4_correlation,
    bound_validation,
    custom,
};

const char* preset_name(Preset p);
bool preset_from_name(const std::string& name, Preset& out);

struct ExperimentSpec {
    Preset preset = Preset::custom;
    SystemConfig base;
    std::vector<double> snr_grid_db;
    std::vector<Scheme> schemes;
    std::vector<double> kappas;  // one sweep per kappa; labels get a suffix when > 1
    long target_errors = 300;
    int threads = 0;
    long mc_draws = 100000;  // bound-validation draws
    std::string output_path;
};

// Defaults for a preset (Table-1 style desk configuration).
ExperimentSpec preset_spec(Preset preset);

// Apply "key = value" lines ('#' comments, blank lines ignored) on top of
// the preset defaults. Throws config_error naming the offending key.
ExperimentSpec parse_config(const std::string& text, Preset preset);

// Single override, same key set as the config file.
void apply_override(ExperimentSpec& spec, const std::string& key, const std::string& value);

// Finishes validation (SystemConfig invariants, grid sorted, schemes known).
void resolve(ExperimentSpec& spec);

// Runs the experiment and writes the output file. Returns the file text
// (also written to spec.output_path unless it is empty).
std::string run(const ExperimentSpec& spec, std::ostream* progress = nullptr);

// Extracts the "key = value" provenance lines of an output file back into
// config-file text, so a run can be reproduced from its own header.
std::string provenance_to_config(const std::string& output_text);

// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

}  // namespace stfsim
