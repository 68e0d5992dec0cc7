#pragma once

// Scenario files: a JSON description of one experiment, its parameters and
// a master seed. See scenarios/README.md for the schema.

#include "lowpapr/experiments.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowpapr {

inline constexpr int kCsvSchemaVersion = 1;

enum class Experiment { PaprCcdf, OobPsd, UncodedBer, Capacity, SinrTable };

std::string_view to_string(Experiment e);

struct ValidationIssue {
    std::string path;  // dotted field path, e.g. "ofdm.n_sc" or "curves[2].scheme"
    std::string message;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

struct CurveSpec {
    Scheme scheme = Scheme::Qpsk;
    double beta_db = 0.0;

    /// "QPSK", "PI2_BPSK+FDSS(-14dB)", ...
    std::string label() const;
};

struct Grid {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

struct Scenario {
    std::string name;
    std::string description;
    Experiment experiment = Experiment::PaprCcdf;
    std::uint64_t seed = 0;
    std::int64_t trials = 1;

    OfdmConfig ofdm;
    std::vector<CurveSpec> curves;

    std::string channel = "AWGN";
    std::optional<double> delay_scaling_s;
    double doppler_hz = 0.0;
    std::vector<EqualizerKind> equalizers{EqualizerKind::Mmse};
    std::vector<double> snr_db;
    double mse_db = -std::numeric_limits<double>::infinity();

    BerOptions ber;
    Grid ccdf_grid{0.0, 12.0, 0.01};
    Grid psd_grid{-96.0, 192.0, 0.25};

    /// Canonical JSON echo of the parsed scenario.
    std::string echo;
};

/// Parses and validates scenario JSON. Throws ValidationError listing every
/// problem found.
Scenario parse_scenario(const std::string& json_text);

/// Semantic checks beyond parsing (profile resolvable, CP coverage, even
/// subcarrier counts, ...). Empty means valid.
std::vector<ValidationIssue> validate(const Scenario& s);

std::vector<std::string> bundled_scenario_names();
/// JSON text of a bundled scenario; throws DomainError for unknown names.
const std::string& bundled_scenario_text(const std::string& name);

/// Resolves a bundled name or a path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
};

struct RunSummary {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
    std::int64_t singular_resamples = 0;
    double wall_time_s = 0.0;
    /// Headline numbers per curve, e.g. the CCDF readout at 1e-3.
    std::vector<std::pair<std::string, double>> metrics;
};

/// Runs the scenario and writes CSV files plus manifest.json into out_dir.
RunSummary run(Scenario scenario, const RunOptions& opts);

}  // namespace lowpapr
