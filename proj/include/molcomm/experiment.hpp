#ifndef MOLCOMM_EXPERIMENT_HPP
#define MOLCOMM_EXPERIMENT_HPP

// Experiment harness behind the `molcomm` CLI.
//
// Config files are either JSON objects or flat `key = value` lines (`#`
// starts a comment). Lists are JSON arrays or comma-separated values; an item
// of the form `a:b` expands to the integers a..b. Recognised keys:
//
//   experiment          cir | threshold-sweep | offset-sweep | samples-sweep
//   rx_radius distance diffusion sample_period        SI units (m, m^2/s, s)
//   samples_per_bit seq_length molecules_per_one bit_one_prior
//   detectors           list of detector names (default: all five)
//   taus                threshold grid (default 0..max(100, 4M))
//   offset              receiver offset in samples for threshold-sweep
//   offsets             offset-sweep axis (default -6:15 at 8 ms, else -2:5)
//   samples             samples-sweep axis (default 2,5,10,25,50)
//   sequences           random sequences per sweep point (default 1000)
//   fidelity realizations seed particle_substeps
//   output              CSV path; metadata goes next to it with a .json suffix
//
// Unset channel fields take the reference values; cir defaults to a single
// release sampled every 1 ms for 200 ms.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "molcomm/channel.hpp"
#include "molcomm/detectors.hpp"
#include "molcomm/simulation.hpp"

namespace molcomm {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class ExperimentType { Cir, ThresholdSweep, OffsetSweep, SamplesSweep };

std::string_view to_string(ExperimentType type);
ExperimentType parse_experiment_type(std::string_view name);

/// Malformed or unreadable config. `where` is "line N" or a field name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

/// Well-formed config whose values violate a parameter invariant.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Output file could not be created or written.
class OutputError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    ExperimentType experiment = ExperimentType::ThresholdSweep;
    ChannelParams channel;
    std::vector<DetectorKind> detectors;
    std::vector<double> taus;
    std::int64_t offset = 0;
    std::vector<std::int64_t> offsets;
    std::vector<int> samples;
    /// M*dt held fixed by samples-sweep.
    double symbol_period = 0.2;
    int sequences = 1000;
    SimConfig sim;
    std::string output_path;

    /// Throws ValidationError.
    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Parses config text (JSON if it starts with '{', flat key-value otherwise),
/// applies defaults for `fallback_experiment` when the text names none, and
/// validates. Throws ConfigError or ValidationError.
ExperimentConfig parse_config_text(const std::string& text,
                                   std::optional<ExperimentType> fallback_experiment = std::nullopt);
ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::optional<ExperimentType> fallback_experiment = std::nullopt);

/// Default threshold grid 0..max(100, 4M).
std::vector<double> default_threshold_grid(int samples_per_bit);

struct ResultTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json metadata;
};

/// Fixed column set per experiment type.
std::vector<std::string> result_columns(ExperimentType type);

/// Runs the experiment in memory.
ResultTable compute_experiment(const ExperimentConfig& config);

/// Writes `table` as CSV to `csv_path` and its metadata next to it.
void write_result(const ResultTable& table, const std::filesystem::path& csv_path);

std::filesystem::path metadata_path(const std::filesystem::path& csv_path);

/// Validates, checks the output is writable, computes, writes. Returns the CSV path.
std::filesystem::path run_experiment(const ExperimentConfig& config);

/// %.17g
std::string format_real(double value);

}  // namespace molcomm

#endif  // MOLCOMM_EXPERIMENT_HPP
