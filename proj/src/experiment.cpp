#include "molcomm/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "molcomm/analysis.hpp"

namespace molcomm {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 4> kExperimentNames = {"cir", "threshold-sweep", "offset-sweep",
                                                              "samples-sweep"};

const std::array<std::string_view, 20> kKnownKeys = {
    "experiment", "rx_radius",    "distance",  "diffusion", "sample_period",     "samples_per_bit", "seq_length",
    "molecules_per_one", "bit_one_prior", "detectors", "taus", "offset",          "offsets",         "samples",
    "sequences",  "fidelity",     "realizations", "seed",  "particle_substeps", "output"};

struct Entry {
    std::string where;
    json value;
};

using Entries = std::map<std::string, Entry, std::less<>>;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

void insert_entry(Entries& entries, const std::string& key, Entry entry) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
        throw ConfigError(entry.where, "unknown key '" + key + "'");
    if (entries.contains(key)) throw ConfigError(entry.where, "duplicate key '" + key + "'");
    entries.emplace(key, std::move(entry));
}

Entries parse_flat(const std::string& text) {
    Entries entries;
    std::istringstream in(text);
    std::string line;
    for (int number = 1; std::getline(in, line); ++number) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const std::string where = "line " + std::to_string(number);
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        if (key.empty()) throw ConfigError(where, "missing key before '='");
        insert_entry(entries, key, {where + " (" + key + ")", json(trim(std::string_view(content).substr(eq + 1)))});
    }
    return entries;
}

Entries parse_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("json", e.what());
    }
    if (!doc.is_object()) throw ConfigError("json", "top level must be an object");
    Entries entries;
    for (const auto& [key, value] : doc.items()) insert_entry(entries, key, {"field '" + key + "'", value});
    return entries;
}

double as_real(const Entry& e) {
    if (e.value.is_number()) return e.value.get<double>();
    if (e.value.is_string()) {
        const auto s = e.value.get<std::string>();
        std::size_t used = 0;
        try {
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
    }
    throw ConfigError(e.where, "expected a number, got " + e.value.dump());
}

std::int64_t as_integer(const Entry& e) {
    const double v = as_real(e);
    if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 9.0e15)
        throw ConfigError(e.where, "expected an integer, got " + e.value.dump());
    return static_cast<std::int64_t>(v);
}

std::uint64_t as_unsigned(const Entry& e) {
    if (e.value.is_number_unsigned()) return e.value.get<std::uint64_t>();
    if (e.value.is_string()) {
        const auto s = e.value.get<std::string>();
        std::size_t used = 0;
        try {
            if (!s.empty() && s[0] != '-') {
                const auto v = std::stoull(s, &used);
                if (used == s.size()) return v;
            }
        } catch (const std::exception&) {
        }
    }
    throw ConfigError(e.where, "expected a non-negative integer, got " + e.value.dump());
}

std::string as_string(const Entry& e) {
    if (e.value.is_string()) return e.value.get<std::string>();
    throw ConfigError(e.where, "expected a string, got " + e.value.dump());
}

// List items as strings; JSON arrays and comma-separated text both accepted.
std::vector<Entry> as_list(const Entry& e) {
    std::vector<Entry> items;
    if (e.value.is_array()) {
        for (const auto& v : e.value) items.push_back({e.where, v});
    } else if (e.value.is_string()) {
        std::istringstream in(e.value.get<std::string>());
        std::string item;
        while (std::getline(in, item, ','))
            if (auto t = trim(item); !t.empty()) items.push_back({e.where, json(t)});
    } else {
        items.push_back(e);
    }
    return items;
}

// Integer list with `a:b` ranges.
std::vector<std::int64_t> as_integer_list(const Entry& e) {
    std::vector<std::int64_t> out;
    for (const auto& item : as_list(e)) {
        if (item.value.is_string()) {
            const auto s = item.value.get<std::string>();
            if (const auto colon = s.find(':', 1); colon != std::string::npos) {
                const auto lo = as_integer({e.where, json(trim(s.substr(0, colon)))});
                const auto hi = as_integer({e.where, json(trim(s.substr(colon + 1)))});
                if (hi < lo) throw ConfigError(e.where, "empty range '" + s + "'");
                if (hi - lo > 1'000'000) throw ConfigError(e.where, "range '" + s + "' is too long");
                for (auto v = lo; v <= hi; ++v) out.push_back(v);
                continue;
            }
        }
        out.push_back(as_integer(item));
    }
    return out;
}

std::vector<double> as_real_list(const Entry& e) {
    std::vector<double> out;
    for (const auto& item : as_list(e)) {
        if (item.value.is_string() && item.value.get<std::string>().find(':', 1) != std::string::npos) {
            for (auto v : as_integer_list(item)) out.push_back(static_cast<double>(v));
            continue;
        }
        out.push_back(as_real(item));
    }
    return out;
}

int narrow_int(const Entry& e, std::int64_t v) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(e.where, "value out of range");
    return static_cast<int>(v);
}

template <class T>
void rethrow_as_validation(T&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

std::vector<std::int64_t> default_offsets(double sample_period) {
    std::vector<std::int64_t> offsets;
    const bool fine = std::abs(sample_period - 8e-3) < 1e-12;
    for (std::int64_t d = fine ? -6 : -2; d <= (fine ? 15 : 5); ++d) offsets.push_back(d);
    return offsets;
}

ChannelParams samples_sweep_params(const ExperimentConfig& config, int m) {
    ChannelParams params = config.channel;
    params.samples_per_bit = m;
    params.sample_period = config.symbol_period / m;
    return params;
}

std::string offset_ms(std::int64_t offset, double sample_period) {
    return format_real(static_cast<double>(offset) * sample_period * 1e3);
}

// Empirical error with the receiver's own decisions fed back, and with genie feedback.
struct Empirical {
    ErrorReport realized;
    double genie = 0.0;
};

Empirical measure_both(DetectorKind kind, double tau, const ChannelResponse& response,
                       std::span<const BitSequence> sequences, std::span<const ObservationTrace> traces,
                       std::int64_t offset) {
    Empirical out;
    out.realized = measure_ber_on_traces({kind, tau}, response, sequences, traces, offset, FeedbackMode::None);
    out.genie = uses_feedback(kind)
                    ? measure_ber_on_traces({kind, tau}, response, sequences, traces, offset, FeedbackMode::Genie).average
                    : out.realized.average;
    return out;
}

void write_rows(std::ostream& out, const ResultTable& table) {
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw OutputError("cannot write output file '" + path.string() + "'");
    return out;
}

}  // namespace

std::string_view to_string(ExperimentType type) { return kExperimentNames[static_cast<std::size_t>(type)]; }

ExperimentType parse_experiment_type(std::string_view name) {
    for (std::size_t i = 0; i < kExperimentNames.size(); ++i)
        if (kExperimentNames[i] == name) return static_cast<ExperimentType>(i);
    throw ConfigError("experiment", "unknown experiment '" + std::string(name) + "'");
}

std::string format_real(double value) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", value);
    return buf.data();
}

std::vector<double> default_threshold_grid(int samples_per_bit) {
    return integer_grid(0, std::max(100, 4 * samples_per_bit));
}

void ExperimentConfig::validate() const {
    rethrow_as_validation([&] {
        channel.validate();
        sim.validate();
    });
    if (sequences < 1) throw ValidationError("sequences must be >= 1");
    if (experiment == ExperimentType::Cir) return;

    if (detectors.empty()) throw ValidationError("detector list is empty");
    if (taus.empty()) throw ValidationError("threshold grid is empty");
    for (double t : taus)
        if (!(t >= 0) || !std::isfinite(t)) throw ValidationError("thresholds must be finite and non-negative");

    const auto check_offset = [&](std::int64_t d, const ChannelParams& params) {
        if (std::abs(d) >= params.total_samples())
            throw ValidationError("offset " + std::to_string(d) + " violates |offset| < M*L = " +
                                  std::to_string(params.total_samples()));
    };
    switch (experiment) {
    case ExperimentType::ThresholdSweep:
        check_offset(offset, channel);
        break;
    case ExperimentType::OffsetSweep:
        if (offsets.empty()) throw ValidationError("offset list is empty");
        for (auto d : offsets) check_offset(d, channel);
        break;
    case ExperimentType::SamplesSweep:
        if (samples.empty()) throw ValidationError("samples list is empty");
        if (!(symbol_period > 0)) throw ValidationError("symbol period must be positive");
        for (int m : samples) {
            if (m < 1) throw ValidationError("samples entries must be >= 1");
            rethrow_as_validation([&] { samples_sweep_params(*this, m).validate(); });
        }
        break;
    case ExperimentType::Cir:
        break;
    }
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = to_string(experiment);
    j["rx_radius"] = channel.rx_radius;
    j["distance"] = channel.distance;
    j["diffusion"] = channel.diffusion;
    j["sample_period"] = channel.sample_period;
    j["samples_per_bit"] = channel.samples_per_bit;
    j["seq_length"] = channel.seq_length;
    j["molecules_per_one"] = channel.molecules_per_one;
    j["bit_one_prior"] = channel.bit_one_prior;
    j["detectors"] = json::array();
    for (auto k : detectors) j["detectors"].push_back(to_string(k));
    j["taus"] = taus;
    j["offset"] = offset;
    j["offsets"] = offsets;
    j["samples"] = samples;
    j["symbol_period"] = symbol_period;
    j["sequences"] = sequences;
    j["fidelity"] = to_string(sim.fidelity);
    j["realizations"] = sim.realizations;
    j["seed"] = sim.rng_seed;
    j["particle_substeps"] = sim.particle_substeps;
    j["output"] = output_path;
    return j;
}

ExperimentConfig parse_config_text(const std::string& text, std::optional<ExperimentType> fallback_experiment) {
    const std::string body = trim(text);
    const Entries entries = (!body.empty() && body.front() == '{') ? parse_json(body) : parse_flat(body);
    const auto find = [&](std::string_view key) -> const Entry* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };

    ExperimentConfig config;
    if (const auto* e = find("experiment")) {
        config.experiment = parse_experiment_type(as_string(*e));
        if (fallback_experiment && *fallback_experiment != config.experiment)
            throw ConfigError(e->where, "config names experiment '" + std::string(to_string(config.experiment)) +
                                            "' but '" + std::string(to_string(*fallback_experiment)) +
                                            "' was requested");
    } else if (fallback_experiment) {
        config.experiment = *fallback_experiment;
    } else {
        throw ConfigError("experiment", "no experiment given");
    }

    if (config.experiment == ExperimentType::Cir) {
        config.channel.sample_period = 1e-3;
        config.channel.samples_per_bit = 200;
        config.channel.seq_length = 1;
    }

    auto& ch = config.channel;
    if (const auto* e = find("rx_radius")) ch.rx_radius = as_real(*e);
    if (const auto* e = find("distance")) ch.distance = as_real(*e);
    if (const auto* e = find("diffusion")) ch.diffusion = as_real(*e);
    if (const auto* e = find("sample_period")) ch.sample_period = as_real(*e);
    if (const auto* e = find("samples_per_bit")) ch.samples_per_bit = narrow_int(*e, as_integer(*e));
    if (const auto* e = find("seq_length")) ch.seq_length = narrow_int(*e, as_integer(*e));
    if (const auto* e = find("molecules_per_one")) ch.molecules_per_one = narrow_int(*e, as_integer(*e));
    if (const auto* e = find("bit_one_prior")) ch.bit_one_prior = as_real(*e);
    config.symbol_period = ch.sample_period * ch.samples_per_bit;

    if (const auto* e = find("detectors")) {
        for (const auto& item : as_list(*e)) {
            try {
                config.detectors.push_back(parse_detector_kind(as_string(item)));
            } catch (const std::invalid_argument& ex) {
                throw ConfigError(e->where, ex.what());
            }
        }
    } else {
        config.detectors.assign(kAllDetectors.begin(), kAllDetectors.end());
    }

    if (const auto* e = find("offset")) config.offset = as_integer(*e);
    config.offsets = find("offsets") ? as_integer_list(*find("offsets")) : default_offsets(ch.sample_period);
    if (const auto* e = find("samples")) {
        for (auto v : as_integer_list(*e)) config.samples.push_back(narrow_int(*e, v));
    } else {
        config.samples = {2, 5, 10, 25, 50};
    }
    if (const auto* e = find("taus")) {
        config.taus = as_real_list(*e);
    } else {
        int widest = ch.samples_per_bit;
        if (config.experiment == ExperimentType::SamplesSweep && !config.samples.empty())
            widest = *std::max_element(config.samples.begin(), config.samples.end());
        config.taus = default_threshold_grid(widest);
    }

    if (const auto* e = find("sequences")) config.sequences = narrow_int(*e, as_integer(*e));
    if (const auto* e = find("fidelity")) {
        try {
            config.sim.fidelity = parse_fidelity(as_string(*e));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(e->where, ex.what());
        }
    }
    if (const auto* e = find("realizations")) config.sim.realizations = narrow_int(*e, as_integer(*e));
    if (const auto* e = find("seed")) config.sim.rng_seed = as_unsigned(*e);
    if (const auto* e = find("particle_substeps")) config.sim.particle_substeps = narrow_int(*e, as_integer(*e));
    if (const auto* e = find("output")) config.output_path = as_string(*e);

    config.validate();
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<ExperimentType> fallback_experiment) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot read config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), fallback_experiment);
}

std::vector<std::string> result_columns(ExperimentType type) {
    switch (type) {
    case ExperimentType::Cir: return {"k", "time_s", "expected", "realization", "seed"};
    case ExperimentType::ThresholdSweep:
        return {"detector", "offset", "tau", "analytic", "empirical", "empirical_genie", "empirical_stderr", "seed"};
    case ExperimentType::OffsetSweep:
        return {"detector", "offset", "offset_ms", "optimal_tau", "analytic", "empirical", "empirical_genie",
                "empirical_stderr", "seed"};
    case ExperimentType::SamplesSweep:
        return {"detector", "samples_per_bit", "sample_period_s", "optimal_tau", "analytic", "empirical",
                "empirical_genie", "empirical_stderr", "seed"};
    }
    return {};
}

ResultTable compute_experiment(const ExperimentConfig& config) {
    config.validate();
    ResultTable table;
    table.header = result_columns(config.experiment);
    const auto seed = config.sim.rng_seed;
    const std::string seed_text = std::to_string(seed);
    table.metadata["artifact"] = "molcomm";
    table.metadata["version"] = kArtifactVersion;
    table.metadata["experiment"] = to_string(config.experiment);
    table.metadata["seed"] = seed;
    table.metadata["config"] = config.to_json();

    switch (config.experiment) {
    case ExperimentType::Cir: {
        const ChannelResponse response(config.channel);
        BitSequence bits(static_cast<std::size_t>(config.channel.seq_length), 0);
        bits[0] = 1;
        Rng rng(derive_seed(seed, 0));
        const auto trace = draw_trace(response, bits, 0, config.sim, rng);
        for (std::int64_t k = 0; k <= config.channel.total_samples(); ++k) {
            const auto observed = k == 0 ? 0 : trace.counts[static_cast<std::size_t>(k - 1)];
            table.rows.push_back({std::to_string(k), format_real(static_cast<double>(k) * config.channel.sample_period),
                                  format_real(response.signal(bits, k)), std::to_string(observed), seed_text});
        }
        break;
    }
    case ExperimentType::ThresholdSweep: {
        const auto& params = config.channel;
        const ChannelResponse response(params);
        const auto sequences = random_sequences(params, static_cast<std::size_t>(config.sequences), seed);
        const auto traces = simulate_traces(params, sequences, config.offset, config.sim);
        for (auto kind : config.detectors) {
            const auto curve = error_curve(kind, params, sequences, config.offset, config.taus);
            for (std::size_t t = 0; t < config.taus.size(); ++t) {
                const auto emp = measure_both(kind, config.taus[t], response, sequences, traces, config.offset);
                table.rows.push_back({std::string(to_string(kind)), std::to_string(config.offset),
                                      format_real(config.taus[t]), format_real(curve[t]),
                                      format_real(emp.realized.average), format_real(emp.genie),
                                      format_real(emp.realized.standard_error()), seed_text});
            }
        }
        table.metadata["offset_ms"] = config.offset * params.sample_period * 1e3;
        break;
    }
    case ExperimentType::OffsetSweep: {
        const auto& params = config.channel;
        const ChannelResponse response(params);
        const auto sequences = random_sequences(params, static_cast<std::size_t>(config.sequences), seed);
        json offsets_ms = json::array();
        for (auto offset : config.offsets) {
            offsets_ms.push_back(offset * params.sample_period * 1e3);
            const auto traces = simulate_traces(params, sequences, offset, config.sim);
            for (auto kind : config.detectors) {
                const auto best = optimal_threshold({kind, 0.0}, params, sequences, offset, config.taus);
                const auto emp = measure_both(kind, best.threshold, response, sequences, traces, offset);
                table.rows.push_back({std::string(to_string(kind)), std::to_string(offset),
                                      offset_ms(offset, params.sample_period), format_real(best.threshold),
                                      format_real(best.error), format_real(emp.realized.average),
                                      format_real(emp.genie), format_real(emp.realized.standard_error()), seed_text});
            }
        }
        table.metadata["offsets_ms"] = offsets_ms;
        break;
    }
    case ExperimentType::SamplesSweep: {
        for (int m : config.samples) {
            const auto params = samples_sweep_params(config, m);
            const ChannelResponse response(params);
            const auto sequences = random_sequences(params, static_cast<std::size_t>(config.sequences), seed);
            const auto traces = simulate_traces(params, sequences, 0, config.sim);
            for (auto kind : config.detectors) {
                const auto best = optimal_threshold({kind, 0.0}, params, sequences, 0, config.taus);
                const auto emp = measure_both(kind, best.threshold, response, sequences, traces, 0);
                table.rows.push_back({std::string(to_string(kind)), std::to_string(m),
                                      format_real(params.sample_period), format_real(best.threshold),
                                      format_real(best.error), format_real(emp.realized.average),
                                      format_real(emp.genie), format_real(emp.realized.standard_error()), seed_text});
            }
        }
        break;
    }
    }
    table.metadata["columns"] = table.header;
    table.metadata["row_count"] = table.rows.size();
    return table;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
    auto meta = csv_path;
    if (meta.extension() == ".json") return meta += ".meta.json";
    return meta.replace_extension(".json");
}

void write_result(const ResultTable& table, const std::filesystem::path& csv_path) {
    auto csv = open_output(csv_path);
    auto meta = open_output(metadata_path(csv_path));
    write_rows(csv, table);
    meta << table.metadata.dump(2) << '\n';
    if (!csv || !meta) throw OutputError("failed while writing '" + csv_path.string() + "'");
}

std::filesystem::path run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::filesystem::path csv_path =
        config.output_path.empty() ? std::string(to_string(config.experiment)) + ".csv" : config.output_path;
    // Fail on an unwritable destination before spending time on the run.
    open_output(csv_path);
    open_output(metadata_path(csv_path));
    write_result(compute_experiment(config), csv_path);
    return csv_path;
}

}  // namespace molcomm
