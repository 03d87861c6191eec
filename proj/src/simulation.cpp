#include "molcomm/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace molcomm {

namespace {

// Counter reserved for the sequence stream; trace counters stay below it.
constexpr std::uint64_t kSequenceStream = std::uint64_t{1} << 63;

ObservationTrace from_transmitter_counts(const ChannelParams& params, std::span<const std::int64_t> by_k,
                                         std::int64_t offset) {
    // by_k[k] for k = 0..M*L; samples outside {1..M*L} read as zero.
    const std::int64_t total = params.total_samples();
    ObservationTrace trace;
    trace.counts.assign(static_cast<std::size_t>(total), 0);
    for (std::int64_t j = 1; j <= total; ++j) {
        const auto k = transmitter_index(j, offset);
        if (k >= 1 && k <= total) trace.counts[static_cast<std::size_t>(j - 1)] = by_k[static_cast<std::size_t>(k)];
    }
    return trace;
}

void validate_inputs(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset) {
    params.validate();
    validate_bits(params, bits);
    if (std::abs(offset) >= params.total_samples()) throw std::invalid_argument("|offset| must be < M*L");
}

ObservationTrace poisson_trace(const ChannelResponse& response, std::span<const Bit> bits, std::int64_t offset,
                               Rng& rng) {
    const auto& params = response.params();
    std::vector<std::int64_t> by_k(static_cast<std::size_t>(params.total_samples()) + 1, 0);
    for (std::size_t k = 1; k < by_k.size(); ++k) {
        const double mean = response.signal(bits, static_cast<std::int64_t>(k));
        if (mean > 0) by_k[k] = std::poisson_distribution<std::int64_t>(mean)(rng);
    }
    return from_transmitter_counts(params, by_k, offset);
}

}  // namespace

std::string_view to_string(Fidelity fidelity) {
    switch (fidelity) {
    case Fidelity::Poisson: return "poisson";
    case Fidelity::Binomial: return "binomial";
    case Fidelity::Particle: return "particle";
    }
    return "?";
}

Fidelity parse_fidelity(std::string_view name) {
    if (name == "poisson") return Fidelity::Poisson;
    if (name == "binomial") return Fidelity::Binomial;
    if (name == "particle") return Fidelity::Particle;
    throw std::invalid_argument("unknown fidelity '" + std::string(name) + "'");
}

void SimConfig::validate() const {
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
    if (particle_substeps < 1) throw std::invalid_argument("particle_substeps must be >= 1");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<BitSequence> random_sequences(const ChannelParams& params, std::size_t count, std::uint64_t seed) {
    params.validate();
    Rng rng(derive_seed(seed, kSequenceStream));
    std::bernoulli_distribution one(params.bit_one_prior);
    std::vector<BitSequence> out(count, BitSequence(static_cast<std::size_t>(params.seq_length)));
    for (auto& bits : out)
        for (auto& b : bits) b = one(rng) ? 1 : 0;
    return out;
}

ObservationTrace draw_trace_poisson(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset,
                                    Rng& rng) {
    validate_inputs(params, bits, offset);
    return poisson_trace(ChannelResponse(params), bits, offset, rng);
}

ObservationTrace draw_trace_binomial(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset,
                                     Rng& rng) {
    return draw_trace_binomial(ChannelResponse(params), bits, offset, rng);
}

ObservationTrace draw_trace_binomial(const ChannelResponse& response, std::span<const Bit> bits, std::int64_t offset,
                                     Rng& rng) {
    const auto& params = response.params();
    validate_inputs(params, bits, offset);
    const std::int64_t m = params.samples_per_bit;
    std::vector<std::int64_t> by_k(static_cast<std::size_t>(params.total_samples()) + 1, 0);
    for (std::size_t k = 1; k < by_k.size(); ++k) {
        const auto kk = static_cast<std::int64_t>(k);
        for (std::int64_t l = 0; l <= kk / m && l < params.seq_length; ++l) {
            if (!bits[static_cast<std::size_t>(l)]) continue;
            const double p = response.probability(kk - l * m);
            if (p > 0) by_k[k] += std::binomial_distribution<std::int64_t>(params.molecules_per_one, p)(rng);
        }
    }
    return from_transmitter_counts(params, by_k, offset);
}

ObservationTrace simulate_particles(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset,
                                    const SimConfig& config, Rng& rng) {
    validate_inputs(params, bits, offset);
    config.validate();
    const std::int64_t m = params.samples_per_bit;
    const std::int64_t total = params.total_samples();
    const double step_sigma = std::sqrt(2.0 * params.diffusion * params.sample_period / config.particle_substeps);
    const double r2 = params.rx_radius * params.rx_radius;
    std::normal_distribution<double> gauss(0.0, step_sigma);

    ParticleState state;
    for (std::int64_t l = 0; l < params.seq_length; ++l)
        if (bits[static_cast<std::size_t>(l)]) state.release_schedule.emplace_back(l * m, params.molecules_per_one);

    std::vector<std::int64_t> by_k(static_cast<std::size_t>(total) + 1, 0);
    auto next_release = state.release_schedule.begin();
    for (std::int64_t k = 0; k <= total; ++k) {
        if (k > 0) {
            for (auto& pos : state.positions)
                for (int s = 0; s < config.particle_substeps; ++s)
                    for (auto& x : pos) x += gauss(rng);
            std::int64_t inside = 0;
            for (const auto& pos : state.positions) {
                const double dx = pos[0] - params.distance;
                if (dx * dx + pos[1] * pos[1] + pos[2] * pos[2] <= r2) ++inside;
            }
            by_k[static_cast<std::size_t>(k)] = inside;
        }
        // Releases happen at the sample instant, after it has been observed.
        for (; next_release != state.release_schedule.end() && next_release->first == k; ++next_release)
            state.positions.insert(state.positions.end(), static_cast<std::size_t>(next_release->second),
                                   std::array<double, 3>{0.0, 0.0, 0.0});
    }
    return from_transmitter_counts(params, by_k, offset);
}

ObservationTrace draw_trace(const ChannelResponse& response, std::span<const Bit> bits, std::int64_t offset,
                            const SimConfig& config, Rng& rng) {
    switch (config.fidelity) {
    case Fidelity::Poisson:
        validate_inputs(response.params(), bits, offset);
        return poisson_trace(response, bits, offset, rng);
    case Fidelity::Binomial: return draw_trace_binomial(response, bits, offset, rng);
    case Fidelity::Particle: return simulate_particles(response.params(), bits, offset, config, rng);
    }
    throw std::invalid_argument("invalid fidelity");
}

std::vector<ObservationTrace> simulate_traces(const ChannelParams& params, std::span<const BitSequence> sequences,
                                              std::int64_t offset, const SimConfig& config) {
    config.validate();
    const ChannelResponse response(params);
    const auto per = static_cast<std::uint64_t>(config.realizations);
    std::vector<ObservationTrace> traces;
    traces.reserve(sequences.size() * per);
    for (std::size_t i = 0; i < sequences.size(); ++i)
        for (std::uint64_t r = 0; r < per; ++r) {
            Rng rng(derive_seed(config.rng_seed, i * per + r));
            traces.push_back(draw_trace(response, sequences[i], offset, config, rng));
        }
    return traces;
}

ErrorReport measure_ber_on_traces(const DetectorSpec& spec, const ChannelResponse& response,
                                  std::span<const BitSequence> sequences, std::span<const ObservationTrace> traces,
                                  std::int64_t offset, FeedbackMode feedback) {
    spec.validate();
    if (sequences.empty() || traces.empty() || traces.size() % sequences.size() != 0)
        throw std::invalid_argument("measure_ber: traces must be a whole number of realizations per sequence");
    const std::size_t per = traces.size() / sequences.size();
    const auto length = static_cast<std::size_t>(response.params().seq_length);

    ErrorReport report;
    report.kind = spec.kind;
    report.threshold = spec.threshold;
    report.offset = offset;
    report.empirical = true;
    report.per_bit.assign(length, 0.0);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        std::size_t sequence_errors = 0;
        for (std::size_t r = 0; r < per; ++r) {
            const auto& trace = traces[i * per + r];
            const auto decided = feedback == FeedbackMode::Genie
                                     ? detect_with_genie(spec, trace, response, sequences[i])
                                     : detect(spec, trace, response);
            for (std::size_t l = 0; l < length; ++l)
                if (decided[l] != sequences[i][l]) {
                    report.per_bit[l] += 1.0;
                    ++sequence_errors;
                }
        }
        errors += sequence_errors;
        report.per_sequence.push_back(static_cast<double>(sequence_errors) / static_cast<double>(per * length));
    }
    for (auto& p : report.per_bit) p /= static_cast<double>(traces.size());
    report.bit_count = traces.size() * length;
    report.average = static_cast<double>(errors) / static_cast<double>(report.bit_count);
    return report;
}

ErrorReport measure_ber(const DetectorSpec& spec, const ChannelParams& params, std::span<const BitSequence> sequences,
                        std::int64_t offset, double tau, const SimConfig& config, FeedbackMode feedback) {
    const auto traces = simulate_traces(params, sequences, offset, config);
    return measure_ber_on_traces(DetectorSpec{spec.kind, tau}, ChannelResponse(params), sequences, traces, offset,
                                 feedback);
}

}  // namespace molcomm
