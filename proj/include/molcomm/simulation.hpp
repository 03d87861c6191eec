#ifndef MOLCOMM_SIMULATION_HPP
#define MOLCOMM_SIMULATION_HPP

// Monte Carlo receiver traces and empirical bit error rates.
//
// Three fidelities are available:
//   poisson   each y[j] ~ Poisson(expected_signal), the model the analysis uses
//   binomial  each y[j] = sum over earlier 1-bits of Binomial(N, p[k - lM])
//   particle  N free Brownian molecules per 1-bit, counted inside the sphere
//
// Seeding: the trace for (sequence i, realization r) uses an engine seeded
// with derive_seed(rng_seed, i * realizations + r). Results therefore do not
// depend on evaluation order.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "molcomm/analysis.hpp"
#include "molcomm/channel.hpp"
#include "molcomm/detectors.hpp"

namespace molcomm {

enum class Fidelity { Poisson, Binomial, Particle };

std::string_view to_string(Fidelity fidelity);
Fidelity parse_fidelity(std::string_view name);

struct SimConfig {
    Fidelity fidelity = Fidelity::Poisson;
    int realizations = 1;
    std::uint64_t rng_seed = 1;
    /// Brownian substeps per sample period (particle fidelity only).
    int particle_substeps = 10;

    void validate() const;
};

using Rng = std::mt19937_64;

/// SplitMix64 finaliser over (seed, counter).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter);

/// `count` independent sequences of seq_length bits with Pr{1} = bit_one_prior.
std::vector<BitSequence> random_sequences(const ChannelParams& params, std::size_t count, std::uint64_t seed);

ObservationTrace draw_trace_poisson(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset,
                                    Rng& rng);
ObservationTrace draw_trace_binomial(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset,
                                     Rng& rng);
/// Binomial draw over an explicit hitting-probability table.
ObservationTrace draw_trace_binomial(const ChannelResponse& response, std::span<const Bit> bits, std::int64_t offset,
                                     Rng& rng);

/// Free molecules in unbounded 3D space. The transmitter sits at the origin
/// and the receiver centre at (d, 0, 0).
struct ParticleState {
    std::vector<std::array<double, 3>> positions;
    /// (transmitter sample index, molecules released)
    std::vector<std::pair<std::int64_t, std::int64_t>> release_schedule;
};

ObservationTrace simulate_particles(const ChannelParams& params, std::span<const Bit> bits, std::int64_t offset,
                                    const SimConfig& config, Rng& rng);

/// One trace per call, dispatching on config.fidelity.
ObservationTrace draw_trace(const ChannelResponse& response, std::span<const Bit> bits, std::int64_t offset,
                            const SimConfig& config, Rng& rng);

/// config.realizations traces per sequence, ordered sequence-major.
std::vector<ObservationTrace> simulate_traces(const ChannelParams& params, std::span<const BitSequence> sequences,
                                              std::int64_t offset, const SimConfig& config);

/// Empirical error fractions from pre-drawn traces (realizations per
/// sequence = traces.size() / sequences.size()). Genie feedback feeds DF
/// detectors the true bits instead of their own decisions.
ErrorReport measure_ber_on_traces(const DetectorSpec& spec, const ChannelResponse& response,
                                  std::span<const BitSequence> sequences, std::span<const ObservationTrace> traces,
                                  std::int64_t offset, FeedbackMode feedback = FeedbackMode::None);

ErrorReport measure_ber(const DetectorSpec& spec, const ChannelParams& params, std::span<const BitSequence> sequences,
                        std::int64_t offset, double tau, const SimConfig& config,
                        FeedbackMode feedback = FeedbackMode::None);

}  // namespace molcomm

#endif  // MOLCOMM_SIMULATION_HPP
