#ifndef MOLCOMM_CHANNEL_HPP
#define MOLCOMM_CHANNEL_HPP

// Deterministic part of the diffusive channel: the probability that a single
// released molecule sits inside a passive spherical receiver at a sample
// instant, and the expected molecule counts that follow from it.
//
// Index conventions used throughout the library:
//   k  transmitter sample index; bit l is released at k = l*M.
//   j  receiver sample index, 1-based, j in {1, ..., M*L}. Bit l is decided
//      from the window j in {l*M + 1, ..., (l+1)*M}.
// A receiver running `offset` samples ahead of the transmitter takes its
// sample j at transmitter index k = j - offset (see transmitter_index()).

#include <cstdint>
#include <span>
#include <vector>

namespace molcomm {

using Bit = std::uint8_t;
using BitSequence = std::vector<Bit>;

/// Physical and protocol constants of the link. Defaults are the reference
/// environment: 0.5 um receiver at 5 um, D = 1e-10 m^2/s, 40 ms sampling,
/// 5 samples per bit, 20 bits, 2e4 molecules per bit-1, equiprobable bits.
struct ChannelParams {
    double rx_radius = 0.5e-6;      // m
    double distance = 5e-6;         // m, transmitter to receiver centre
    double diffusion = 1e-10;       // m^2/s
    double sample_period = 40e-3;   // s
    int samples_per_bit = 5;        // M
    int seq_length = 20;            // L
    int molecules_per_one = 20000;  // N
    double bit_one_prior = 0.5;     // P1

    /// Throws std::invalid_argument naming the first violated field.
    void validate() const;

    [[nodiscard]] double rx_volume() const;
    [[nodiscard]] double bit_zero_prior() const { return 1.0 - bit_one_prior; }
    [[nodiscard]] int total_samples() const { return samples_per_bit * seq_length; }
};

/// Throws std::invalid_argument unless bits has seq_length binary entries.
void validate_bits(const ChannelParams& params, std::span<const Bit> bits);

/// Transmitter sample index observed by receiver sample `j` when the receiver
/// clock leads the transmitter by `offset` samples. Positive offsets pull the
/// window earlier; negative offsets push it later, into future bits.
constexpr std::int64_t transmitter_index(std::int64_t j, std::int64_t offset) { return j - offset; }

/// Probability that one molecule released at k = 0 is inside the receiver at
/// sample k. Exactly 0 at k = 0. Throws on negative k.
double hitting_probability(const ChannelParams& params, std::int64_t k);

/// Mean count from a single release of N molecules, k samples after release.
double expected_single_release(const ChannelParams& params, std::int64_t k);

/// Mean count at transmitter index k for the whole sequence. Zero outside
/// {1, ..., M*L}.
double expected_signal(const ChannelParams& params, std::span<const Bit> bits, std::int64_t k);

/// ISI the receiver expects at its own sample j from the decided prefix
/// b^_0..b^_{l-1}, assuming it is synchronised with the transmitter.
double expected_isi(const ChannelParams& params, std::span<const Bit> decided_prefix, std::int64_t j);

/// Argmax over k in {1..M} of the single-release response; smallest k on ties.
int peak_sample_index(const ChannelParams& params);

/// Tabulated single-release response for one parameter set. All the free
/// functions above are thin wrappers over this; hot loops should hold one.
class ChannelResponse {
public:
    explicit ChannelResponse(const ChannelParams& params);

    /// Replaces the hitting probabilities p[0..M*L] with a caller-supplied
    /// table, e.g. to pin a degenerate channel in tests.
    static ChannelResponse from_probabilities(const ChannelParams& params, std::vector<double> probabilities);

    [[nodiscard]] const ChannelParams& params() const { return params_; }

    /// p[k] for 0 <= k <= M*L, and computed directly beyond the table.
    [[nodiscard]] double probability(std::int64_t k) const;
    [[nodiscard]] double single_release(std::int64_t k) const;
    [[nodiscard]] double signal(std::span<const Bit> bits, std::int64_t k) const;
    [[nodiscard]] double isi(std::span<const Bit> decided_prefix, std::int64_t j) const;
    [[nodiscard]] int peak_index() const { return peak_index_; }

    /// Mean counts for every receiver sample j = 1..M*L (index j-1) under
    /// the true clock offset.
    [[nodiscard]] std::vector<double> observation_means(std::span<const Bit> bits, std::int64_t offset) const;

private:
    ChannelResponse(const ChannelParams& params, std::vector<double> probabilities);

    ChannelParams params_;
    std::vector<double> probabilities_;
    int peak_index_ = 1;
};

}  // namespace molcomm

#endif  // MOLCOMM_CHANNEL_HPP
