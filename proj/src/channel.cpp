#include "molcomm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace molcomm {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("ChannelParams: " + what);
}

double hitting_probability_unchecked(const ChannelParams& params, std::int64_t k) {
    if (k == 0) return 0.0;
    const double spread = 4.0 * params.diffusion * static_cast<double>(k) * params.sample_period;
    return params.rx_volume() / std::pow(std::numbers::pi * spread, 1.5) *
           std::exp(-params.distance * params.distance / spread);
}

std::vector<double> tabulate(const ChannelParams& params) {
    params.validate();
    std::vector<double> table(static_cast<std::size_t>(params.total_samples()) + 1);
    for (std::size_t k = 0; k < table.size(); ++k)
        table[k] = hitting_probability_unchecked(params, static_cast<std::int64_t>(k));
    return table;
}

}  // namespace

void ChannelParams::validate() const {
    require(std::isfinite(rx_radius) && rx_radius > 0, "rx_radius must be positive");
    require(std::isfinite(distance) && distance > 0, "distance must be positive");
    require(distance > rx_radius, "distance must exceed rx_radius");
    require(std::isfinite(diffusion) && diffusion > 0, "diffusion must be positive");
    require(std::isfinite(sample_period) && sample_period > 0, "sample_period must be positive");
    require(samples_per_bit >= 1, "samples_per_bit must be >= 1");
    require(seq_length >= 1, "seq_length must be >= 1");
    require(molecules_per_one >= 1, "molecules_per_one must be >= 1");
    require(bit_one_prior > 0 && bit_one_prior < 1, "bit_one_prior must lie in (0,1)");
}

double ChannelParams::rx_volume() const { return 4.0 / 3.0 * std::numbers::pi * rx_radius * rx_radius * rx_radius; }

void validate_bits(const ChannelParams& params, std::span<const Bit> bits) {
    if (bits.size() != static_cast<std::size_t>(params.seq_length))
        throw std::invalid_argument("bit sequence length " + std::to_string(bits.size()) + " != seq_length " +
                                    std::to_string(params.seq_length));
    for (Bit b : bits)
        if (b > 1) throw std::invalid_argument("bit sequence entries must be 0 or 1");
}

double hitting_probability(const ChannelParams& params, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("hitting_probability: negative sample index");
    return hitting_probability_unchecked(params, k);
}

double expected_single_release(const ChannelParams& params, std::int64_t k) {
    return params.molecules_per_one * hitting_probability(params, k);
}

double expected_signal(const ChannelParams& params, std::span<const Bit> bits, std::int64_t k) {
    return ChannelResponse(params).signal(bits, k);
}

double expected_isi(const ChannelParams& params, std::span<const Bit> decided_prefix, std::int64_t j) {
    return ChannelResponse(params).isi(decided_prefix, j);
}

int peak_sample_index(const ChannelParams& params) { return ChannelResponse(params).peak_index(); }

ChannelResponse::ChannelResponse(const ChannelParams& params)
    : ChannelResponse(params, tabulate(params)) {}

ChannelResponse::ChannelResponse(const ChannelParams& params, std::vector<double> probabilities)
    : params_(params), probabilities_(std::move(probabilities)) {
    params_.validate();
    if (probabilities_.size() != static_cast<std::size_t>(params_.total_samples()) + 1)
        throw std::invalid_argument("ChannelResponse: probability table must have M*L+1 entries");
    for (double p : probabilities_)
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ChannelResponse: probabilities must lie in [0,1]");
    peak_index_ = 1;
    for (int k = 2; k <= params_.samples_per_bit; ++k)
        if (probabilities_[static_cast<std::size_t>(k)] > probabilities_[static_cast<std::size_t>(peak_index_)])
            peak_index_ = k;
}

ChannelResponse ChannelResponse::from_probabilities(const ChannelParams& params, std::vector<double> probabilities) {
    return ChannelResponse(params, std::move(probabilities));
}

double ChannelResponse::probability(std::int64_t k) const {
    if (k < 0) throw std::invalid_argument("ChannelResponse: negative sample index");
    if (static_cast<std::size_t>(k) < probabilities_.size()) return probabilities_[static_cast<std::size_t>(k)];
    return hitting_probability_unchecked(params_, k);
}

double ChannelResponse::single_release(std::int64_t k) const { return params_.molecules_per_one * probability(k); }

double ChannelResponse::signal(std::span<const Bit> bits, std::int64_t k) const {
    const std::int64_t total = params_.total_samples();
    if (k < 1 || k > total) return 0.0;
    const std::int64_t m = params_.samples_per_bit;
    const std::int64_t last = std::min<std::int64_t>(k / m, static_cast<std::int64_t>(bits.size()) - 1);
    double sum = 0.0;
    for (std::int64_t l = 0; l <= last; ++l)
        if (bits[static_cast<std::size_t>(l)]) sum += single_release(k - l * m);
    return sum;
}

double ChannelResponse::isi(std::span<const Bit> decided_prefix, std::int64_t j) const {
    if (j < 0) throw std::invalid_argument("expected_isi: negative sample index");
    const std::int64_t m = params_.samples_per_bit;
    double sum = 0.0;
    for (std::size_t n = 0; n < decided_prefix.size(); ++n) {
        const std::int64_t since = j - static_cast<std::int64_t>(n) * m;
        if (decided_prefix[n] && since >= 0) sum += single_release(since);
    }
    return sum;
}

std::vector<double> ChannelResponse::observation_means(std::span<const Bit> bits, std::int64_t offset) const {
    std::vector<double> means(static_cast<std::size_t>(params_.total_samples()));
    for (std::size_t i = 0; i < means.size(); ++i)
        means[i] = signal(bits, transmitter_index(static_cast<std::int64_t>(i) + 1, offset));
    return means;
}

}  // namespace molcomm
