#include "molcomm/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace molcomm {

namespace {

constexpr std::array<std::string_view, 5> kNames = {"single-sample", "energy", "async-peak", "energy-df",
                                                    "async-peak-df"};

std::int64_t count_at(const ObservationTrace& trace, std::int64_t j) {
    return trace.counts[static_cast<std::size_t>(j - 1)];
}

double statistic_unchecked(DetectorKind kind, const ObservationTrace& trace, const ChannelResponse& response, int l,
                           std::span<const Bit> decided_prefix) {
    const auto& params = response.params();
    const Window w = bit_window(params, l);
    const auto prefix = uses_feedback(kind) ? decided_prefix.first(static_cast<std::size_t>(l)) : std::span<const Bit>{};

    switch (kind) {
    case DetectorKind::SingleSample:
        return static_cast<double>(count_at(trace, w.first - 1 + std::min(response.peak_index(), params.samples_per_bit)));
    case DetectorKind::Energy:
    case DetectorKind::EnergyDF: {
        double sum = 0.0;
        for (auto j = w.first; j <= w.last; ++j) sum += static_cast<double>(count_at(trace, j)) - response.isi(prefix, j);
        return sum;
    }
    case DetectorKind::AsyncPeak:
    case DetectorKind::AsyncPeakDF: {
        double peak = -std::numeric_limits<double>::infinity();
        for (auto j = w.first; j <= w.last; ++j)
            peak = std::max(peak, static_cast<double>(count_at(trace, j)) - response.isi(prefix, j));
        return peak;
    }
    }
    throw std::invalid_argument("invalid detector kind");
}

}  // namespace

std::string_view to_string(DetectorKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

DetectorKind parse_detector_kind(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return kAllDetectors[i];
    throw std::invalid_argument("unknown detector '" + std::string(name) + "'");
}

void DetectorSpec::validate() const {
    if (static_cast<std::size_t>(kind) >= kAllDetectors.size()) throw std::invalid_argument("invalid detector kind");
    if (!(threshold >= 0) || !std::isfinite(threshold))
        throw std::invalid_argument("detector threshold must be finite and non-negative");
}

void validate_trace(const ChannelParams& params, const ObservationTrace& trace) {
    if (trace.counts.size() != static_cast<std::size_t>(params.total_samples()))
        throw std::invalid_argument("trace length " + std::to_string(trace.counts.size()) + " != M*L = " +
                                    std::to_string(params.total_samples()));
    for (auto c : trace.counts)
        if (c < 0) throw std::invalid_argument("trace counts must be non-negative");
}

Window bit_window(const ChannelParams& params, int l) {
    if (l < 0 || l >= params.seq_length) throw std::invalid_argument("bit index out of range");
    const std::int64_t m = params.samples_per_bit;
    return {l * m + 1, (l + 1) * m};
}

double decision_statistic(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelParams& params, int l,
                          std::span<const Bit> decided_prefix) {
    return decision_statistic(spec, trace, ChannelResponse(params), l, decided_prefix);
}

double decision_statistic(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelResponse& response,
                          int l, std::span<const Bit> decided_prefix) {
    spec.validate();
    validate_trace(response.params(), trace);
    bit_window(response.params(), l);
    if (uses_feedback(spec.kind) && decided_prefix.size() < static_cast<std::size_t>(l))
        throw std::invalid_argument("decision feedback needs decisions for every earlier bit");
    return statistic_unchecked(spec.kind, trace, response, l, decided_prefix);
}

BitSequence detect(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelParams& params) {
    return detect(spec, trace, ChannelResponse(params));
}

BitSequence detect(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelResponse& response) {
    spec.validate();
    validate_trace(response.params(), trace);
    const int length = response.params().seq_length;
    BitSequence decided;
    decided.reserve(static_cast<std::size_t>(length));
    for (int l = 0; l < length; ++l)
        decided.push_back(statistic_unchecked(spec.kind, trace, response, l, decided) >= spec.threshold ? 1 : 0);
    return decided;
}

BitSequence detect_with_genie(const DetectorSpec& spec, const ObservationTrace& trace,
                              const ChannelResponse& response, std::span<const Bit> true_bits) {
    spec.validate();
    validate_trace(response.params(), trace);
    validate_bits(response.params(), true_bits);
    const int length = response.params().seq_length;
    BitSequence decided(static_cast<std::size_t>(length));
    for (int l = 0; l < length; ++l)
        decided[static_cast<std::size_t>(l)] =
            statistic_unchecked(spec.kind, trace, response, l, true_bits) >= spec.threshold ? 1 : 0;
    return decided;
}

}  // namespace molcomm
