#ifndef MOLCOMM_DETECTORS_HPP
#define MOLCOMM_DETECTORS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molcomm/channel.hpp"

namespace molcomm {

enum class DetectorKind { SingleSample, Energy, AsyncPeak, EnergyDF, AsyncPeakDF };

inline constexpr std::array<DetectorKind, 5> kAllDetectors = {DetectorKind::SingleSample, DetectorKind::Energy,
                                                              DetectorKind::AsyncPeak, DetectorKind::EnergyDF,
                                                              DetectorKind::AsyncPeakDF};

/// Stable lowercase identifiers used in configs and CSV output:
/// single-sample, energy, async-peak, energy-df, async-peak-df.
std::string_view to_string(DetectorKind kind);
/// Throws std::invalid_argument for unknown names.
DetectorKind parse_detector_kind(std::string_view name);

constexpr bool uses_feedback(DetectorKind kind) {
    return kind == DetectorKind::EnergyDF || kind == DetectorKind::AsyncPeakDF;
}
constexpr bool uses_window_sum(DetectorKind kind) {
    return kind == DetectorKind::Energy || kind == DetectorKind::EnergyDF;
}

struct DetectorSpec {
    DetectorKind kind = DetectorKind::AsyncPeak;
    double threshold = 0.0;

    void validate() const;
};

/// Molecule counts y[j] for receiver samples j = 1..M*L, stored at index j-1.
struct ObservationTrace {
    std::vector<std::int64_t> counts;
    bool operator==(const ObservationTrace&) const = default;
};

void validate_trace(const ChannelParams& params, const ObservationTrace& trace);

/// Receiver sample indices {lM+1, ..., (l+1)M} of bit l.
struct Window {
    std::int64_t first = 1;
    std::int64_t last = 1;
};
Window bit_window(const ChannelParams& params, int l);

/// The scalar compared against the threshold for bit l: the peak-time sample,
/// the window sum, the window maximum, or their ISI-compensated versions.
/// DF statistics subtract the ISI implied by `decided_prefix` (its first l
/// entries) and may be negative.
double decision_statistic(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelParams& params, int l,
                          std::span<const Bit> decided_prefix);
double decision_statistic(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelResponse& response,
                          int l, std::span<const Bit> decided_prefix);

/// Decodes bit by bit; DF kinds feed back their own earlier decisions.
BitSequence detect(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelParams& params);
BitSequence detect(const DetectorSpec& spec, const ObservationTrace& trace, const ChannelResponse& response);

/// Like detect(), but DF kinds are fed the true bits instead of their own
/// decisions. Identical to detect() for non-DF kinds.
BitSequence detect_with_genie(const DetectorSpec& spec, const ObservationTrace& trace,
                              const ChannelResponse& response, std::span<const Bit> true_bits);

}  // namespace molcomm

#endif  // MOLCOMM_DETECTORS_HPP
