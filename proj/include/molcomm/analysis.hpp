#ifndef MOLCOMM_ANALYSIS_HPP
#define MOLCOMM_ANALYSIS_HPP

// Analytical bit error probabilities under the Poisson observation model.
//
// For bit l of a known sequence b, the error probability averages over both
// hypotheses for b_l with the other bits held at their values in b:
//
//   Pe[l] = P1 * Pr{stat < tau | b_l = 1} + P0 * Pr{stat >= tau | b_l = 0}
//
// Observation means use the true bits and the true clock offset. The ISI
// subtracted by feedback detectors is evaluated with genie decisions (the true
// prefix) on the receiver's own clock, i.e. assuming zero offset.

#include <cstdint>
#include <span>
#include <vector>

#include "molcomm/channel.hpp"
#include "molcomm/detectors.hpp"

namespace molcomm {

enum class FeedbackMode { None, Genie };

constexpr FeedbackMode default_feedback(DetectorKind kind) {
    return uses_feedback(kind) ? FeedbackMode::Genie : FeedbackMode::None;
}

struct ErrorQuery {
    DetectorSpec spec;
    ChannelParams params;
    BitSequence true_bits;
    std::int64_t offset = 0;
    FeedbackMode feedback = FeedbackMode::None;

    /// Rejects |offset| >= M*L, bad bits, and a feedback mode that does not
    /// match the detector kind.
    void validate() const;
};

struct ErrorReport {
    DetectorKind kind = DetectorKind::AsyncPeak;
    double threshold = 0.0;
    std::int64_t offset = 0;
    bool empirical = false;
    /// Error probability (or error fraction) per bit position, averaged over sequences.
    std::vector<double> per_bit;
    /// Average over bit positions, one entry per sequence.
    std::vector<double> per_sequence;
    double average = 0.0;
    /// Bits behind `average`; for empirical reports, the number of decisions.
    std::size_t bit_count = 0;

    /// Binomial standard error sqrt(p(1-p)/n) of `average`.
    [[nodiscard]] double standard_error() const;
};

double bit_error_probability(const ErrorQuery& query, int l, double tau);

/// Two-stage mean: bits within each sequence, then across sequences.
ErrorReport average_error_probability(const DetectorSpec& spec, const ChannelParams& params,
                                      std::span<const BitSequence> sequences, std::int64_t offset, double tau);

/// Average error for every threshold in `grid`. Matches
/// average_error_probability() at each grid point, but builds one Poisson CDF
/// table per observation instead of re-summing the series for each threshold.
std::vector<double> error_curve(DetectorKind kind, const ChannelParams& params, std::span<const BitSequence> sequences,
                                std::int64_t offset, std::span<const double> grid);

struct ThresholdChoice {
    double threshold = 0.0;
    double error = 0.0;
};

/// Grid point with the smallest average error; the smaller threshold wins ties.
ThresholdChoice optimal_threshold(const DetectorSpec& spec, const ChannelParams& params,
                                  std::span<const BitSequence> sequences, std::int64_t offset,
                                  std::span<const double> grid);

/// {first, first+1, ..., last}
std::vector<double> integer_grid(int first, int last);

}  // namespace molcomm

#endif  // MOLCOMM_ANALYSIS_HPP
