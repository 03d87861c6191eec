#include "molcomm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "molcomm/stats.hpp"

namespace molcomm {

namespace {

// Observation means for bit l under each hypothesis on b_l, and the ISI the
// receiver subtracts from each observation. Energy detectors see one pooled
// observation; the single-sample detector sees its one sample.
struct BitHypotheses {
    std::vector<double> means_one;
    std::vector<double> means_zero;
    std::vector<double> shifts;
};

BitHypotheses build_hypotheses(const ChannelResponse& response, DetectorKind kind, std::span<const Bit> bits,
                               std::int64_t offset, int l) {
    const auto& params = response.params();
    Window w = bit_window(params, l);
    if (kind == DetectorKind::SingleSample) {
        w.first = w.first - 1 + std::min(response.peak_index(), params.samples_per_bit);
        w.last = w.first;
    }

    BitSequence with_one(bits.begin(), bits.end());
    BitSequence with_zero(bits.begin(), bits.end());
    with_one[static_cast<std::size_t>(l)] = 1;
    with_zero[static_cast<std::size_t>(l)] = 0;
    const auto prefix = bits.first(static_cast<std::size_t>(l));

    BitHypotheses h;
    for (auto j = w.first; j <= w.last; ++j) {
        const auto k = transmitter_index(j, offset);
        h.means_one.push_back(response.signal(with_one, k));
        h.means_zero.push_back(response.signal(with_zero, k));
        h.shifts.push_back(uses_feedback(kind) ? response.isi(prefix, j) : 0.0);
    }
    if (uses_window_sum(kind)) {
        const auto pool = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
        h.means_one = {pool(h.means_one)};
        h.means_zero = {pool(h.means_zero)};
        h.shifts = {pool(h.shifts)};
    }
    return h;
}

// Pr{statistic < tau} from the stats primitives.
double probability_below(DetectorKind kind, std::span<const double> means, std::span<const double> shifts, double tau) {
    switch (kind) {
    case DetectorKind::SingleSample:
        return poisson_less({tau, means[0]});
    case DetectorKind::Energy:
    case DetectorKind::EnergyDF:
        return 1.0 - sum_exceed_prob(means, shifts[0], tau);
    case DetectorKind::AsyncPeak:
    case DetectorKind::AsyncPeakDF:
        return 1.0 - max_exceed_prob(means, shifts, tau);
    }
    throw std::invalid_argument("invalid detector kind");
}

double combine(const ChannelParams& params, double miss_below, double false_alarm_below) {
    return params.bit_one_prior * miss_below + params.bit_zero_prior() * (1.0 - false_alarm_below);
}

void validate_offset(const ChannelParams& params, std::int64_t offset) {
    if (std::abs(offset) >= params.total_samples())
        throw std::invalid_argument("offset " + std::to_string(offset) + " must satisfy |offset| < M*L = " +
                                    std::to_string(params.total_samples()));
}

// Per-observation CDF tables for the sweep path. Each factor resolves
// Pr{X < tau + shift} by table lookup, falling back to the series when the
// grid reaches beyond the table.
class TabulatedFactor {
public:
    TabulatedFactor(double mean, double shift, double max_tau)
        : mean_(mean), shift_(shift), table_(poisson_cdf_table(mean, std::max(0, static_cast<int>(std::floor(max_tau + shift)) + 1))) {}

    [[nodiscard]] double below(double tau) const {
        const double a = tau + shift_;
        const long n = is_integer_valued(a) ? std::lround(a) - 1 : static_cast<long>(std::floor(a));
        if (n < 0) return 0.0;
        if (static_cast<std::size_t>(n) < table_.size()) return table_[static_cast<std::size_t>(n)];
        return poisson_cdf({static_cast<double>(n), mean_});
    }

private:
    double mean_;
    double shift_;
    std::vector<double> table_;
};

double product_below(const std::vector<TabulatedFactor>& factors, double tau) {
    double below = 1.0;
    for (const auto& f : factors) below *= f.below(tau);
    return below;
}

}  // namespace

double ErrorReport::standard_error() const {
    if (bit_count == 0) return 0.0;
    return std::sqrt(average * (1.0 - average) / static_cast<double>(bit_count));
}

void ErrorQuery::validate() const {
    spec.validate();
    params.validate();
    validate_bits(params, true_bits);
    validate_offset(params, offset);
    if (feedback != default_feedback(spec.kind))
        throw std::invalid_argument(std::string("feedback mode does not match detector ") +
                                    std::string(to_string(spec.kind)));
}

double bit_error_probability(const ErrorQuery& query, int l, double tau) {
    query.validate();
    if (l < 0 || l >= query.params.seq_length) throw std::invalid_argument("bit index out of range");
    const ChannelResponse response(query.params);
    const auto h = build_hypotheses(response, query.spec.kind, query.true_bits, query.offset, l);
    return combine(query.params, probability_below(query.spec.kind, h.means_one, h.shifts, tau),
                   probability_below(query.spec.kind, h.means_zero, h.shifts, tau));
}

ErrorReport average_error_probability(const DetectorSpec& spec, const ChannelParams& params,
                                      std::span<const BitSequence> sequences, std::int64_t offset, double tau) {
    spec.validate();
    validate_offset(params, offset);
    if (sequences.empty()) throw std::invalid_argument("average_error_probability: no sequences");
    const ChannelResponse response(params);
    const auto length = static_cast<std::size_t>(params.seq_length);

    ErrorReport report;
    report.kind = spec.kind;
    report.threshold = tau;
    report.offset = offset;
    report.per_bit.assign(length, 0.0);
    for (const auto& bits : sequences) {
        validate_bits(params, bits);
        double sequence_sum = 0.0;
        for (std::size_t l = 0; l < length; ++l) {
            const auto h = build_hypotheses(response, spec.kind, bits, offset, static_cast<int>(l));
            const double pe = combine(params, probability_below(spec.kind, h.means_one, h.shifts, tau),
                                      probability_below(spec.kind, h.means_zero, h.shifts, tau));
            report.per_bit[l] += pe;
            sequence_sum += pe;
        }
        report.per_sequence.push_back(sequence_sum / static_cast<double>(length));
    }
    for (auto& p : report.per_bit) p /= static_cast<double>(sequences.size());
    report.average = std::accumulate(report.per_sequence.begin(), report.per_sequence.end(), 0.0) /
                     static_cast<double>(sequences.size());
    report.bit_count = sequences.size() * length;
    return report;
}

std::vector<double> error_curve(DetectorKind kind, const ChannelParams& params, std::span<const BitSequence> sequences,
                                std::int64_t offset, std::span<const double> grid) {
    validate_offset(params, offset);
    if (sequences.empty()) throw std::invalid_argument("error_curve: no sequences");
    if (grid.empty()) throw std::invalid_argument("error_curve: empty threshold grid");
    for (double tau : grid) DetectorSpec{kind, tau}.validate();
    const double max_tau = *std::max_element(grid.begin(), grid.end());
    const ChannelResponse response(params);
    const auto length = static_cast<std::size_t>(params.seq_length);

    std::vector<double> totals(grid.size(), 0.0);
    std::vector<double> sequence_sums(grid.size());
    std::vector<TabulatedFactor> ones;
    std::vector<TabulatedFactor> zeros;
    for (const auto& bits : sequences) {
        validate_bits(params, bits);
        std::fill(sequence_sums.begin(), sequence_sums.end(), 0.0);
        for (std::size_t l = 0; l < length; ++l) {
            const auto h = build_hypotheses(response, kind, bits, offset, static_cast<int>(l));
            ones.clear();
            zeros.clear();
            for (std::size_t j = 0; j < h.shifts.size(); ++j) {
                ones.emplace_back(h.means_one[j], h.shifts[j], max_tau);
                zeros.emplace_back(h.means_zero[j], h.shifts[j], max_tau);
            }
            for (std::size_t t = 0; t < grid.size(); ++t)
                sequence_sums[t] += combine(params, product_below(ones, grid[t]), product_below(zeros, grid[t]));
        }
        for (std::size_t t = 0; t < grid.size(); ++t) totals[t] += sequence_sums[t] / static_cast<double>(length);
    }
    for (auto& v : totals) v /= static_cast<double>(sequences.size());
    return totals;
}

ThresholdChoice optimal_threshold(const DetectorSpec& spec, const ChannelParams& params,
                                  std::span<const BitSequence> sequences, std::int64_t offset,
                                  std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("optimal_threshold: empty threshold grid");
    const auto curve = error_curve(spec.kind, params, sequences, offset, grid);
    ThresholdChoice best{grid[0], curve[0]};
    for (std::size_t t = 1; t < grid.size(); ++t)
        if (curve[t] < best.error || (curve[t] == best.error && grid[t] < best.threshold)) best = {grid[t], curve[t]};
    return best;
}

std::vector<double> integer_grid(int first, int last) {
    std::vector<double> grid;
    for (int t = first; t <= last; ++t) grid.push_back(t);
    return grid;
}

}  // namespace molcomm
