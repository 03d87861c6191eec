#ifndef MOLCOMM_STATS_HPP
#define MOLCOMM_STATS_HPP

// Poisson tail probabilities for thresholded maxima and sums of independent
// observations. Thresholds may be non-integer once an expected-ISI shift has
// been added; the integer/non-integer distinction matters because counts are
// discrete:
//   Pr{X < a} = Pr{X <= a - 1}   for integer a
//   Pr{X < a} = Pr{X <= a}       for non-integer a
// "Integer" means within kIntegerTolerance of an integer.

#include <span>
#include <vector>

namespace molcomm {

inline constexpr double kIntegerTolerance = 1e-9;

struct PoissonThresholdQuery {
    double threshold = 0.0;
    double mean = 0.0;
};

/// Q(s, x) = Gamma(s, x) / Gamma(s). Integer orders use the finite series
/// e^-x * sum_{i<s} x^i / i!; other orders and very large x defer to Boost.
/// Throws std::invalid_argument for s <= 0 or x < 0.
double regularized_upper_gamma(double s, double x);

/// Pr{X <= threshold} for X ~ Poisson(mean); 0 for negative thresholds.
double poisson_cdf(const PoissonThresholdQuery& query);

/// Pr{X < threshold}, applying the integer/non-integer rule above.
double poisson_less(const PoissonThresholdQuery& query);

bool is_integer_valued(double value);

/// Pr{max_j (y[j] - shifts[j]) >= tau} = 1 - prod_j Pr{y[j] < tau + shifts[j]}.
double max_exceed_prob(std::span<const double> means, std::span<const double> isi_shifts, double tau);

/// Pr{sum_j y[j] - total_isi >= tau}, pooling the window into one Poisson.
double sum_exceed_prob(std::span<const double> means, double total_isi, double tau);

/// Pr{X <= n} for n = 0..max_count. One pass over the pmf, so callers
/// evaluating many integer thresholds against the same mean should use this.
std::vector<double> poisson_cdf_table(double mean, int max_count);

}  // namespace molcomm

#endif  // MOLCOMM_STATS_HPP
