#include "molcomm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace molcomm {

namespace {

// Beyond this the leading e^-x of the finite series underflows.
constexpr double kSeriesMaxArgument = 700.0;

double finite_series_upper_gamma(long order, double x) {
    double term = std::exp(-x);
    double sum = term;
    for (long i = 1; i < order; ++i) {
        term *= x / static_cast<double>(i);
        sum += term;
    }
    return std::min(sum, 1.0);
}

// Largest integer n with Pr{X <= n} == Pr{X <= a}; -1 when a < 0.
long floor_count(double a) {
    if (is_integer_valued(a)) return std::lround(a);
    return static_cast<long>(std::floor(a));
}

}  // namespace

bool is_integer_valued(double value) { return std::abs(value - std::round(value)) <= kIntegerTolerance; }

double regularized_upper_gamma(double s, double x) {
    if (!(s > 0)) throw std::invalid_argument("regularized_upper_gamma: order must be positive");
    if (!(x >= 0)) throw std::invalid_argument("regularized_upper_gamma: argument must be non-negative");
    if (x == 0.0) return 1.0;
    if (is_integer_valued(s) && x <= kSeriesMaxArgument) return finite_series_upper_gamma(std::lround(s), x);
    return boost::math::gamma_q(s, x);
}

double poisson_cdf(const PoissonThresholdQuery& query) {
    if (!(query.mean >= 0)) throw std::invalid_argument("poisson_cdf: mean must be non-negative");
    if (!std::isfinite(query.threshold)) {
        if (query.threshold > 0) return 1.0;
        throw std::invalid_argument("poisson_cdf: threshold must be finite");
    }
    const long n = floor_count(query.threshold);
    if (n < 0) return 0.0;
    if (query.mean == 0.0) return 1.0;
    return regularized_upper_gamma(static_cast<double>(n + 1), query.mean);
}

double poisson_less(const PoissonThresholdQuery& query) {
    const double a = query.threshold;
    if (is_integer_valued(a)) return poisson_cdf({std::round(a) - 1.0, query.mean});
    return poisson_cdf(query);
}

double max_exceed_prob(std::span<const double> means, std::span<const double> isi_shifts, double tau) {
    if (means.size() != isi_shifts.size())
        throw std::invalid_argument("max_exceed_prob: means and isi_shifts differ in length");
    if (means.empty()) throw std::invalid_argument("max_exceed_prob: empty observation window");
    double below = 1.0;
    for (std::size_t j = 0; j < means.size(); ++j) {
        if (!(means[j] >= 0) || !(isi_shifts[j] >= 0))
            throw std::invalid_argument("max_exceed_prob: entries must be non-negative");
        below *= poisson_less({tau + isi_shifts[j], means[j]});
    }
    return 1.0 - below;
}

double sum_exceed_prob(std::span<const double> means, double total_isi, double tau) {
    if (!(total_isi >= 0)) throw std::invalid_argument("sum_exceed_prob: total_isi must be non-negative");
    double pooled = 0.0;
    for (double m : means) {
        if (!(m >= 0)) throw std::invalid_argument("sum_exceed_prob: means must be non-negative");
        pooled += m;
    }
    return 1.0 - poisson_less({tau + total_isi, pooled});
}

std::vector<double> poisson_cdf_table(double mean, int max_count) {
    if (!(mean >= 0)) throw std::invalid_argument("poisson_cdf_table: mean must be non-negative");
    if (max_count < 0) return {};
    std::vector<double> table(static_cast<std::size_t>(max_count) + 1, 1.0);
    if (mean == 0.0) return table;
    if (mean > kSeriesMaxArgument) {
        for (int n = 0; n <= max_count; ++n) table[static_cast<std::size_t>(n)] = boost::math::gamma_q(n + 1.0, mean);
        return table;
    }
    // Same summation order as finite_series_upper_gamma, so entries match it bit for bit.
    double term = std::exp(-mean);
    double sum = term;
    table[0] = std::min(sum, 1.0);
    for (int n = 1; n <= max_count; ++n) {
        term *= mean / static_cast<double>(n);
        sum += term;
        table[static_cast<std::size_t>(n)] = std::min(sum, 1.0);
    }
    return table;
}

}  // namespace molcomm
