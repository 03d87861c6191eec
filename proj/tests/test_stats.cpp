#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "molcomm/stats.hpp"

using namespace molcomm;

namespace {

// Independent oracle: direct pmf summation in log space.
double pmf_sum(double a, double mean) {
    if (a < 0) return 0.0;
    if (mean == 0) return 1.0;
    double total = 0.0;
    for (int i = 0; i <= static_cast<int>(std::floor(a)); ++i)
        total += std::exp(-mean + i * std::log(mean) - std::lgamma(i + 1.0));
    return total;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("regularized upper gamma") {
    CHECK(regularized_upper_gamma(1, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(regularized_upper_gamma(3, 2) == doctest::Approx(0.67667641618306346).epsilon(1e-14));
    for (double s : {1.0, 2.0, 7.0, 40.0}) CHECK(regularized_upper_gamma(s, 0) == 1.0);
    CHECK(regularized_upper_gamma(2.5, 1.5) == doctest::Approx(0.69998583587862).epsilon(1e-10));
    CHECK(regularized_upper_gamma(5, 800) == doctest::Approx(0.0).epsilon(1e-300));
    CHECK_THROWS_AS(regularized_upper_gamma(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(regularized_upper_gamma(-2, 1), std::invalid_argument);
    CHECK_THROWS_AS(regularized_upper_gamma(2, -1), std::invalid_argument);
}

TEST_CASE("poisson cdf examples") {
    CHECK(poisson_cdf({4.0, 0.0}) == 1.0);
    CHECK(poisson_cdf({0.0, 0.0}) == 1.0);
    CHECK(poisson_cdf({0.0, 1.0}) == doctest::Approx(0.36787944117144233).epsilon(1e-14));
    CHECK(poisson_cdf({3.0, 2.0}) == doctest::Approx(0.85712346049854705).epsilon(1e-14));
    CHECK(poisson_cdf({3.5, 2.0}) == poisson_cdf({3.0, 2.0}));
    CHECK(poisson_cdf({2.5, 2.0}) == poisson_cdf({2.0, 2.0}));
    CHECK(poisson_cdf({-0.5, 2.0}) == 0.0);
    CHECK(poisson_cdf({-3.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(poisson_cdf({1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("strict inequality follows the integer rule") {
    CHECK(poisson_less({3.0, 2.0}) == poisson_cdf({2.0, 2.0}));
    CHECK(poisson_less({3.5, 2.0}) == poisson_cdf({3.0, 2.0}));
    CHECK(poisson_less({3.0 + 1e-12, 2.0}) == poisson_cdf({2.0, 2.0}));
    CHECK(poisson_less({0.0, 2.0}) == 0.0);
    CHECK(poisson_less({0.25, 2.0}) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("poisson cdf agrees with pmf summation") {
    double worst = 0.0;
    for (double mean : {0.1, 0.5, 1.0, 2.5, 6.16, 10.0, 33.3, 57.0, 100.0})
        for (int a = 0; a <= 300; ++a) worst = std::max(worst, std::abs(poisson_cdf({double(a), mean}) - pmf_sum(a, mean)));
    CHECK(worst <= 1e-10);
}

TEST_CASE("poisson cdf monotonicity") {
    for (double mean : {0.3, 4.0, 20.0}) {
        double prev = 0.0;
        for (double a = 0; a < 60; a += 0.5) {
            const double v = poisson_cdf({a, mean});
            CHECK(v >= prev);
            prev = v;
        }
    }
    for (int a : {0, 3, 12}) {
        double prev = 1.0;
        for (double mean = 0; mean < 40; mean += 0.7) {
            const double v = poisson_cdf({double(a), mean});
            CHECK(v <= prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("cdf table reproduces the series exactly") {
    for (double mean : {0.0, 0.7, 6.16, 90.0, 750.0}) {
        const auto table = poisson_cdf_table(mean, 120);
        REQUIRE(table.size() == 121);
        for (int n = 0; n <= 120; ++n) CHECK(table[n] == doctest::Approx(poisson_cdf({double(n), mean})).epsilon(1e-14));
    }
    CHECK(poisson_cdf_table(3.0, -1).empty());
}

TEST_CASE("max exceedance") {
    const std::vector<double> one{2.0}, zero_shift{0.0};
    for (double tau : {0.0, 1.0, 3.0, 7.0})
        CHECK(max_exceed_prob(one, zero_shift, tau) == doctest::Approx(1.0 - poisson_cdf({tau - 1, 2.0})));

    const std::vector<double> none{0.0, 0.0, 0.0}, shifts0{0.0, 0.0, 0.0};
    CHECK(max_exceed_prob(none, shifts0, 1.0) == 0.0);
    CHECK(max_exceed_prob(none, shifts0, 0.0) == 1.0);

    const std::vector<double> pair{6.1594042303982, 1.9228783198057}, pair_shift{0.0, 0.0};
    CHECK(max_exceed_prob(pair, pair_shift, 5.0) == doctest::Approx(0.74786109637125).epsilon(1e-12));

    CHECK_THROWS_AS(max_exceed_prob(pair, zero_shift, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(max_exceed_prob({}, {}, 1.0), std::invalid_argument);
}

TEST_CASE("max exceedance with fractional ISI shifts") {
    const std::vector<double> means{3.0, 4.0}, shifts{0.5, 1.0};
    // tau = 2: thresholds 2.5 (non-integer) and 3 (integer).
    const double expected = 1.0 - poisson_cdf({2.0, 3.0}) * poisson_cdf({2.0, 4.0});
    CHECK(max_exceed_prob(means, shifts, 2.0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("max exceedance is monotone and factorises") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> means(5), shifts(5);
        for (auto& m : means) m = u(rng);
        for (auto& s : shifts) s = u(rng) / 4;
        double prev = 1.0;
        for (double tau = 0; tau <= 20; tau += 1) {
            const double v = max_exceed_prob(means, shifts, tau);
            CHECK(v <= prev + 1e-15);
            CHECK(v >= 0.0);
            prev = v;
        }
        const double tau = 4.0;
        double product = 1.0;
        for (std::size_t j = 0; j < means.size(); ++j)
            product *= 1.0 - max_exceed_prob(std::span(means).subspan(j, 1), std::span(shifts).subspan(j, 1), tau);
        CHECK(1.0 - max_exceed_prob(means, shifts, tau) == doctest::Approx(product).epsilon(1e-13));
        auto bigger = means;
        bigger[trial % 5] += 1.0;
        CHECK(max_exceed_prob(bigger, shifts, tau) >= max_exceed_prob(means, shifts, tau));
    }
}

TEST_CASE("sum exceedance") {
    const std::vector<double> one{2.0};
    CHECK(sum_exceed_prob(one, 0.0, 3.0) == doctest::Approx(1.0 - poisson_less({3.0, 2.0})));
    CHECK(sum_exceed_prob(std::vector<double>{0.0, 0.0}, 0.0, 1.0) == 0.0);
    const std::vector<double> two{2.0, 3.0};
    CHECK(sum_exceed_prob(two, 1.5, 4.0) == doctest::Approx(0.38403934516693688).epsilon(1e-13));
    CHECK(sum_exceed_prob(two, 1.5, 4.0) == doctest::Approx(1.0 - pmf_sum(5, 5.0)).epsilon(1e-13));
    CHECK_THROWS_AS(sum_exceed_prob(two, -1.0, 4.0), std::invalid_argument);

    SUBCASE("pooling equals a single observation") {
        const std::vector<double> many{0.4, 1.7, 3.1, 0.05};
        const std::vector<double> pooled{0.4 + 1.7 + 3.1 + 0.05}, zero{0.0};
        for (double tau = 0; tau < 15; tau += 1)
            CHECK(sum_exceed_prob(many, 0.0, tau) == doctest::Approx(max_exceed_prob(pooled, zero, tau)).epsilon(1e-14));
    }
}

}  // TEST_SUITE
