#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "molcomm/analysis.hpp"
#include "molcomm/simulation.hpp"

using namespace molcomm;

namespace {

ChannelParams params_with(int l, double dt = 40e-3, int m = 5) {
    ChannelParams p;
    p.seq_length = l;
    p.sample_period = dt;
    p.samples_per_bit = m;
    return p;
}

ErrorQuery query_for(DetectorKind kind, const ChannelParams& p, BitSequence bits, std::int64_t offset = 0) {
    return {{kind, 0}, p, std::move(bits), offset, default_feedback(kind)};
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("threshold limits") {
    const auto p = params_with(20);
    const auto seqs = random_sequences(p, 3, 4);
    for (auto k : kAllDetectors)
        for (const auto& bits : seqs)
            for (int l = 0; l < 20; l += 3) {
                const auto q = query_for(k, p, bits);
                // Feedback statistics can go negative, so only plain detectors decide 1 for sure at zero.
                if (!uses_feedback(k))
                    CHECK(bit_error_probability(q, l, 0.0) == doctest::Approx(p.bit_zero_prior()).epsilon(1e-15));
                CHECK(bit_error_probability(q, l, 5000.0) == doctest::Approx(p.bit_one_prior).epsilon(1e-12));
            }
}

TEST_CASE("isolated bit error follows the window product") {
    // All other bits zero: only the hypothesised b_l = 1 contributes, and
    // Pr{max < 1} = exp(-sum of the window means).
    const auto p = params_with(4);
    const BitSequence zeros(4, 0);
    const ChannelResponse r(p);
    double window = 0.0;
    for (int k = 1; k <= 5; ++k) window += r.single_release(k);
    for (int l = 0; l < 4; ++l) {
        const double pe = bit_error_probability(query_for(DetectorKind::AsyncPeak, p, zeros), l, 1.0);
        CHECK(pe == doctest::Approx(p.bit_one_prior * std::exp(-window)).epsilon(1e-12));
    }
}

TEST_CASE("single-bit async peak error agrees with Monte Carlo") {
    const auto p = params_with(1);
    const double tau = 4;
    const double analytic = bit_error_probability(query_for(DetectorKind::AsyncPeak, p, BitSequence{1}), 0, tau);
    // Fresh equiprobable bits per trace, so the empirical rate estimates the hypothesis-averaged error.
    const ChannelResponse r(p);
    Rng rng(2024);
    std::bernoulli_distribution coin(0.5);
    constexpr int kTrials = 1'000'000;
    int errors = 0;
    for (int i = 0; i < kTrials; ++i) {
        const BitSequence bits{static_cast<Bit>(coin(rng))};
        const auto trace = draw_trace(r, bits, 0, SimConfig{}, rng);
        errors += detect({DetectorKind::AsyncPeak, tau}, trace, r)[0] != bits[0];
    }
    const double rate = static_cast<double>(errors) / kTrials;
    const double se = std::sqrt(analytic * (1 - analytic) / kTrials);
    CHECK(std::abs(rate - analytic) <= 3 * se);
}

TEST_CASE("sequence averaging is two-stage") {
    const auto p = params_with(20);
    const auto seqs = random_sequences(p, 2, 8);
    const DetectorSpec spec{DetectorKind::AsyncPeak, 6};
    const auto both = average_error_probability(spec, p, seqs, 0, 6);
    const auto first = average_error_probability(spec, p, std::span(seqs).first(1), 0, 6);
    const auto second = average_error_probability(spec, p, std::span(seqs).last(1), 0, 6);
    CHECK(both.average == doctest::Approx((first.average + second.average) / 2).epsilon(1e-15));
    CHECK(both.per_sequence.size() == 2);
    CHECK(both.per_bit.size() == 20);
    CHECK(both.bit_count == 40);
    double mean_bits = 0.0;
    for (double v : both.per_bit) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        mean_bits += v / 20;
    }
    CHECK(mean_bits == doctest::Approx(both.average).epsilon(1e-13));
    CHECK_THROWS_AS(average_error_probability(spec, p, {}, 0, 6), std::invalid_argument);
}

TEST_CASE("sweep route matches the direct route") {
    for (auto [dt, m] : {std::pair{40e-3, 5}, std::pair{8e-3, 25}}) {
        const auto p = params_with(20, dt, m);
        const auto seqs = random_sequences(p, 4, 21);
        auto grid = integer_grid(0, 60);
        grid.push_back(2.5);
        grid.push_back(17.25);
        for (auto k : kAllDetectors)
            for (std::int64_t offset : {-3, 0, 4}) {
                const auto curve = error_curve(k, p, seqs, offset, grid);
                for (std::size_t t = 0; t < grid.size(); t += 3) {
                    const auto direct = average_error_probability({k, grid[t]}, p, seqs, offset, grid[t]);
                    CHECK(curve[t] == doctest::Approx(direct.average).epsilon(1e-12));
                }
            }
    }
}

TEST_CASE("negative offsets see future bits") {
    const auto p = params_with(3);
    const BitSequence quiet{1, 0, 0}, loud{1, 1, 0};
    const auto q = [&](const BitSequence& b, std::int64_t d) { return query_for(DetectorKind::AsyncPeak, p, b, d); };
    CHECK(bit_error_probability(q(quiet, 0), 0, 6) == bit_error_probability(q(loud, 0), 0, 6));
    CHECK(bit_error_probability(q(quiet, 2), 0, 6) == bit_error_probability(q(loud, 2), 0, 6));
    CHECK(bit_error_probability(q(quiet, -2), 0, 6) != bit_error_probability(q(loud, -2), 0, 6));
}

TEST_CASE("windows pushed past the transmission read zero signal") {
    const auto p = params_with(1);
    // With offset -4 only samples k = 5..8 land in the window; k > 5 is clipped to zero.
    const ChannelResponse r(p);
    const auto means = r.observation_means(BitSequence{1}, -4);
    CHECK(means[0] == doctest::Approx(r.single_release(5)));
    for (int j = 1; j < 5; ++j) CHECK(means[j] == 0.0);
}

TEST_CASE("optimal threshold") {
    const auto p = params_with(20);
    const auto seqs = random_sequences(p, 5, 2);
    const std::vector<double> single{7.0};
    const auto only = optimal_threshold({DetectorKind::AsyncPeak, 0}, p, seqs, 0, single);
    CHECK(only.threshold == 7.0);
    CHECK(only.error == doctest::Approx(average_error_probability({DetectorKind::AsyncPeak, 7}, p, seqs, 0, 7).average));

    // At the largest offset nothing of the bit reaches its window, every threshold gives P0 = P1 = 0.5.
    const auto flat = optimal_threshold({DetectorKind::Energy, 0}, p, seqs, 5, integer_grid(3, 9));
    CHECK(flat.threshold == 3.0);
    CHECK(flat.error == doctest::Approx(0.5));
    CHECK_THROWS_AS(optimal_threshold({DetectorKind::Energy, 0}, p, seqs, 0, {}), std::invalid_argument);
}

TEST_CASE("peak beats single sample without ISI") {
    const auto p = params_with(1);
    const std::vector<BitSequence> seqs{{1}, {0}};
    const auto grid = integer_grid(0, 100);
    const auto peak = optimal_threshold({DetectorKind::AsyncPeak, 0}, p, seqs, 0, grid);
    const auto single = optimal_threshold({DetectorKind::SingleSample, 0}, p, seqs, 0, grid);
    CHECK(peak.error <= single.error);
}

TEST_CASE("query validation") {
    const auto p = params_with(2);
    ErrorQuery q = query_for(DetectorKind::AsyncPeak, p, {1, 0});
    CHECK_NOTHROW(q.validate());
    q.feedback = FeedbackMode::Genie;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q = query_for(DetectorKind::EnergyDF, p, {1, 0});
    q.feedback = FeedbackMode::None;
    CHECK_THROWS_AS(bit_error_probability(q, 0, 3), std::invalid_argument);
    q = query_for(DetectorKind::AsyncPeak, p, {1, 0}, 10);
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    q = query_for(DetectorKind::AsyncPeak, p, {1, 0}, -9);
    CHECK_NOTHROW(q.validate());
    CHECK_THROWS_AS(bit_error_probability(q, 2, 3), std::invalid_argument);
}

}  // TEST_SUITE
