#include <doctest.h>

#include <cmath>
#include <vector>

#include "priorshift/estimation.hpp"
#include "priorshift/evaluation.hpp"
#include "priorshift/synthesis.hpp"
#include "test_support.hpp"

using namespace priorshift;
using test_support::expect_error;

TEST_CASE("make_model worked examples") {
    // Full separability with M = K: the likelihood table is the identity.
    const auto crisp = make_model(3, 3, 1.0, 1);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t m = 0; m < 3; ++m)
            CHECK(crisp.likelihood[k * 3 + m] == (k == m ? 1.0 : 0.0));

    // Same seed, same model.
    const auto a = make_model(5, 11, 0.6, 42);
    const auto b = make_model(5, 11, 0.6, 42);
    CHECK(a.likelihood == b.likelihood);
    CHECK(test_support::bitwise_equal(a.train_prior.values(), b.train_prior.values()));
    const auto c = make_model(5, 11, 0.6, 43);
    CHECK(a.likelihood != c.likelihood);

    // With M = K the off-target remainder has a single slot.
    const auto pair = make_model(2, 2, 0.8, 7);
    CHECK(pair.likelihood[0] == 0.8);
    CHECK(pair.likelihood[1] == doctest::Approx(0.2));
    CHECK(pair.likelihood[2] == doctest::Approx(0.2));
    CHECK(pair.likelihood[3] == 0.8);
}

TEST_CASE("make_model validates parameters") {
    expect_error(ErrorCode::bad_separability, [] { make_model(3, 6, 0.0, 1); });
    expect_error(ErrorCode::bad_separability, [] { make_model(3, 6, 1.5, 1); });
    expect_error(ErrorCode::invalid_config, [] { make_model(4, 3, 0.5, 1); });
    expect_error(ErrorCode::too_few_classes, [] { make_model(1, 3, 0.5, 1); });
}

TEST_CASE("likelihood rows are exact simplex rows, strictly positive when separable < 1") {
    const auto model = make_model(6, 14, 0.55, 88);
    for (std::size_t k = 0; k < model.classes; ++k) {
        auto row = model.likelihood_row(k);
        CHECK(detail::sum_left_to_right(row) == 1.0);
        for (double v : row) CHECK(v > 0.0);
    }
}

TEST_CASE("prior families are deterministic shapes") {
    const auto uniform = family_prior(4, PriorFamily::uniform, 0.0);
    for (std::size_t k = 0; k < 4; ++k) CHECK(uniform[k] == 0.25);

    const auto decay = family_prior(4, PriorFamily::exponential, 0.5);
    CHECK(decay[0] > decay[1]);
    CHECK(decay[1] > decay[2]);
    CHECK(decay[1] / decay[0] == doctest::Approx(std::exp(-0.5)));

    const auto ramp = family_prior(4, PriorFamily::linear, 1.0);
    CHECK(ramp[0] > ramp[3]);
    CHECK(ramp[3] > 0.0);
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto model = make_model(4, 8, 0.7, 11);
    const auto prior = family_prior(4, PriorFamily::exponential, 0.5);
    const auto first = sample_testset(model, prior, 200, 12);
    const auto second = sample_testset(model, prior, 200, 12);
    CHECK(test_support::bitwise_equal(first.posteriors.data(), second.posteriors.data()));
    for (std::size_t i = 0; i < first.labels.size(); ++i)
        CHECK(first.labels[i] == second.labels[i]);

    const auto other = sample_testset(model, prior, 200, 13);
    CHECK_FALSE(test_support::bitwise_equal(first.posteriors.data(), other.posteriors.data()));
}

TEST_CASE("full separability gives one-hot rows and exact prior recovery") {
    const auto model = make_model(4, 4, 1.0, 21);
    const auto prior = family_prior(4, PriorFamily::exponential, 0.7);
    const auto data = sample_testset(model, prior, 500, 22);
    for (std::size_t i = 0; i < data.posteriors.rows(); ++i) {
        auto row = data.posteriors.row(i);
        for (std::size_t k = 0; k < row.size(); ++k)
            CHECK(row[k] == (k == data.labels[i] ? 1.0 : 0.0));
    }

    EstimatorConfig config;
    config.method = Method::em;
    config.initial_estimate = model.train_prior;
    const auto ratios = compute_ratios(data.posteriors, model.train_prior);
    const auto result = estimate_em(ratios, config);
    const auto frequencies = empirical_prior(data.labels, 4);
    CHECK(test_support::max_abs_diff(result.estimate.values(), frequencies.values()) < 1e-9);
}

TEST_CASE("inlier rows are exactly the analytic symbol posteriors") {
    const auto model = make_model(5, 10, 0.65, 33);
    const auto data = sample_testset(model, model.train_prior, 400, 34);
    const auto table = detail::symbol_posterior_table(model);
    for (std::size_t i = 0; i < data.posteriors.rows(); ++i) {
        auto row = data.posteriors.row(i);
        bool matched = false;
        for (std::size_t m = 0; m < model.symbols && !matched; ++m) {
            std::span<const double> analytic(table.data() + m * model.classes, model.classes);
            matched = test_support::bitwise_equal(row, analytic);
        }
        CHECK(matched);
    }
}

TEST_CASE("outlier rows are detached from the symbol table") {
    const auto model = make_model(5, 10, 0.65, 35);
    const auto all_noise = sample_testset(model, model.train_prior, 100, 36, 1.0);
    const auto table = detail::symbol_posterior_table(model);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < all_noise.posteriors.rows(); ++i) {
        auto row = all_noise.posteriors.row(i);
        for (std::size_t m = 0; m < model.symbols; ++m) {
            std::span<const double> analytic(table.data() + m * model.classes, model.classes);
            if (test_support::bitwise_equal(row, analytic)) {
                ++matches;
                break;
            }
        }
        CHECK(detail::sum_left_to_right(row) == 1.0);
    }
    CHECK(matches == 0);

    const auto half_noise = sample_testset(model, model.train_prior, 400, 37, 0.5);
    std::size_t noise_rows = 0;
    for (std::size_t i = 0; i < half_noise.posteriors.rows(); ++i) {
        auto row = half_noise.posteriors.row(i);
        bool matched = false;
        for (std::size_t m = 0; m < model.symbols && !matched; ++m) {
            std::span<const double> analytic(table.data() + m * model.classes, model.classes);
            matched = test_support::bitwise_equal(row, analytic);
        }
        if (!matched) ++noise_rows;
    }
    CHECK(noise_rows > 140);
    CHECK(noise_rows < 260);
}

TEST_CASE("bayes_optimal_accuracy worked examples") {
    CHECK(bayes_optimal_accuracy(make_model(3, 3, 1.0, 1),
                                 family_prior(3, PriorFamily::uniform, 0.0)) == 1.0);

    const auto pair = make_model(2, 2, 0.8, 2);
    CHECK(bayes_optimal_accuracy(pair, validate_prior({0.5, 0.5})) == doctest::Approx(0.8));
    CHECK(bayes_optimal_accuracy(pair, validate_prior({1.0, 0.0})) == 1.0);
}

TEST_CASE("sample_testset validates its arguments") {
    const auto model = make_model(3, 6, 0.5, 3);
    expect_error(ErrorCode::dimension_mismatch, [&] {
        sample_testset(model, validate_prior({0.5, 0.5}), 10, 1);
    });
    expect_error(ErrorCode::invalid_config, [&] {
        sample_testset(model, model.train_prior, 0, 1);
    });
    expect_error(ErrorCode::invalid_config, [&] {
        sample_testset(model, model.train_prior, 10, 1, 1.5);
    });
}
