#include <doctest.h>

#include <random>
#include <vector>

#include "priorshift/correction.hpp"
#include "test_support.hpp"

using namespace priorshift;
using test_support::expect_error;

TEST_CASE("adjusting with the training prior itself is the exact identity") {
    const auto prior = validate_prior({0.3, 0.2, 0.5});
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> grid;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> row(3);
        double total = 0.0;
        for (double& v : row) {
            v = unit(gen);
            total += v;
        }
        for (double& v : row) v /= total;
        grid.push_back(row);
    }
    const auto posteriors = validate_posteriors(grid);
    const auto adjusted = adjust_posteriors(posteriors, prior, prior);
    CHECK(test_support::bitwise_equal(posteriors.data(), adjusted.data()));
}

TEST_CASE("adjust worked examples") {
    const auto train = validate_prior({0.5, 0.5});
    const auto posteriors = validate_posteriors({{0.6, 0.4}});

    const auto shifted = adjust_posteriors(posteriors, train, validate_prior({0.25, 0.75}));
    CHECK(shifted.at(0, 0) == doctest::Approx(1.0 / 3));
    CHECK(shifted.at(0, 1) == doctest::Approx(2.0 / 3));

    const auto delta = adjust_posteriors(posteriors, train, validate_prior({1.0, 0.0}));
    CHECK(delta.at(0, 0) == 1.0);
    CHECK(delta.at(0, 1) == 0.0);
}

TEST_CASE("adjustments compose") {
    std::mt19937_64 gen(32);
    const auto train = PriorVector::validate(test_support::random_interior_point(gen, 4, 0.01));
    const auto mid = PriorVector::validate(test_support::random_interior_point(gen, 4, 0.01));
    const auto final_prior =
        PriorVector::validate(test_support::random_interior_point(gen, 4, 0.01));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> grid;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> row(4);
        double total = 0.0;
        for (double& v : row) {
            v = 0.01 + unit(gen);
            total += v;
        }
        for (double& v : row) v /= total;
        grid.push_back(row);
    }
    const auto posteriors = validate_posteriors(grid);
    const auto two_hops =
        adjust_posteriors(adjust_posteriors(posteriors, train, mid), mid, final_prior);
    const auto direct = adjust_posteriors(posteriors, train, final_prior);
    CHECK(test_support::max_abs_diff(two_hops.data(), direct.data()) < 1e-12);
}

TEST_CASE("uniform priors leave the argmax unchanged") {
    const auto uniform = validate_prior({0.25, 0.25, 0.25, 0.25});
    const auto posteriors =
        validate_posteriors({{0.1, 0.2, 0.3, 0.4}, {0.7, 0.1, 0.1, 0.1}, {0.25, 0.25, 0.25, 0.25}});
    const auto adjusted = adjust_posteriors(posteriors, uniform, uniform);
    const auto before = predict_top1(posteriors);
    const auto after = predict_top1(adjusted);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("adjusted rows sum to exactly one") {
    std::mt19937_64 gen(33);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> row(5);
        double total = 0.0;
        for (double& v : row) {
            v = unit(gen);
            total += v;
        }
        for (double& v : row) v /= total;
        const auto train = PriorVector::validate(test_support::random_interior_point(gen, 5, 0.01));
        const auto test = PriorVector::validate(test_support::random_interior_point(gen, 5, 0.01));
        const auto adjusted = adjust_posteriors(validate_posteriors({row}), train, test);
        CHECK(detail::sum_left_to_right(adjusted.row(0)) == 1.0);
    }
}

TEST_CASE("contradictory priors raise degenerate_row instead of emitting NaN") {
    const auto posteriors = validate_posteriors({{1.0, 0.0}});
    expect_error(ErrorCode::degenerate_row, [&] {
        adjust_posteriors(posteriors, validate_prior({0.5, 0.5}), validate_prior({0.0, 1.0}));
    });
}

TEST_CASE("adjust rejects mismatched dimensions") {
    expect_error(ErrorCode::dimension_mismatch, [] {
        adjust_posteriors(validate_posteriors({{0.5, 0.5}}), validate_prior({0.4, 0.3, 0.3}),
                          validate_prior({0.4, 0.3, 0.3}));
    });
}

TEST_CASE("predict_top1 breaks ties toward the lowest class index") {
    const auto labels = predict_top1(validate_posteriors({{0.6, 0.4}, {0.5, 0.5}}));
    CHECK(labels[0] == 0);
    CHECK(labels[1] == 0);

    const auto three = predict_top1(validate_posteriors({{0.1, 0.2, 0.7}}));
    CHECK(three[0] == 2);
}
