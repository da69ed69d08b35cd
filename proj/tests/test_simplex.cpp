#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "priorshift/simplex.hpp"
#include "test_support.hpp"

using namespace priorshift;
using test_support::expect_error;

namespace {

// Independent oracle: minimize ||x - p||^2 over a simplex grid of the given
// step by exhaustive enumeration. K = 2 or 3 only.
std::vector<double> grid_projection(std::span<const double> x, double step) {
    REQUIRE((x.size() == 2 || x.size() == 3));
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
    std::vector<double> best;
    double best_cost = std::numeric_limits<double>::infinity();
    if (x.size() == 2) {
        for (std::size_t a = 0; a <= steps; ++a) {
            const double p0 = static_cast<double>(a) * step;
            const double p1 = 1.0 - p0;
            const double d0 = x[0] - p0;
            const double d1 = x[1] - p1;
            const double cost = d0 * d0 + d1 * d1;
            if (cost < best_cost) {
                best_cost = cost;
                best = {p0, p1};
            }
        }
    } else {
        for (std::size_t a = 0; a <= steps; ++a) {
            const double p0 = static_cast<double>(a) * step;
            const double d0 = x[0] - p0;
            for (std::size_t b = 0; b + a <= steps; ++b) {
                const double p1 = static_cast<double>(b) * step;
                const double p2 = 1.0 - p0 - p1;
                const double d1 = x[1] - p1;
                const double d2 = x[2] - p2;
                const double cost = d0 * d0 + d1 * d1 + d2 * d2;
                if (cost < best_cost) {
                    best_cost = cost;
                    best = {p0, p1, p2};
                }
            }
        }
    }
    return best;
}

// Random point in [-2, 2]^K aligned to a 2^-13 grid, so adding small dyadic
// constants is exact.
std::vector<double> aligned_point(std::mt19937_64& gen, std::size_t dims) {
    std::vector<double> x(dims);
    for (double& v : x) {
        const auto ticks = static_cast<long long>(gen() % (4u << 13)) - (2LL << 13);
        v = std::ldexp(static_cast<double>(ticks), -13);
    }
    return x;
}

}  // namespace

TEST_CASE("projection worked examples") {
    const auto same = project_to_simplex(std::vector<double>{0.5, 0.5});
    CHECK(same[0] == 0.5);
    CHECK(same[1] == 0.5);

    // Sorted [2, 0]: threshold stops at rho = 1, tau = -1.
    const auto clipped = project_to_simplex(std::vector<double>{2.0, 0.0});
    CHECK(clipped[0] == 1.0);
    CHECK(clipped[1] == 0.0);

    const auto split = project_to_simplex(std::vector<double>{1.0, 1.0});
    CHECK(split[0] == 0.5);
    CHECK(split[1] == 0.5);
}

TEST_CASE("projection matches the brute-force grid oracle") {
    std::mt19937_64 gen(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dims = trial % 2 == 0 ? 2 : 3;
        const auto x = aligned_point(gen, dims);
        const auto projected = project_to_simplex(x);
        const auto reference = grid_projection(x, 1e-3);
        for (std::size_t k = 0; k < dims; ++k)
            CHECK(std::abs(projected[k] - reference[k]) <= 2e-3);
    }
}

TEST_CASE("projection is idempotent bit for bit") {
    std::mt19937_64 gen(102);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> x(2 + trial % 4);
        for (double& v : x) v = box(gen);
        const auto once = project_to_simplex(x);
        const auto twice = project_to_simplex(once.values());
        CHECK(test_support::bitwise_equal(once.values(), twice.values()));
    }
}

TEST_CASE("projection ignores translations along the all-ones direction") {
    std::mt19937_64 gen(103);
    const double shifts[] = {1.0, -0.5, 0.25, 7.0, -3.0};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dims = 2 + trial % 3;
        const auto x = aligned_point(gen, dims);
        const auto base = project_to_simplex(x);
        for (double c : shifts) {
            std::vector<double> moved(x);
            for (double& v : moved) v += c;  // exact: both operands are dyadic
            const auto shifted = project_to_simplex(moved);
            CHECK(test_support::bitwise_equal(base.values(), shifted.values()));
        }
    }
}

TEST_CASE("projection output is a valid simplex point with float sum one") {
    std::mt19937_64 gen(104);
    std::uniform_real_distribution<double> box(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(2 + trial % 6);
        for (double& v : x) v = box(gen);
        const auto p = project_to_simplex(x);
        CHECK(detail::sum_left_to_right(p.values()) == 1.0);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] >= 0.0);
    }
}

TEST_CASE("projection rejects non-finite input") {
    expect_error(ErrorCode::non_finite_input, [] {
        project_to_simplex(std::vector<double>{1.0, std::numeric_limits<double>::infinity()});
    });
    expect_error(ErrorCode::non_finite_input, [] {
        project_to_simplex(std::vector<double>{std::numeric_limits<double>::quiet_NaN(), 0.0});
    });
}

TEST_CASE("hellinger worked examples") {
    const auto p = validate_prior({0.5, 0.5});
    const auto q = validate_prior({1.0, 0.0});
    const auto r = validate_prior({0.0, 1.0});

    CHECK(hellinger(p, p) == 0.0);
    CHECK(hellinger(q, r) == 1.0);
    CHECK(hellinger(p, q) == doctest::Approx(std::sqrt(1.0 - 1.0 / std::sqrt(2.0))));
    CHECK(hellinger(p, q) == doctest::Approx(0.5412).epsilon(1e-4));
}

TEST_CASE("hellinger is a metric on random triples") {
    std::mt19937_64 gen(105);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = PriorVector::validate(test_support::random_interior_point(gen, 4, 0.0));
        const auto b = PriorVector::validate(test_support::random_interior_point(gen, 4, 0.0));
        const auto c = PriorVector::validate(test_support::random_interior_point(gen, 4, 0.0));
        CHECK(hellinger(a, b) == hellinger(b, a));
        CHECK(hellinger(a, c) <= hellinger(a, b) + hellinger(b, c) + 1e-15);
        CHECK(hellinger(a, b) >= 0.0);
        CHECK(hellinger(a, b) <= 1.0);
    }
    expect_error(ErrorCode::dimension_mismatch, [] {
        hellinger(validate_prior({0.5, 0.5}), validate_prior({0.4, 0.3, 0.3}));
    });
}

TEST_CASE("kl divergence worked examples") {
    const auto p = validate_prior({0.5, 0.5});
    const auto q = validate_prior({1.0, 0.0});

    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(q, p) == doctest::Approx(std::log(2.0)));
    expect_error(ErrorCode::absolute_continuity_violation, [&] { kl_divergence(p, q); });
    expect_error(ErrorCode::dimension_mismatch, [] {
        kl_divergence(validate_prior({0.5, 0.5}), validate_prior({0.4, 0.3, 0.3}));
    });
}
