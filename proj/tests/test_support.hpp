#pragma once
// Shared helpers for the unit suites.

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "priorshift/error.hpp"
#include "priorshift/types.hpp"

namespace test_support {

// Runs fn, requires it to throw priorshift::Error with the given code.
template <typename Fn>
void expect_error(priorshift::ErrorCode code, Fn&& fn) {
    try {
        fn();
    } catch (const priorshift::Error& e) {
        CHECK_MESSAGE(e.code() == code, "expected ", priorshift::error_code_name(code),
                      ", got ", priorshift::error_code_name(e.code()), ": ", e.what());
        return;
    }
    FAIL_CHECK("expected error ", priorshift::error_code_name(code), ", nothing thrown");
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// Random interior simplex point with every coordinate >= floor.
inline std::vector<double> random_interior_point(std::mt19937_64& gen, std::size_t classes,
                                                 double floor) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(classes);
    double total = 0.0;
    for (double& v : p) {
        v = 0.05 + unit(gen);
        total += v;
    }
    const double keep = 1.0 - floor * static_cast<double>(classes);
    for (double& v : p) v = floor + keep * v / total;
    priorshift::detail::normalize_exact(p);
    return p;
}

// Asserts the classical EM guarantee on a trace: the objective never drops
// by more than tol between consecutive iterations.
inline void check_monotone_objective(const priorshift::EstimationTrace& trace,
                                     double tol = 1e-12) {
    for (std::size_t t = 1; t < trace.records.size(); ++t)
        CHECK(trace.records[t].objective >= trace.records[t - 1].objective - tol);
}

class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("priorshift_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

  private:
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::filesystem::path path_;
};

}  // namespace test_support
