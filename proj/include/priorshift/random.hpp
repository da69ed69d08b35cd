#pragma once
// Seeded, portable pseudo-random primitives.
//
// Everything is layered on std::mt19937_64, whose output stream is pinned
// bit-exactly by the standard, with fixed transforms on top. The std::*
// distribution classes are deliberately avoided: their algorithms are
// implementation-defined, so two standard libraries can disagree on the
// values they draw. With these transforms, one seed reproduces the same
// dataset byte for byte on every platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "priorshift/error.hpp"

namespace priorshift {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1): top 53 bits of one engine draw.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). The product trick can round up to n when
    // n is a power of two and the draw is maximal, hence the cap.
    std::size_t uniform_below(std::size_t n) {
        auto j = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return j < n ? j : n - 1;
    }

    // Uniform on (0, 1]; safe under log.
    double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    // Unit-rate exponential variate; always finite and nonnegative.
    double exponential() { return -std::log(1.0 - uniform()); }

    // Standard normal via Box-Muller, one variate per two engine draws (no
    // cached spare, to keep the stream position a pure function of the call
    // count).
    double normal() {
        const double radius = std::sqrt(-2.0 * std::log(uniform_pos()));
        return radius * std::cos(6.283185307179586476925287 * uniform());
    }

    // Gamma(shape, 1) by Marsaglia-Tsang squeeze, with the standard
    // boost for shape < 1. Rejection consumes a variable number of engine
    // draws but is still a pure function of the seed.
    double gamma(double shape) {
        if (!(shape > 0.0))
            throw Error(ErrorCode::invalid_config, "random: gamma shape must be positive");
        if (shape < 1.0) {
            const double boost = std::pow(uniform_pos(), 1.0 / shape);
            return gamma(shape + 1.0) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            const double z = normal();
            const double t = 1.0 + c * z;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = uniform_pos();
            if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
        }
    }

    // Index draw from a probability vector by CDF inversion. Entries with
    // zero mass are never returned, even under accumulated rounding.
    std::size_t categorical(std::span<const double> probs) {
        if (probs.empty())
            throw Error(ErrorCode::empty_input, "random: categorical draw from empty vector");
        const double u = uniform();
        double cumulative = 0.0;
        std::size_t last_positive = probs.size();
        for (std::size_t k = 0; k < probs.size(); ++k) {
            if (probs[k] <= 0.0) continue;
            last_positive = k;
            cumulative += probs[k];
            if (u < cumulative) return k;
        }
        if (last_positive == probs.size())
            throw Error(ErrorCode::empty_input, "random: categorical draw from all-zero vector");
        return last_positive;
    }

    // Fisher-Yates with the bounded draw above; order of swaps is fixed.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = uniform_below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace priorshift
