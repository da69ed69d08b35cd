#pragma once
// Synthetic, exactly calibrated classifier outputs under controlled prior
// shift. Observations live in a finite symbol space: class k emits symbol m
// with probability L(k, m), so the posterior of a perfectly calibrated
// train-time classifier is p(k|m) = L(k, m) p_train(k) / sum_j L(j, m)
// p_train(j), computable in closed form. That makes the Bayes-optimal
// accuracy under any test prior an exact finite sum, which is what the
// estimator claims are checked against.
//
// Sampling consumes the seed stream sequentially in a fixed order (label,
// optional outlier uniform, then symbol or K exponentials), all through the
// portable Rng, so one seed reproduces a dataset byte for byte anywhere.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "priorshift/error.hpp"
#include "priorshift/random.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

enum class PriorFamily { uniform, exponential, linear };

// Deterministic prior shapes: uniform, exponential decay p_k ~ exp(-rate*k),
// and truncated linear decay p_k ~ max(1 - rate*k/K, 0).
inline PriorVector family_prior(std::size_t classes, PriorFamily family, double rate) {
    if (classes < 2)
        throw Error(ErrorCode::too_few_classes, "synthesis: need at least 2 classes");
    std::vector<double> weights(classes);
    switch (family) {
        case PriorFamily::uniform:
            for (double& w : weights) w = 1.0;
            break;
        case PriorFamily::exponential:
            if (!(rate > 0.0))
                throw Error(ErrorCode::invalid_config,
                            "synthesis: exponential prior needs rate > 0");
            for (std::size_t k = 0; k < classes; ++k)
                weights[k] = std::exp(-rate * static_cast<double>(k));
            break;
        case PriorFamily::linear:
            if (!(rate > 0.0))
                throw Error(ErrorCode::invalid_config,
                            "synthesis: linear prior needs rate > 0");
            for (std::size_t k = 0; k < classes; ++k)
                weights[k] = std::max(
                    1.0 - rate * static_cast<double>(k) / static_cast<double>(classes), 0.0);
            break;
    }
    detail::normalize_exact(weights);
    return PriorVector::validate(std::move(weights));
}

struct SyntheticModel {
    std::size_t classes = 0;
    std::size_t symbols = 0;
    // classes x symbols, row-stochastic: likelihood[k*symbols + m] = L(k, m).
    std::vector<double> likelihood;
    PriorVector train_prior;
    std::uint64_t seed = 0;

    std::span<const double> likelihood_row(std::size_t k) const {
        return {likelihood.data() + k * symbols, symbols};
    }
};

// Class k puts `separability` mass on symbol k and spreads the rest over the
// other symbols with seeded weights in [0.1, 1.1), one uniform draw per
// off-target symbol in row-major order. The floor keeps every entry strictly
// positive for separability < 1, so ratios downstream are strictly positive.
inline SyntheticModel make_model(std::size_t classes, std::size_t symbols,
                                 double separability, std::uint64_t seed,
                                 PriorFamily train_family = PriorFamily::uniform,
                                 double train_rate = 0.5) {
    if (classes < 2)
        throw Error(ErrorCode::too_few_classes, "synthesis: need at least 2 classes");
    if (symbols < classes)
        throw Error(ErrorCode::invalid_config,
                    "synthesis: need at least as many symbols as classes");
    if (!(separability > 0.0) || !(separability <= 1.0))
        throw Error(ErrorCode::bad_separability,
                    "synthesis: separability must be inside (0, 1]");

    Rng rng(seed);
    std::vector<double> likelihood(classes * symbols, 0.0);
    for (std::size_t k = 0; k < classes; ++k) {
        std::span<double> row(likelihood.data() + k * symbols, symbols);
        row[k] = separability;
        if (separability < 1.0) {
            double total = 0.0;
            std::vector<double> draws(symbols, 0.0);
            for (std::size_t m = 0; m < symbols; ++m) {
                if (m == k) continue;
                draws[m] = 0.1 + rng.uniform();
                total += draws[m];
            }
            const double scale = (1.0 - separability) / total;
            for (std::size_t m = 0; m < symbols; ++m)
                if (m != k) row[m] = draws[m] * scale;
            detail::normalize_exact(row);
        }
    }
    return SyntheticModel{classes, symbols, std::move(likelihood),
                          family_prior(classes, train_family, train_rate), seed};
}

struct SyntheticDataset {
    PosteriorMatrix posteriors;
    LabelVector labels;
};

namespace detail {

// p(.|m) under the training prior, one exact simplex row per symbol.
inline std::vector<double> symbol_posterior_table(const SyntheticModel& model) {
    std::vector<double> table(model.symbols * model.classes, 0.0);
    for (std::size_t m = 0; m < model.symbols; ++m) {
        std::span<double> row(table.data() + m * model.classes, model.classes);
        double mass = 0.0;
        for (std::size_t k = 0; k < model.classes; ++k) {
            row[k] = model.likelihood[k * model.symbols + m] * model.train_prior[k];
            mass += row[k];
        }
        if (mass > 0.0) normalize_exact(row);
    }
    return table;
}

}  // namespace detail

// Draws labels from the test prior and symbols from the class-conditional
// rows, then emits the train-time posterior of the drawn symbol: exactly
// what a perfectly calibrated classifier trained under train_prior would
// output. A fraction of rows can be replaced by symmetric
// Dirichlet(outlier_concentration) noise detached from the label, imitating
// out-of-distribution inputs: concentration 1 gives diffuse noise rows,
// concentrations well below 1 give confident-but-random rows (mislabeled
// training images produce the latter).
inline SyntheticDataset sample_testset(const SyntheticModel& model,
                                       const PriorVector& test_prior, std::size_t count,
                                       std::uint64_t seed, double outlier_fraction = 0.0,
                                       double outlier_concentration = 1.0) {
    if (test_prior.size() != model.classes)
        throw Error(ErrorCode::dimension_mismatch,
                    "synthesis: test prior classes do not match the model");
    if (count == 0)
        throw Error(ErrorCode::invalid_config, "synthesis: need at least one sample");
    if (!(outlier_fraction >= 0.0) || !(outlier_fraction <= 1.0))
        throw Error(ErrorCode::invalid_config,
                    "synthesis: outlier fraction must be inside [0, 1]");
    if (!(outlier_concentration > 0.0))
        throw Error(ErrorCode::invalid_config,
                    "synthesis: outlier concentration must be positive");

    const std::vector<double> table = detail::symbol_posterior_table(model);
    Rng rng(seed);
    std::vector<double> data(count * model.classes);
    std::vector<std::size_t> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t label = rng.categorical(test_prior.values());
        labels[i] = label;
        std::span<double> out(data.data() + i * model.classes, model.classes);
        const bool outlier = outlier_fraction > 0.0 && rng.uniform() < outlier_fraction;
        if (outlier) {
            double total = 0.0;
            for (std::size_t k = 0; k < model.classes; ++k) {
                // Gamma(1) drawn as an exponential keeps the concentration-1
                // stream identical to earlier revisions of the generator.
                out[k] = outlier_concentration == 1.0 ? rng.exponential()
                                                      : rng.gamma(outlier_concentration);
                total += out[k];
            }
            if (total > 0.0) {
                detail::normalize_exact(out);
            } else {
                for (std::size_t k = 0; k < model.classes; ++k)
                    out[k] = 1.0 / static_cast<double>(model.classes);
                detail::normalize_exact(out);
            }
        } else {
            const std::size_t symbol = rng.categorical(model.likelihood_row(label));
            std::span<const double> analytic(table.data() + symbol * model.classes,
                                             model.classes);
            double mass = 0.0;
            for (double v : analytic) mass += v;
            if (!(mass > 0.0))
                throw Error(ErrorCode::degenerate_row,
                            "synthesis: symbol " + std::to_string(symbol) +
                                " is unreachable under the training prior");
            for (std::size_t k = 0; k < model.classes; ++k) out[k] = analytic[k];
        }
    }
    return SyntheticDataset{
        PosteriorMatrix::validate(count, model.classes, std::move(data)),
        LabelVector::validate(std::move(labels), model.classes)};
}

// Exact expected top-1 accuracy of posteriors corrected with the true test
// prior: sum over symbols of max_k L(k, m) p_test(k), enumerated over the
// finite symbol space.
inline double bayes_optimal_accuracy(const SyntheticModel& model,
                                     const PriorVector& test_prior) {
    if (test_prior.size() != model.classes)
        throw Error(ErrorCode::dimension_mismatch,
                    "synthesis: test prior classes do not match the model");
    double total = 0.0;
    for (std::size_t m = 0; m < model.symbols; ++m) {
        double best = 0.0;
        for (std::size_t k = 0; k < model.classes; ++k)
            best = std::max(best, model.likelihood[k * model.symbols + m] * test_prior[k]);
        total += best;
    }
    return total;
}

}  // namespace priorshift
