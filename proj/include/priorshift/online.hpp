#pragma once
// Sequential prior adaptation: sample i is adjusted with priors estimated
// from samples 1..i-1 only. The running estimate starts at the training
// prior, is refit every `refit_every` arrivals (warm-started from the
// previous estimate), and never sees the current row or any label, so the
// adjusted output for row i is a pure function of rows 1..i and the config.

#include <cstddef>
#include <vector>

#include "priorshift/correction.hpp"
#include "priorshift/error.hpp"
#include "priorshift/estimation.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

struct PriorSnapshot {
    // Index of the first row adjusted with this estimate.
    std::size_t first_row = 0;
    PriorVector estimate;
};

struct OnlineResult {
    PosteriorMatrix adjusted;
    std::vector<PriorSnapshot> snapshots;
};

inline OnlineResult online_adapt(const PosteriorMatrix& posteriors,
                                 const PriorVector& train_prior,
                                 const EstimatorConfig& config, std::size_t refit_every) {
    if (refit_every == 0)
        throw Error(ErrorCode::invalid_config, "online: refit_every must be positive");
    if (posteriors.cols() != train_prior.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "online: posterior columns and prior classes do not agree");

    const RatioMatrix ratios = compute_ratios(posteriors, train_prior);
    PriorVector current = train_prior;
    std::vector<PriorSnapshot> snapshots{{0, current}};
    std::vector<double> weights = detail::prior_ratio(train_prior, current);

    std::vector<double> data(posteriors.rows() * posteriors.cols());
    for (std::size_t i = 0; i < posteriors.rows(); ++i) {
        if (i >= 1 && i % refit_every == 0) {
            EstimatorConfig warm = config;
            warm.initial_estimate = current;
            current = estimate(ratios.top_rows(i), warm).estimate;
            snapshots.push_back({i, current});
            weights = detail::prior_ratio(train_prior, current);
        }
        std::span<double> out(data.data() + i * posteriors.cols(), posteriors.cols());
        detail::adjust_row(posteriors.row(i), weights, out, i);
    }
    return OnlineResult{
        PosteriorMatrix::validate(posteriors.rows(), posteriors.cols(), std::move(data)),
        std::move(snapshots)};
}

}  // namespace priorshift
