#pragma once
// Posterior correction for changed class priors. Each posterior row is
// reweighted by new-prior/old-prior ratios and renormalized:
//
//   adjusted(i, k) = p(k|x_i) * q(k)/p(k) / sum_j p(j|x_i) * q(j)/p(j)
//
// which is the exact posterior under the new priors when the
// class-conditional observation densities are unchanged.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "priorshift/error.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

namespace detail {

// Reweights one simplex row in place; `weights` holds q(k)/p(k). Throws when
// the reweighted mass underflows, which signals contradictory priors (the
// new prior is supported only where the row has no mass).
inline void adjust_row(std::span<const double> row, std::span<const double> weights,
                       std::span<double> out, std::size_t row_index) {
    for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k] * weights[k];
    const double mass = sum_left_to_right(out);
    if (mass < kDegenerateRowFloor)
        throw Error(ErrorCode::degenerate_row,
                    "correction: row " + std::to_string(row_index) +
                        " has no mass under the new priors");
    normalize_exact(out);
}

inline std::vector<double> prior_ratio(const PriorVector& train_prior,
                                       const PriorVector& test_prior) {
    std::vector<double> weights(train_prior.size());
    for (std::size_t k = 0; k < weights.size(); ++k)
        weights[k] = test_prior[k] / std::max(train_prior[k], kPriorClamp);
    return weights;
}

}  // namespace detail

inline PosteriorMatrix adjust_posteriors(const PosteriorMatrix& posteriors,
                                         const PriorVector& train_prior,
                                         const PriorVector& test_prior) {
    if (posteriors.cols() != train_prior.size() || train_prior.size() != test_prior.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "correction: posterior columns and prior classes do not agree");
    const std::vector<double> weights = detail::prior_ratio(train_prior, test_prior);
    std::vector<double> data(posteriors.rows() * posteriors.cols());
    for (std::size_t i = 0; i < posteriors.rows(); ++i) {
        std::span<double> out(data.data() + i * posteriors.cols(), posteriors.cols());
        detail::adjust_row(posteriors.row(i), weights, out, i);
    }
    return PosteriorMatrix::validate(posteriors.rows(), posteriors.cols(), std::move(data));
}

// Row-wise argmax; ties go to the lowest class index so predictions are
// reproducible across platforms.
inline LabelVector predict_top1(const PosteriorMatrix& posteriors) {
    std::vector<std::size_t> labels(posteriors.rows());
    for (std::size_t i = 0; i < posteriors.rows(); ++i) {
        auto row = posteriors.row(i);
        std::size_t best = 0;
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k] > row[best]) best = k;
        labels[i] = best;
    }
    return LabelVector::validate(std::move(labels), posteriors.cols());
}

}  // namespace priorshift
