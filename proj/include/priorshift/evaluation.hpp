#pragma once
// Metrics connecting posteriors and prior estimates to ground truth labels:
// top-1 accuracy, per-class expected vs empirical error, the
// marginalization prior estimate (column means of the posteriors) and
// empirical class frequencies. Labels are consumed here and nowhere else;
// the estimators stay label-free.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "priorshift/correction.hpp"
#include "priorshift/error.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

inline double top1_accuracy(const PosteriorMatrix& posteriors, const LabelVector& labels) {
    if (posteriors.rows() != labels.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "evaluation: posterior rows and label count do not agree");
    const LabelVector predictions = predict_top1(posteriors);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (predictions[i] == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

// Column means of the posterior matrix; estimates the class priors of the
// data the rows were drawn from, assuming calibrated posteriors.
inline PriorVector marginalized_prior(const PosteriorMatrix& posteriors) {
    std::vector<double> means(posteriors.cols(), 0.0);
    for (std::size_t i = 0; i < posteriors.rows(); ++i) {
        auto row = posteriors.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) means[k] += row[k];
    }
    for (double& m : means) m /= static_cast<double>(posteriors.rows());
    return PriorVector::validate(std::move(means));
}

// Expected error:  e_k     = mean over samples of class k of 1 - p(k|x_i)
// Empirical error: e_k_emp = fraction of samples of class k misclassified
// Classes without samples are reported absent (count 0, NaN errors), never
// as zero error.
struct PerClassError {
    std::size_t count = 0;
    double expected_error = std::numeric_limits<double>::quiet_NaN();
    double empirical_error = std::numeric_limits<double>::quiet_NaN();
    bool absent() const noexcept { return count == 0; }
};

inline std::vector<PerClassError> per_class_errors(const PosteriorMatrix& posteriors,
                                                   const LabelVector& labels) {
    if (posteriors.rows() != labels.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "evaluation: posterior rows and label count do not agree");
    const LabelVector predictions = predict_top1(posteriors);
    std::vector<std::size_t> counts(posteriors.cols(), 0);
    std::vector<double> expected(posteriors.cols(), 0.0);
    std::vector<std::size_t> wrong(posteriors.cols(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::size_t k = labels[i];
        counts[k] += 1;
        expected[k] += 1.0 - posteriors.at(i, k);
        if (predictions[i] != k) wrong[k] += 1;
    }
    std::vector<PerClassError> result(posteriors.cols());
    for (std::size_t k = 0; k < result.size(); ++k) {
        result[k].count = counts[k];
        if (counts[k] == 0) continue;
        result[k].expected_error = expected[k] / static_cast<double>(counts[k]);
        result[k].empirical_error =
            static_cast<double>(wrong[k]) / static_cast<double>(counts[k]);
    }
    return result;
}

inline PriorVector empirical_prior(const LabelVector& labels, std::size_t num_classes) {
    if (labels.size() == 0)
        throw Error(ErrorCode::empty_input, "evaluation: no labels to count");
    std::vector<double> frequencies(num_classes, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) frequencies[labels[i]] += 1.0;
    for (double& f : frequencies) f /= static_cast<double>(labels.size());
    return PriorVector::validate(std::move(frequencies));
}

}  // namespace priorshift
