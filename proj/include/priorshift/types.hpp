#pragma once
// Core domain types: points on the probability simplex (PriorVector), row
// stochastic matrices of per-sample class posteriors (PosteriorMatrix), the
// posterior/prior ratio matrix consumed by the estimators (RatioMatrix),
// ground-truth labels (LabelVector) and per-iteration estimation traces.
//
// All types are immutable after construction and only constructible through
// validating factories, so invariants hold everywhere downstream. Class
// indices are 0-based throughout files, API and CLI.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "priorshift/error.hpp"

namespace priorshift {

// Absolute tolerance on the sum of a prior vector.
inline constexpr double kPriorSumTol = 1e-9;
// Looser row-sum tolerance for posterior matrices: external prediction dumps
// are typically float32.
inline constexpr double kRowSumTol = 1e-6;
// Clamp applied to training-prior denominators. A class present in the model
// head but absent from training counts would otherwise produce infinite
// ratios; such classes should be dropped upstream.
inline constexpr double kPriorClamp = 1e-12;
// Below this, a reweighted posterior row is treated as contradictory rather
// than renormalized into noise.
inline constexpr double kDegenerateRowFloor = 1e-300;

namespace detail {

inline double sum_left_to_right(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

// Neumaier-compensated accumulator; keeps long sums accurate to about one
// ulp of the result instead of growing with the term count.
struct CompensatedSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double value) {
        const double next = sum + value;
        if (std::abs(sum) >= std::abs(value))
            compensation += (sum - next) + value;
        else
            compensation += (value - next) + sum;
        sum = next;
    }

    double value() const { return sum + compensation; }
};

inline double compensated_sum(std::span<const double> values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

// Divide by the exact sum, then repair the rounding so the left-to-right
// float sum equals one bit for bit. Callers guarantee a positive, finite
// sum. The exact landing is what makes reweighting with identical priors an
// exact identity and projection idempotent.
inline void normalize_exact(std::span<double> values) {
    const double s = sum_left_to_right(values);
    for (double& v : values) v /= s;
    // Nudging the largest entry settles almost every row and never touches
    // zero entries.
    for (int pass = 0; pass < 8; ++pass) {
        const double residual = 1.0 - sum_left_to_right(values);
        if (residual == 0.0) return;
        *std::max_element(values.begin(), values.end()) += residual;
    }
    // The nudge can flip-flop across a rounding tie in the partial sums.
    // Rewriting a tail entry pins the final partial sum instead: with
    // prefix(j) and suffix(j) the float sums around position j, the value
    // (1 - suffix(j)) - prefix(j) puts the total on 1 whenever nonnegative.
    for (std::size_t j = values.size(); j-- > 0;) {
        double prefix = 0.0;
        for (std::size_t i = 0; i < j; ++i) prefix += values[i];
        double target = 1.0;
        for (std::size_t i = values.size(); i-- > j + 1;) target -= values[i];
        const double candidate = target - prefix;
        if (candidate < 0.0) continue;
        const double saved = values[j];
        values[j] = candidate;
        if (sum_left_to_right(values) == 1.0) return;
        values[j] = saved;
    }
}

inline bool is_nonnegative_real(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace detail

class PriorVector {
  public:
    static PriorVector validate(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }

  private:
    explicit PriorVector(std::vector<double> values) : values_(std::move(values)) {}
    std::vector<double> values_;
};

// Checks the simplex invariants without renormalizing: values are stored
// exactly as given or rejected.
inline PriorVector PriorVector::validate(std::vector<double> values) {
    if (values.size() < 2)
        throw Error(ErrorCode::too_few_classes,
                    "core: a prior needs at least 2 classes, got " +
                        std::to_string(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!detail::is_nonnegative_real(values[k]))
            throw Error(ErrorCode::negative_entry,
                        "core: prior entry " + std::to_string(k) +
                            " is not a nonnegative real");
    }
    const double sum = detail::sum_left_to_right(values);
    if (std::abs(sum - 1.0) > kPriorSumTol)
        throw Error(ErrorCode::sum_not_one,
                    "core: prior entries sum to " + std::to_string(sum) +
                        ", expected 1 within 1e-09");
    return PriorVector(std::move(values));
}

inline PriorVector validate_prior(std::span<const double> values) {
    return PriorVector::validate(std::vector<double>(values.begin(), values.end()));
}

inline PriorVector validate_prior(std::initializer_list<double> values) {
    return PriorVector::validate(std::vector<double>(values));
}

class PosteriorMatrix {
  public:
    static PosteriorMatrix validate(std::size_t rows, std::size_t cols,
                                    std::vector<double> row_major);
    static PosteriorMatrix validate(const std::vector<std::vector<double>>& grid);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    double at(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }
    std::span<const double> data() const noexcept { return data_; }

  private:
    PosteriorMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {}
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

// Rows whose sum is within kRowSumTol of one are renormalized exactly, so
// downstream math sees exact simplex rows; anything further off is rejected.
inline PosteriorMatrix PosteriorMatrix::validate(std::size_t rows, std::size_t cols,
                                                 std::vector<double> row_major) {
    if (rows == 0 || cols == 0)
        throw Error(ErrorCode::empty_matrix, "core: posterior matrix has no entries");
    if (row_major.size() != rows * cols)
        throw Error(ErrorCode::dimension_mismatch,
                    "core: posterior data size does not match rows*cols");
    for (std::size_t i = 0; i < rows; ++i) {
        std::span<double> row(row_major.data() + i * cols, cols);
        for (std::size_t k = 0; k < cols; ++k) {
            if (!detail::is_nonnegative_real(row[k]))
                throw Error(ErrorCode::negative_entry,
                            "core: posterior entry (" + std::to_string(i) + ", " +
                                std::to_string(k) + ") is not a nonnegative real");
        }
        const double sum = detail::sum_left_to_right(row);
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw Error(ErrorCode::row_sum_out_of_tolerance,
                        "core: posterior row " + std::to_string(i) + " sums to " +
                            std::to_string(sum) + ", expected 1 within 1e-06");
        detail::normalize_exact(row);
    }
    return PosteriorMatrix(rows, cols, std::move(row_major));
}

inline PosteriorMatrix PosteriorMatrix::validate(const std::vector<std::vector<double>>& grid) {
    if (grid.empty())
        throw Error(ErrorCode::empty_matrix, "core: posterior matrix has no entries");
    const std::size_t cols = grid.front().size();
    std::vector<double> flat;
    flat.reserve(grid.size() * cols);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i].size() != cols)
            throw Error(ErrorCode::dimension_mismatch,
                        "core: posterior row " + std::to_string(i) +
                            " has a different length");
        flat.insert(flat.end(), grid[i].begin(), grid[i].end());
    }
    return validate(grid.size(), cols, std::move(flat));
}

inline PosteriorMatrix validate_posteriors(const std::vector<std::vector<double>>& grid) {
    return PosteriorMatrix::validate(grid);
}

class RatioMatrix {
  public:
    static RatioMatrix validated(std::size_t rows, std::size_t cols,
                                 std::vector<double> row_major);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    double at(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

    RatioMatrix select_rows(std::span<const std::size_t> indices) const {
        std::vector<double> sub;
        sub.reserve(indices.size() * cols_);
        for (std::size_t i : indices) {
            auto r = row(i);
            sub.insert(sub.end(), r.begin(), r.end());
        }
        return RatioMatrix(indices.size(), cols_, std::move(sub));
    }

    RatioMatrix top_rows(std::size_t n) const {
        return RatioMatrix(n, cols_,
                           std::vector<double>(data_.begin(),
                                               data_.begin() + n * cols_));
    }

  private:
    RatioMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {}
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

inline RatioMatrix RatioMatrix::validated(std::size_t rows, std::size_t cols,
                                          std::vector<double> row_major) {
    if (cols == 0)
        throw Error(ErrorCode::empty_matrix, "core: ratio matrix has no columns");
    if (row_major.size() != rows * cols)
        throw Error(ErrorCode::dimension_mismatch,
                    "core: ratio data size does not match rows*cols");
    for (std::size_t n = 0; n < row_major.size(); ++n) {
        if (!detail::is_nonnegative_real(row_major[n]))
            throw Error(ErrorCode::non_finite_input,
                        "core: ratio entry " + std::to_string(n) +
                            " is not a finite nonnegative real");
    }
    return RatioMatrix(rows, cols, std::move(row_major));
}

// Per-sample posterior-to-training-prior ratios, the precomputed input of
// every estimator. Training priors below kPriorClamp are clamped so all
// entries stay finite.
inline RatioMatrix compute_ratios(const PosteriorMatrix& posteriors,
                                  const PriorVector& train_prior) {
    if (posteriors.cols() != train_prior.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "core: posterior columns (" + std::to_string(posteriors.cols()) +
                        ") do not match prior classes (" +
                        std::to_string(train_prior.size()) + ")");
    std::vector<double> inv(train_prior.size());
    for (std::size_t k = 0; k < train_prior.size(); ++k)
        inv[k] = std::max(train_prior[k], kPriorClamp);
    std::vector<double> data(posteriors.rows() * posteriors.cols());
    for (std::size_t i = 0; i < posteriors.rows(); ++i) {
        auto row = posteriors.row(i);
        for (std::size_t k = 0; k < row.size(); ++k)
            data[i * posteriors.cols() + k] = row[k] / inv[k];
    }
    return RatioMatrix::validated(posteriors.rows(), posteriors.cols(), std::move(data));
}

class LabelVector {
  public:
    static LabelVector validate(std::vector<std::size_t> labels, std::size_t num_classes) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] >= num_classes)
                throw Error(ErrorCode::label_out_of_range,
                            "core: label " + std::to_string(labels[i]) + " at position " +
                                std::to_string(i) + " is outside [0, " +
                                std::to_string(num_classes) + ")");
        }
        return LabelVector(std::move(labels));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t operator[](std::size_t i) const { return labels_[i]; }
    std::span<const std::size_t> labels() const noexcept { return labels_; }

  private:
    explicit LabelVector(std::vector<std::size_t> labels) : labels_(std::move(labels)) {}
    std::vector<std::size_t> labels_;
};

enum class Termination { converged, max_iterations };

// One estimator iteration. The estimate is optional: by default only every
// 10th iteration and the last keep it (the class count can be 10^4), a full
// trace is opt-in.
struct TraceRecord {
    std::size_t iteration = 0;
    double objective = 0.0;
    double max_change = 0.0;
    std::optional<PriorVector> estimate;
};

struct EstimationTrace {
    std::vector<TraceRecord> records;
    Termination termination = Termination::max_iterations;
};

}  // namespace priorshift
