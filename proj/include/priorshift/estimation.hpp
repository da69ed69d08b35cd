#pragma once
// Batch estimators of unknown test-time class priors from a ratio matrix
// a(i, k) = p(k|x_i) / p_train(k):
//
//   EM       - alternate per-row renormalization of P_k * a_ik with column
//              means; maximizes the log-likelihood
//                l(P) = sum_i log sum_k P_k a_ik
//              and never leaves the simplex.
//   PGA_MLE  - projected gradient ascent on l with constant learning rate,
//              dl/dP_k = sum_i a_ik / sum_j P_j a_ij.
//   PGA_MAP  - same ascent on l plus a symmetric Dirichlet log-prior
//              (alpha - 1) sum_k log P_k, gradient term (alpha - 1) / P_k;
//              alpha >= 1 keeps the objective concave and repels the
//              estimate from the simplex boundary. The Dirichlet normalizer
//              is constant in P and omitted from reported objectives.
//
// Estimates satisfy the PriorVector invariants after every iteration; EM by
// construction, PGA via the simplex projection. Multiple optima are
// possible; the returned estimate is wherever the chosen method converges
// from the configured initialization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "priorshift/error.hpp"
#include "priorshift/random.hpp"
#include "priorshift/simplex.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

enum class Method { em, pga_mle, pga_map };

struct EstimatorConfig {
    Method method = Method::em;
    // Dirichlet concentration; consulted by pga_map only and must be >= 1.
    double alpha = 1.0;
    // Constant step size; defaults to 0.1 / N since gradient entries scale
    // with the row count.
    std::optional<double> learning_rate;
    std::size_t max_iterations = 1000;
    // Convergence is max-abs change of the estimate between iterations.
    double convergence_tol = 1e-8;
    // Unset means "start from the training prior"; callers that know it
    // (CLI, online adaptation) resolve the default before running.
    std::optional<PriorVector> initial_estimate;
    // Keep the estimate on every trace record instead of every 10th + last.
    bool full_trace = false;
};

struct EstimationResult {
    PriorVector estimate;
    EstimationTrace trace;
};

// l(P) = sum_i log sum_k P_k a_ik. Returns -infinity when some row has zero
// mass under the estimate; callers treat that as a flagged state, not a
// number to optimize through.
//
// The estimate is scored as the distribution it denotes: the value is
// l(P / sum(P)) with a compensated outer sum and a compensated sum(P).
// For inputs whose entries sum to one exactly the correction term is zero
// and this is the plain formula; for iterates carrying an eps-scale sum
// drift it removes the spurious N * log(sum(P)) term, which would drown
// sub-1e-12 monotonicity checks in rounding noise at large N.
inline double log_likelihood(const RatioMatrix& ratios, const PriorVector& estimate) {
    if (ratios.cols() != estimate.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "estimation: ratio columns do not match estimate classes");
    detail::CompensatedSum total;
    for (std::size_t i = 0; i < ratios.rows(); ++i) {
        auto row = ratios.row(i);
        double mass = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) mass += estimate[k] * row[k];
        if (!(mass > 0.0)) return -std::numeric_limits<double>::infinity();
        total.add(std::log(mass));
    }
    const double scale = detail::compensated_sum(estimate.values());
    return total.value() - static_cast<double>(ratios.rows()) * std::log(scale);
}

// (alpha - 1) sum_k log P_k + l(P), the MAP objective up to the constant
// Dirichlet normalizer. -infinity when alpha > 1 and any coordinate is zero.
inline double log_posterior_objective(const RatioMatrix& ratios, const PriorVector& estimate,
                                      double alpha) {
    if (!(alpha >= 1.0))
        throw Error(ErrorCode::invalid_config, "estimation: alpha must be >= 1");
    const double loglik = log_likelihood(ratios, estimate);
    if (alpha == 1.0) return loglik;
    double log_prior = 0.0;
    for (std::size_t k = 0; k < estimate.size(); ++k) {
        if (estimate[k] == 0.0) return -std::numeric_limits<double>::infinity();
        log_prior += std::log(estimate[k]);
    }
    return (alpha - 1.0) * log_prior + loglik;
}

// dl/dP_k = sum_i a_ik / sum_j P_j a_ij.
inline std::vector<double> likelihood_gradient(const RatioMatrix& ratios,
                                               const PriorVector& estimate) {
    if (ratios.cols() != estimate.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "estimation: ratio columns do not match estimate classes");
    std::vector<double> gradient(estimate.size(), 0.0);
    for (std::size_t i = 0; i < ratios.rows(); ++i) {
        auto row = ratios.row(i);
        double mass = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) mass += estimate[k] * row[k];
        if (!(mass > 0.0))
            throw Error(ErrorCode::non_finite_gradient,
                        "estimation: row " + std::to_string(i) +
                            " has zero mass under the estimate");
        for (std::size_t k = 0; k < row.size(); ++k) gradient[k] += row[k] / mass;
    }
    return gradient;
}

// Likelihood gradient plus the Dirichlet term (alpha - 1) / P_k, clamped
// at kPriorClamp against the boundary singularity. This is the objective's
// gradient wherever the estimate is meaningfully interior; the optimizer
// uses a coarser boundary floor (see estimate_pga) because a 1e12-scale
// term would catapult the iterate across the simplex.
inline std::vector<double> map_gradient(const RatioMatrix& ratios, const PriorVector& estimate,
                                        double alpha) {
    if (!(alpha >= 1.0))
        throw Error(ErrorCode::invalid_config, "estimation: alpha must be >= 1");
    std::vector<double> gradient = likelihood_gradient(ratios, estimate);
    for (std::size_t k = 0; k < estimate.size(); ++k)
        gradient[k] += (alpha - 1.0) / std::max(estimate[k], kPriorClamp);
    return gradient;
}

namespace detail {

// Records scalars every iteration and the estimate per the thinning rule;
// the final record is patched to always carry the estimate.
class TraceBuilder {
  public:
    explicit TraceBuilder(bool full) : full_(full) {}

    void add(std::size_t iteration, double objective, double max_change,
             const PriorVector& estimate) {
        TraceRecord record{iteration, objective, max_change, std::nullopt};
        if (full_ || iteration % 10 == 0) record.estimate = estimate;
        records_.push_back(std::move(record));
        last_estimate_ = estimate;
    }

    EstimationTrace finish(Termination termination) {
        if (!records_.empty() && !records_.back().estimate)
            records_.back().estimate = last_estimate_;
        return EstimationTrace{std::move(records_), termination};
    }

  private:
    bool full_;
    std::vector<TraceRecord> records_;
    std::optional<PriorVector> last_estimate_;
};

inline PriorVector resolve_initial(const RatioMatrix& ratios, const EstimatorConfig& config) {
    if (!config.initial_estimate)
        throw Error(ErrorCode::invalid_config,
                    "estimation: no initial estimate; callers resolve the "
                    "train-prior default before running");
    if (config.initial_estimate->size() != ratios.cols())
        throw Error(ErrorCode::dimension_mismatch,
                    "estimation: initial estimate classes do not match ratio columns");
    return *config.initial_estimate;
}

inline void check_common_config(const EstimatorConfig& config) {
    if (config.max_iterations == 0)
        throw Error(ErrorCode::invalid_config, "estimation: max_iterations must be positive");
    if (!(config.convergence_tol > 0.0))
        throw Error(ErrorCode::invalid_config, "estimation: convergence_tol must be positive");
    if (config.learning_rate && !(*config.learning_rate > 0.0))
        throw Error(ErrorCode::invalid_config, "estimation: learning rate must be positive");
}

inline double max_abs_change(const PriorVector& a, const PriorVector& b) {
    double change = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        change = std::max(change, std::abs(a[k] - b[k]));
    return change;
}

}  // namespace detail

inline EstimationResult estimate_em(const RatioMatrix& ratios, const EstimatorConfig& config) {
    if (config.method != Method::em)
        throw Error(ErrorCode::invalid_config, "estimation: config method is not em");
    detail::check_common_config(config);
    PriorVector estimate = detail::resolve_initial(ratios, config);
    const std::size_t classes = ratios.cols();
    const double samples = static_cast<double>(ratios.rows());

    detail::TraceBuilder trace(config.full_trace);
    trace.add(0, log_likelihood(ratios, estimate), 0.0, estimate);
    Termination termination = Termination::max_iterations;

    std::vector<double> column_sums(classes);
    for (std::size_t iteration = 1; iteration <= config.max_iterations; ++iteration) {
        std::fill(column_sums.begin(), column_sums.end(), 0.0);
        for (std::size_t i = 0; i < ratios.rows(); ++i) {
            auto row = ratios.row(i);
            double mass = 0.0;
            for (std::size_t k = 0; k < classes; ++k) mass += estimate[k] * row[k];
            if (!(mass > 0.0))
                throw Error(ErrorCode::degenerate_row,
                            "estimation: row " + std::to_string(i) +
                                " has zero mass under the current estimate");
            for (std::size_t k = 0; k < classes; ++k)
                column_sums[k] += estimate[k] * row[k] / mass;
        }
        std::vector<double> next(classes);
        for (std::size_t k = 0; k < classes; ++k) next[k] = column_sums[k] / samples;
        detail::normalize_exact(next);
        PriorVector updated = PriorVector::validate(std::move(next));
        const double change = detail::max_abs_change(updated, estimate);
        estimate = std::move(updated);
        trace.add(iteration, log_likelihood(ratios, estimate), change, estimate);
        if (change < config.convergence_tol) {
            termination = Termination::converged;
            break;
        }
    }
    return EstimationResult{std::move(estimate), trace.finish(termination)};
}

inline EstimationResult estimate_pga(const RatioMatrix& ratios, const EstimatorConfig& config) {
    if (config.method != Method::pga_mle && config.method != Method::pga_map)
        throw Error(ErrorCode::invalid_config, "estimation: config method is not pga");
    detail::check_common_config(config);
    const bool map = config.method == Method::pga_map;
    if (map && !(config.alpha >= 1.0))
        throw Error(ErrorCode::invalid_config, "estimation: pga-map needs alpha >= 1");
    PriorVector estimate = detail::resolve_initial(ratios, config);
    const double step = config.learning_rate.value_or(
        ratios.rows() > 0 ? 0.1 / static_cast<double>(ratios.rows()) : 0.1);

    const auto objective = [&](const PriorVector& p) {
        return map ? log_posterior_objective(ratios, p, config.alpha)
                   : log_likelihood(ratios, p);
    };

    detail::TraceBuilder trace(config.full_trace);
    trace.add(0, objective(estimate), 0.0, estimate);
    Termination termination = Termination::max_iterations;

    // Boundary floor for the Dirichlet term inside the iteration. Interior
    // stationarity gives every MAP-optimal coordinate at least
    // (alpha - 1) / (N + (alpha - 1) K), since the equalized gradient value
    // is N + (alpha - 1) K and the likelihood part is nonnegative. Half
    // that bound caps the boundary term near the likelihood-gradient scale,
    // so zeroed coordinates re-enter the interior gently, and converged
    // estimates sit above the floor and never feel it.
    const double dirichlet_floor =
        map && config.alpha > 1.0
            ? 0.5 * (config.alpha - 1.0) /
                  (static_cast<double>(ratios.rows()) +
                   (config.alpha - 1.0) * static_cast<double>(ratios.cols()))
            : kPriorClamp;

    for (std::size_t iteration = 1; iteration <= config.max_iterations; ++iteration) {
        std::vector<double> gradient = likelihood_gradient(ratios, estimate);
        if (map && config.alpha > 1.0)
            for (std::size_t k = 0; k < estimate.size(); ++k)
                gradient[k] +=
                    (config.alpha - 1.0) / std::max(estimate[k], dirichlet_floor);
        std::vector<double> moved(estimate.size());
        for (std::size_t k = 0; k < estimate.size(); ++k) {
            moved[k] = estimate[k] + step * gradient[k];
            if (!std::isfinite(moved[k]))
                throw Error(ErrorCode::non_finite_gradient,
                            "estimation: non-finite gradient step; lower the "
                            "learning rate or check the ratios");
        }
        PriorVector updated = project_to_simplex(moved);
        const double change = detail::max_abs_change(updated, estimate);
        estimate = std::move(updated);
        trace.add(iteration, objective(estimate), change, estimate);
        if (change < config.convergence_tol) {
            termination = Termination::converged;
            break;
        }
    }
    return EstimationResult{std::move(estimate), trace.finish(termination)};
}

inline EstimationResult estimate(const RatioMatrix& ratios, const EstimatorConfig& config) {
    return config.method == Method::em ? estimate_em(ratios, config)
                                       : estimate_pga(ratios, config);
}

struct SplitDiagnostic {
    std::vector<std::size_t> optimize_rows;
    std::vector<std::size_t> holdout_rows;
    // Normalized log-likelihood (per row of the respective part), one entry
    // per estimator iteration, index-aligned with trace.records.
    std::vector<double> optimize_loglik;
    std::vector<double> holdout_loglik;
    EstimationTrace trace;
    PriorVector estimate;
};

// Runs the configured estimator on a seeded random subset of the rows and
// scores every iterate on both the optimization part and the held-out part.
// Comparing the two curves shows whether likelihood gains generalize beyond
// the rows being optimized.
inline SplitDiagnostic split_likelihood_diagnostic(const RatioMatrix& ratios,
                                                   const EstimatorConfig& config,
                                                   double split_fraction,
                                                   std::uint64_t seed) {
    if (!(split_fraction > 0.0) || !(split_fraction < 1.0))
        throw Error(ErrorCode::invalid_config,
                    "estimation: split fraction must be inside (0, 1)");
    const std::size_t rows = ratios.rows();
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    const auto optimize_count = static_cast<std::size_t>(
        std::floor(split_fraction * static_cast<double>(rows) + 0.5));
    if (optimize_count == 0 || optimize_count >= rows)
        throw Error(ErrorCode::split_too_small,
                    "estimation: split leaves an empty part (n=" + std::to_string(rows) +
                        ", fraction=" + std::to_string(split_fraction) + ")");

    SplitDiagnostic diagnostic{
        {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(optimize_count)},
        {order.begin() + static_cast<std::ptrdiff_t>(optimize_count), order.end()},
        {},
        {},
        {},
        PriorVector::validate(std::vector<double>(ratios.cols(),
                                                  1.0 / static_cast<double>(ratios.cols())))};
    std::sort(diagnostic.optimize_rows.begin(), diagnostic.optimize_rows.end());
    std::sort(diagnostic.holdout_rows.begin(), diagnostic.holdout_rows.end());

    const RatioMatrix optimize_part = ratios.select_rows(diagnostic.optimize_rows);
    const RatioMatrix holdout_part = ratios.select_rows(diagnostic.holdout_rows);

    EstimatorConfig traced = config;
    traced.full_trace = true;
    EstimationResult result = estimate(optimize_part, traced);

    const double optimize_norm = static_cast<double>(diagnostic.optimize_rows.size());
    const double holdout_norm = static_cast<double>(diagnostic.holdout_rows.size());
    for (const auto& record : result.trace.records) {
        diagnostic.optimize_loglik.push_back(
            log_likelihood(optimize_part, *record.estimate) / optimize_norm);
        diagnostic.holdout_loglik.push_back(
            log_likelihood(holdout_part, *record.estimate) / holdout_norm);
    }
    diagnostic.trace = std::move(result.trace);
    diagnostic.estimate = std::move(result.estimate);
    return diagnostic;
}

}  // namespace priorshift
