#pragma once
// Geometry of the probability simplex: exact Euclidean projection plus the
// Hellinger and Kullback-Leibler distances used to score prior estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "priorshift/error.hpp"
#include "priorshift/types.hpp"

namespace priorshift {

// Euclidean projection onto the unit simplex by the sort-and-threshold
// method: sort u descending, keep the largest rho with
// u_rho + (1 - sum_{r<=rho} u_r) / rho > 0, shift by that threshold and clip.
// O(K log K); exact for the class counts this library targets.
//
// Two structural properties the tests rely on:
//  - points already on the simplex (entries >= 0, float sum exactly 1) are
//    returned unchanged, which makes the projection idempotent bit for bit;
//  - the input is first shifted by its maximum, so translates along
//    (1,...,1) whose addition was exact follow the identical float path.
inline PriorVector project_to_simplex(std::span<const double> point) {
    for (std::size_t k = 0; k < point.size(); ++k)
        if (!std::isfinite(point[k]))
            throw Error(ErrorCode::non_finite_input,
                        "simplex: entry " + std::to_string(k) + " is not finite");

    bool on_simplex = true;
    for (double v : point)
        if (v < 0.0) {
            on_simplex = false;
            break;
        }
    if (on_simplex && detail::sum_left_to_right(point) == 1.0)
        return validate_prior(point);

    const double shift = *std::max_element(point.begin(), point.end());
    std::vector<double> centered(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) centered[k] = point[k] - shift;

    std::vector<double> sorted(centered);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double threshold = 0.0;
    for (std::size_t j = 1; j <= sorted.size(); ++j) {
        cumulative += sorted[j - 1];
        const double candidate = (1.0 - cumulative) / static_cast<double>(j);
        if (sorted[j - 1] + candidate > 0.0) threshold = candidate;
    }

    std::vector<double> projected(centered.size());
    for (std::size_t k = 0; k < centered.size(); ++k)
        projected[k] = std::max(centered[k] + threshold, 0.0);
    detail::normalize_exact(projected);
    return PriorVector::validate(std::move(projected));
}

// H(p, q) = sqrt(sum_k (sqrt(p_k) - sqrt(q_k))^2 / 2), in [0, 1].
inline double hellinger(const PriorVector& p, const PriorVector& q) {
    if (p.size() != q.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "simplex: hellinger arguments have different class counts");
    double ssq = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double d = std::sqrt(p[k]) - std::sqrt(q[k]);
        ssq += d * d;
    }
    return std::min(1.0, std::sqrt(0.5 * ssq));
}

// KL(p || q) = sum_k p_k log(p_k / q_k) with 0 log 0 = 0. Mass of p where q
// vanishes makes the divergence undefined and is reported as an error.
inline double kl_divergence(const PriorVector& p, const PriorVector& q) {
    if (p.size() != q.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "simplex: kl arguments have different class counts");
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] == 0.0) continue;
        if (q[k] == 0.0)
            throw Error(ErrorCode::absolute_continuity_violation,
                        "simplex: kl undefined, class " + std::to_string(k) +
                            " has mass in p but none in q");
        total += p[k] * std::log(p[k] / q[k]);
    }
    return total;
}

}  // namespace priorshift
