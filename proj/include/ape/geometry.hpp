#pragma once

#include "ape/tabular.hpp"

#include <vector>

namespace ape {

/// Everything needed to evaluate the standardized Euclidean distance in the
/// one-hot expanded space, plus the per-reference normalizer delta.
struct DistanceContext {
    std::vector<FeatureSpec> specs;
    std::vector<FeatureStats> stats;
    double delta = 1.0;

    static DistanceContext from(const Dataset& ds, const Instance& reference);
    /// Context without a delta normalizer (delta = 1); for raw distances.
    static DistanceContext raw(const Dataset& ds);
};

/// sqrt of sum over expanded dimensions of ((a_i - b_i)/sigma_i)^2; one-hot
/// categorical coordinates use sigma = 1, so a single differing category
/// contributes 2 under the square root. A zero-sigma numerical feature
/// contributes 0 when the values agree and +infinity otherwise.
double standardized_distance(const Instance& a, const Instance& b, const DistanceContext& ctx);

/// standardized_distance divided by ctx.delta.
double normalized_distance(const Instance& a, const Instance& b, const DistanceContext& ctx);

/// Distance of `point` to the sample mean under the sample's per-dimension
/// variance (diagonal covariance), in the one-hot expanded space. Dimensions
/// with zero variance contribute 0 when the point matches the mean and use a
/// 1e-12 variance floor otherwise.
double mahalanobis_distance(const Instance& point,
                            const std::vector<Instance>& sample,
                            const std::vector<FeatureSpec>& specs);

/// Plain Euclidean distance on raw coordinates (numerical features only).
double euclidean_distance(const Instance& a, const Instance& b);

}  // namespace ape
