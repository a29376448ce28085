#pragma once

#include "ape/counterfactual.hpp"
#include "ape/fieldgen.hpp"
#include "ape/models.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ape {

struct LinearSurrogate {
    double intercept = 0.0;
    std::vector<double> coefficients;  // one per expanded dimension
    double training_radius = 0.0;
    double adherence = 0.0;  // measured on the held-out 30% split only

    double value(const std::vector<double>& expanded) const;
};

struct RankedFeature {
    std::size_t dim = 0;  // expanded dimension
    double score = 0.0;   // signed coefficient
};

struct FeatureRanking {
    std::vector<RankedFeature> entries;       // |score| non-increasing
    std::vector<std::size_t> positive, negative;  // R+ and R-
};

struct LsApeConfig {
    FieldConfig field;
    double expansion = 1.8;
    bool literal_shrink = false;  // the algorithm-box theta = 0.05 reading, for audits
    double literal_theta = 0.05;
    std::size_t min_fit_points = 200;  // locality floor for the fit set
    int max_iterations = 64;
};

/// OLS (ridge fallback on singular normal equations) regressing the
/// target-class probability on expanded features; 70/30 split; adherence is
/// the agreement rate of (output >= 0.5) with the black-box labels on the
/// held-out split.
LinearSurrogate fit_linear_surrogate(const std::vector<Instance>& instances,
                                     const Classifier& model,
                                     int target_class,
                                     const Encoder& enc,
                                     std::uint64_t seed,
                                     double training_radius = 0.0);

/// The expanding local-surrogate procedure: start from a field centered on
/// the closest enemy with r = dist(target, enemy)/delta, fit, then grow the
/// radius (never shrinking) while the held-out adherence stays at or above
/// the initial value tau. Returns the last surrogate meeting tau.
LinearSurrogate ls_ape(const Dataset& ds,
                       const Classifier& model,
                       const Instance& target,
                       const Instance& closest_enemy,
                       const LsApeConfig& cfg);

FeatureRanking feature_ranking(const LinearSurrogate& g);
bool rankings_contradict(const FeatureRanking& a, const FeatureRanking& b);

struct TreeSurrogate {
    std::unique_ptr<BlackBoxModel> tree;  // CART, depth <= 3, on black-box labels
    double adherence = 0.0;
    std::string rule_text;               // target's root-to-leaf path as an if-then rule
    std::vector<PathStep> target_path;
    int predicted_class = 0;
};

TreeSurrogate fit_shallow_tree(const std::vector<Instance>& instances,
                               const Classifier& model,
                               const Instance& target,
                               const std::vector<FeatureSpec>& specs,
                               std::uint64_t seed);

/// Agreement rate between surrogate predictions and black-box labels.
double adherence_score(const std::vector<int>& surrogate, const std::vector<int>& black_box);

/// Instances a locality-aware consumer should fit on: the in-field draws,
/// topped up with the nearest out-of-field draws to `floor_count`.
std::vector<Instance> local_fit_set(const FieldSample& fs, std::size_t floor_count);

}  // namespace ape
