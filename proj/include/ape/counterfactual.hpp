#pragma once

#include "ape/fieldgen.hpp"

#include <cstdint>
#include <vector>

namespace ape {

struct CounterfactualResult {
    Instance closest_enemy;
    double distance = 0.0;      // normalized standardized distance (GF); raw Euclidean (GS)
    double final_radius = 0.0;  // same units as `distance`
    FieldSample sample;         // the last field drawn
    std::size_t iterations = 0; // field samples drawn in total
    double wall_time_sec = 0.0;
    std::size_t model_calls = 0;
};

/// Two-phase radius schedule over data-aware fields: halve r while an
/// in-field enemy exists, then expand by theta (capped at 1) until one
/// appears. Returns the closest enemy seen under normalized standardized
/// distance. Throws NoCounterfactual when the expansion budget runs out.
CounterfactualResult growing_fields(const Dataset& ds,
                                    const Classifier& model,
                                    const Instance& target,
                                    const FieldConfig& cfg);

/// Baseline with the same schedule but uniform-in-ball perturbations in raw
/// feature space and plain Euclidean distance. The radius is unnormalized
/// (no cap), so the schedule expands until max_expansions. Errors on
/// categorical features.
CounterfactualResult growing_spheres(const Dataset& ds,
                                     const Classifier& model,
                                     const Instance& target,
                                     const FieldConfig& cfg);

struct EnemyClusterSet {
    std::size_t k = 1;
    /// Cluster centers projected back to instance coordinates (mean for
    /// numerical features, modal category for categoricals). Not necessarily
    /// valid enemies themselves.
    std::vector<Instance> centroids;
    /// Nearest true enemy to each centroid; classified differently from the
    /// target by construction.
    std::vector<Instance> representatives;
    std::vector<double> inertia_curve;  // inertia for k = 1..kmax
};

/// K-means (Lloyd, k-means++ seeding, 5 restarts) on standardized one-hot
/// coordinates with the cluster count chosen by the maximum-curvature elbow
/// on the inertia curve (ties prefer smaller k).
EnemyClusterSet cluster_enemies(const std::vector<Instance>& enemies,
                                const Classifier& model,
                                const Instance& target,
                                const DistanceContext& ctx,
                                std::size_t kmax = 10,
                                std::uint64_t seed = 0);

/// One Lloyd run; exposed for property tests. Returns final assignment and
/// appends the inertia after every iteration to `trace` when given.
double kmeans_lloyd(const std::vector<std::vector<double>>& points,
                    std::size_t k,
                    std::uint64_t seed,
                    std::vector<std::size_t>& assignment,
                    std::vector<std::vector<double>>& centroids,
                    std::vector<double>* trace = nullptr);

}  // namespace ape
