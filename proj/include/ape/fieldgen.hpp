#pragma once

#include "ape/geometry.hpp"
#include "ape/models.hpp"
#include "ape/rng.hpp"
#include "ape/tabular.hpp"

#include <cstdint>
#include <vector>

namespace ape {

/// The thesis states two mutually inconsistent bound formulas for the numeric
/// perturbation. Prose keeps the uniform-variance identity
/// var = (b-a)^2/12 = sigma and is the default; Literal is the algorithm-box
/// reading with width sigma.
enum class NumericVariant { Prose, Literal };

struct FieldConfig {
    double r0 = 0.1;
    double theta = 1.8;
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    NumericVariant variant = NumericVariant::Prose;
    int max_halvings = 40;    // phase-1 guard for targets sitting on the boundary
    int max_expansions = 20;  // phase-2 guard for locally constant models
};

struct FieldSample {
    Instance center;
    double radius = 0.0;
    std::vector<Instance> instances;
    std::vector<int> labels;
    std::vector<double> distance;  // normalized standardized distance to center
    std::vector<std::size_t> friends;  // indices with label == reference_class
    std::vector<std::size_t> enemies;  // the rest
    int reference_class = 0;

    /// Indices (into instances) within normalized distance <= radius of the
    /// center; the sampler's uniform bounds do not shrink with the radius, so
    /// locality-sensitive consumers restrict themselves to this subset.
    std::vector<std::size_t> in_field_friends;
    std::vector<std::size_t> in_field_enemies;
};

struct PerturbBounds {
    double a = 0.0, b = 0.0;
};

/// Uniform offset bounds for one numerical feature at radius r.
PerturbBounds perturb_bounds(const FeatureStats& st, double r, NumericVariant variant);

/// One draw of the field generation process: every numerical feature gets an
/// additive Uniform(a, b) offset (no-op when sigma = 0); every categorical
/// feature keeps the center's category with probability 1 - rho,
/// rho ~ Uniform(0, r), and otherwise redraws from the re-adjusted empirical
/// probabilities of the remaining categories.
Instance sample_field_instance(const std::vector<FeatureSpec>& specs,
                               const std::vector<FeatureStats>& stats,
                               const std::vector<std::vector<double>>& cat_freqs,
                               double r,
                               const Instance& center,
                               Rng& rng,
                               NumericVariant variant = NumericVariant::Prose);

/// n independent draws labeled by the model and partitioned into friends and
/// enemies of `reference_class`. Deterministic for a fixed config seed.
FieldSample sample_field(const Dataset& ds,
                         const Classifier& model,
                         const DistanceContext& ctx,
                         double r,
                         const Instance& center,
                         const FieldConfig& cfg,
                         int reference_class,
                         std::uint64_t stream = 0);

}  // namespace ape
