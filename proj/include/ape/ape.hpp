#pragma once

#include "ape/counterfactual.hpp"
#include "ape/oracle.hpp"
#include "ape/rules.hpp"
#include "ape/surrogates.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ape {

enum class FallbackKind { Tree, Anchor };

struct ExplainConfig {
    std::uint64_t seed = 0;
    std::size_t n_samples = 2000;
    double r0 = 0.1;
    double theta = 1.8;
    NumericVariant variant = NumericVariant::Prose;
    double folding_threshold = 1.0;
    double si_threshold = 1.0;
    double tau = 0.95;  // precision gate for the enemy-set extension and anchors
    FallbackKind fallback = FallbackKind::Tree;
    DiscretizerMethod discretizer = DiscretizerMethod::MDLP;
    std::size_t kmax = 10;
    bool use_folding = true;   // ablation switches
    bool use_thornton = true;

    FieldConfig field_config() const;
    OracleConfig oracle_config() const;
};

struct RulePayload {
    FallbackKind kind = FallbackKind::Tree;
    std::string rule_text;
    double adherence = 0.0;   // tree surrogate holdout agreement
    double precision = 0.0;   // precision of the rule (tree leaf or anchor)
    double coverage = 0.0;    // anchor only
    std::size_t cluster_count = 1;
    std::vector<double> inertia_curve;
};

struct Explanation {
    enum class Tag { Linear, RuleBased };
    Tag tag = Tag::Linear;

    Instance target;
    int target_class = 0;
    OracleVerdict verdict;

    // Counterfactual search evidence.
    double cf_distance = 0.0;     // normalized standardized distance to the closest enemy
    double field_radius = 0.0;    // r = dist(x, e)/delta
    std::size_t cf_iterations = 0;

    // Linear branch.
    std::optional<LinearSurrogate> surrogate;
    std::optional<FeatureRanking> ranking;

    // Rule branch.
    std::optional<RulePayload> rule;

    /// Closest enemy (linear) or one representative per enemy cluster.
    std::vector<Instance> counterfactuals;
    std::vector<Instance> cluster_centroids;  // rule branch only

    std::string rendering;
    double wall_time_sec = 0.0;  // excluded from serialized output

    ExplainConfig config;
};

/// Alg. flow: closest counterfactual via growing fields, field of radius
/// dist(x,e)/delta centered on the enemy, oracle verdict, then either the
/// expanding linear surrogate plus the closest counterfactual, or a
/// rule-based surrogate plus one counterfactual per enemy cluster.
Explanation explain(const Dataset& ds, const BlackBoxModel& model, const Instance& target, const ExplainConfig& cfg);

/// Same, for any classifier (trained or synthetic).
Explanation explain_classifier(const Dataset& ds, const Classifier& model, const Instance& target,
                               const ExplainConfig& cfg);

/// Per-target derived seeds; output independent of the worker count.
std::vector<Explanation> explain_batch(const Dataset& ds, const Classifier& model,
                                       const std::vector<Instance>& targets, const ExplainConfig& cfg,
                                       unsigned jobs = 1);

/// Deterministic JSON document (schema_version 1); wall times are omitted so
/// identical seeds serialize byte-identically.
std::string explanation_to_json(const Explanation& exp, const std::vector<FeatureSpec>& specs);

}  // namespace ape
