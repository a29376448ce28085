#pragma once

#include "ape/models.hpp"
#include "ape/tabular.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ape {

enum class DiscretizerMethod { Quartile, Decile, Entropy, MDLP, KMeans };

struct DiscretizationScheme {
    DiscretizerMethod method = DiscretizerMethod::MDLP;
    std::vector<std::vector<double>> cuts;  // strictly increasing, empty for categoricals
};

/// Cut points per numerical feature. Quartile/Decile use linear-interpolation
/// quantiles; Entropy runs recursive binary entropy-minimizing splits to
/// depth 3; MDLP is the Fayyad-Irani recursion with the MDL stopping
/// criterion over boundary-point candidates; KMeans clusters each column with
/// exact 1-D k-means (elbow-chosen k) and cuts at cluster-boundary midpoints.
/// `labels` are the black-box labels; only Entropy and MDLP use them.
DiscretizationScheme discretize(const Dataset& ds, const std::vector<int>& labels, DiscretizerMethod method);

/// Recursive MDLP on a single column; exposed for the discretizer tests.
std::vector<double> mdlp_cuts(const std::vector<double>& values, const std::vector<int>& labels);

/// Exact (dynamic-programming) 1-D k-means; returns the minimal
/// sum-of-squares and cluster boundaries as indices into the sorted values.
double kmeans_1d(const std::vector<double>& sorted_values, std::size_t k, std::vector<std::size_t>& boundaries);

struct Predicate {
    std::size_t feature = 0;
    bool categorical = false;
    double lo = 0.0, hi = 0.0;   // interval (lo, hi]; +-infinity on the ends
    std::size_t category = 0;
    std::string text(const std::vector<FeatureSpec>& specs) const;
    bool matches(const Instance& inst) const;
};

/// The conversion into the interpretable binary space: one predicate per
/// (feature, interval) and per (categorical feature, category). Exactly one
/// interval predicate holds per numerical feature per instance.
struct InterpretableEncoding {
    std::vector<FeatureSpec> specs;
    std::vector<Predicate> predicates;
    std::vector<std::size_t> feature_offset;  // first predicate of each feature
    std::vector<std::size_t> feature_arity;

    static InterpretableEncoding from(const std::vector<FeatureSpec>& specs, const DiscretizationScheme& scheme);
    std::vector<bool> encode(const Instance& inst) const;
    /// Index of the predicate true on `inst` for feature j.
    std::size_t active_predicate(const Instance& inst, std::size_t j) const;
};

struct AnchorRule {
    std::vector<std::size_t> predicate_ids;  // sorted; empty for the vacuous rule
    int predicted_class = 0;
    double precision = 0.0;
    double coverage = 0.0;
    double ncov = 0.0;
    double f1 = 0.0;
    std::size_t length = 0;
    bool below_threshold = false;  // no candidate met tau at the length cap
    bool zero_coverage = false;
    std::string text;
};

struct AnchorConfig {
    double tau = 0.95;
    std::size_t beam_width = 10;
    std::size_t max_length = 6;
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 0;
};

/// Beam search over conjunctions of the predicates true on the target,
/// growing length by length; precision is Monte-Carlo estimated on perturbed
/// instances whose unconstrained features are resampled from training
/// marginals. Returns the shortest rule meeting tau (ties: higher coverage,
/// then lexicographic predicate order), or the best-precision rule flagged
/// below_threshold.
AnchorRule anchor_search(const Dataset& ds,
                         const Classifier& model,
                         const Instance& target,
                         const InterpretableEncoding& encoding,
                         const AnchorConfig& cfg);

/// Exhaustive-precision estimate of one fixed rule on a labeled sample.
struct RuleMetrics {
    double precision = 0.0, coverage = 0.0, ncov = 0.0, f1 = 0.0;
    std::size_t length = 0;
    bool zero_coverage = false;
};

RuleMetrics rule_metrics(const AnchorRule& rule,
                         const InterpretableEncoding& encoding,
                         const std::vector<Instance>& eval_sample,
                         const Classifier& model,
                         int target_class);

std::string render_rule(const AnchorRule& rule, const InterpretableEncoding& encoding, int predicted_class);

}  // namespace ape
