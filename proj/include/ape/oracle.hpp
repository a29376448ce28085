#pragma once

#include "ape/fieldgen.hpp"
#include "ape/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ape {

struct FoldingResult {
    std::vector<double> pivot;
    double folded_variance = 0.0;  // trace of covariance of |points - pivot|
    double raw_variance = 0.0;     // trace of covariance of points
    double phi = 0.0;
    bool unimodal = true;
    bool degenerate = false;  // too few points or zero variance
};

struct OracleConfig {
    double folding_threshold = 1.0;
    double si_threshold = 1.0;
    std::size_t min_points = 10;      // below this a partition is degenerate-unimodal
    std::size_t locality_floor = 50;  // min points fed to each test; topped up by nearest draws
    std::size_t balanced_cap = 2000;
    bool use_folding = true;   // ablation switches
    bool use_thornton = true;
    std::uint64_t seed = 0;
};

struct OracleVerdict {
    bool friends_unimodal = false;
    bool enemies_unimodal = false;
    double separability_index = 0.0;
    bool linear_suitable = false;
    FoldingResult friends_evidence;
    FoldingResult enemies_evidence;
    std::string reason;  // non-empty on degenerate short-circuits
};

/// Unimodality via the folding statistic: the pivot minimizes the trace of
/// the covariance of the coordinate-wise folded data |points - s|, and
/// Phi = 4 * folded/raw. The factor 4 puts a uniform distribution exactly at
/// the unimodal/multimodal frontier (Phi = 1); a Gaussian folds to ~1.45 and
/// well-separated mixtures fall far below 1.
FoldingResult folding_test(const std::vector<std::vector<double>>& points, double threshold = 1.0);

/// Fraction of points whose nearest neighbor (excluding self, ties by lowest
/// index) carries the same label.
double separability_index(const std::vector<std::vector<double>>& points, const std::vector<int>& labels);

/// The linear-suitability decision: friends and enemies must each be
/// unimodal and the balanced field sample (plus real in-field instances)
/// must reach the separability threshold.
OracleVerdict ape_oracle(const FieldSample& sample,
                         const std::vector<Instance>& real_in_field,
                         const std::vector<int>& real_labels,
                         int target_class,
                         const DistanceContext& ctx,
                         const OracleConfig& cfg);

/// Standardized one-hot embedding used by the oracle's tests.
std::vector<double> oracle_embed(const Instance& inst, const DistanceContext& ctx, const Encoder& enc);

}  // namespace ape
