#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ape {

enum class FeatureKind { Numerical, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numerical;
    std::vector<std::string> categories;  // categorical only, order of first appearance

    bool is_categorical() const { return kind == FeatureKind::Categorical; }
};

/// One row in dataset encoding: numerical values as-is, categorical values
/// as the (double-stored) index into FeatureSpec::categories.
using Instance = std::vector<double>;

struct FeatureStats {
    double mean = 0.0;
    double stddev = 0.0;     // population convention (divide by N)
    double amplitude = 0.0;  // max - min
};

struct Dataset {
    std::vector<FeatureSpec> specs;
    std::vector<Instance> rows;
    std::optional<std::vector<int>> labels;
    int n_classes = 0;

    std::vector<FeatureStats> stats;                // indexed by feature, zeroed for categoricals
    std::vector<std::vector<double>> cat_freqs;     // empirical category frequencies, empty for numericals

    std::size_t n_features() const { return specs.size(); }
    std::size_t n_rows() const { return rows.size(); }

    /// Recomputes stats/cat_freqs from rows. Called by the loaders; public so
    /// hand-built datasets can be finalized the same way.
    void recompute_stats();
};

enum class SyntheticKind { Blobs, Moons, Circles };

/// Loads an RFC-4180-style CSV with a header row. When `schema` is absent a
/// column is Categorical iff any cell fails numeric parsing. `label_column`
/// (by name) is split off into labels and removed from the feature matrix.
Dataset load_dataset(const std::string& path,
                     const std::optional<std::vector<FeatureSpec>>& schema = std::nullopt,
                     const std::optional<std::string>& label_column = std::nullopt);

/// Same parser over an in-memory CSV string (the file loader delegates here).
Dataset parse_csv(const std::string& content,
                  const std::optional<std::vector<FeatureSpec>>& schema = std::nullopt,
                  const std::optional<std::string>& label_column = std::nullopt);

/// Writes the dataset back to CSV. Numeric cells are printed with 17
/// significant digits so a reload reproduces them exactly.
std::string to_csv(const Dataset& ds, const std::string& label_column = "label");
void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column = "label");

/// Two-feature binary-labeled synthetic generators (interleaving half-moons,
/// concentric circles, isotropic Gaussian blobs). Pure function of the
/// arguments: same (kind, n, noise, seed) gives byte-identical datasets.
Dataset synthesize_dataset(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed);

/// Per-feature stats plus the max-distance normalizer for `reference`.
struct ReferenceStats {
    std::vector<FeatureStats> per_feature;
    double delta = 0.0;  // max standardized distance from reference to any row
};

ReferenceStats compute_stats(const Dataset& ds, const Instance& reference);

void check_instance(const Dataset& ds, const Instance& inst);

}  // namespace ape
