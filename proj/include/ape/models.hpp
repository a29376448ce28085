#pragma once

#include "ape/tabular.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ape {

/// Maps instances into the one-hot expanded space shared by every model kind
/// (and by the linear surrogates), so train- and predict-time encodings are
/// identical by construction.
struct Encoder {
    std::vector<FeatureSpec> specs;
    std::size_t expanded_dim = 0;
    std::vector<std::size_t> offset;  // start of each feature's block

    static Encoder from(const std::vector<FeatureSpec>& specs);
    std::vector<double> encode(const Instance& inst) const;
    /// Original feature index owning expanded dimension k.
    std::size_t feature_of(std::size_t k) const;
};

/// The opaque classifier contract. predict_proba rows sum to 1 and
/// predict = argmax with ties broken by lowest class index.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int n_classes() const = 0;
    virtual std::vector<double> predict_proba_one(const Instance& inst) const = 0;

    int predict_one(const Instance& inst) const;
    std::vector<int> predict(const std::vector<Instance>& batch) const;
    std::vector<std::vector<double>> predict_proba(const std::vector<Instance>& batch) const;
};

enum class ModelKind { DecisionTree, RandomForest, LogisticRegression };

struct ModelConfig {
    ModelKind kind = ModelKind::RandomForest;
    int max_depth = -1;       // -1 = unbounded (CART-based kinds)
    int n_trees = 20;
    bool bootstrap = true;
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 1e-4;
};

struct GroundTruthRanking {
    std::vector<std::size_t> order;   // feature indices, most important first
    std::vector<double> scores;       // non-increasing
};

class BlackBoxModel : public Classifier {
public:
    virtual ModelKind kind() const = 0;
    virtual const Encoder& encoder() const = 0;

    /// Global importance; |coefficient| for logistic regression, normalized
    /// Gini importance (total impurity decrease) for the tree kinds.
    virtual GroundTruthRanking ground_truth_ranking() const = 0;

    virtual std::string to_json() const = 0;
};

/// Tree-backed models also expose the root-to-leaf path of an instance.
struct PathStep {
    std::size_t feature;       // original feature index
    std::size_t expanded_dim;  // dimension tested in the one-hot space
    double threshold;          // split point in expanded coordinates
    bool went_left;
};

/// Root-to-leaf path of a decision tree model for an instance.
std::vector<PathStep> tree_path(const BlackBoxModel& model, const Instance& inst);

std::unique_ptr<BlackBoxModel> train_model(const Dataset& ds, const ModelConfig& config, std::uint64_t seed);
std::unique_ptr<BlackBoxModel> model_from_json(const std::string& json_text);
std::unique_ptr<BlackBoxModel> load_model(const std::string& path);
void save_model(const BlackBoxModel& model, const std::string& path);

/// Path-conditioned ranking for decision trees: the features tested on the
/// instance's root-to-leaf path, scored by the impurity decrease of the
/// visited splits. Falls back to the global ranking for other kinds.
GroundTruthRanking path_ranking(const BlackBoxModel& model, const Instance& inst);

double accuracy(const Classifier& model, const std::vector<Instance>& rows, const std::vector<int>& labels);

}  // namespace ape
