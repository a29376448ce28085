#include "ape/models.hpp"

#include "ape/common.hpp"
#include "ape/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ape {

using nlohmann::json;

Encoder Encoder::from(const std::vector<FeatureSpec>& specs) {
    Encoder enc;
    enc.specs = specs;
    for (const auto& s : specs) {
        enc.offset.push_back(enc.expanded_dim);
        enc.expanded_dim += s.is_categorical() ? s.categories.size() : 1;
    }
    return enc;
}

std::vector<double> Encoder::encode(const Instance& inst) const {
    if (inst.size() != specs.size()) throw InvalidArgument("encode: arity mismatch");
    std::vector<double> out(expanded_dim, 0.0);
    for (std::size_t j = 0; j < specs.size(); ++j) {
        if (specs[j].is_categorical()) {
            const auto idx = static_cast<std::size_t>(inst[j]);
            if (idx >= specs[j].categories.size())
                throw InvalidArgument("encode: category index out of range for '" + specs[j].name + "'");
            out[offset[j] + idx] = 1.0;
        } else {
            out[offset[j]] = inst[j];
        }
    }
    return out;
}

std::size_t Encoder::feature_of(std::size_t k) const {
    for (std::size_t j = specs.size(); j-- > 0;)
        if (k >= offset[j]) return j;
    return 0;
}

int Classifier::predict_one(const Instance& inst) const {
    const auto p = predict_proba_one(inst);
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.size(); ++c)
        if (p[c] > p[best]) best = c;  // strict: ties keep the lowest index
    return static_cast<int>(best);
}

std::vector<int> Classifier::predict(const std::vector<Instance>& batch) const {
    std::vector<int> out;
    out.reserve(batch.size());
    for (const auto& inst : batch) out.push_back(predict_one(inst));
    return out;
}

std::vector<std::vector<double>> Classifier::predict_proba(const std::vector<Instance>& batch) const {
    std::vector<std::vector<double>> out;
    out.reserve(batch.size());
    for (const auto& inst : batch) out.push_back(predict_proba_one(inst));
    return out;
}

double accuracy(const Classifier& model, const std::vector<Instance>& rows, const std::vector<int>& labels) {
    if (rows.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (model.predict_one(rows[i]) == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

GroundTruthRanking ranking_from_scores(std::vector<double> scores) {
    GroundTruthRanking r;
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    r.order = idx;
    for (auto i : idx) r.scores.push_back(scores[i]);
    return r;
}

// ---------------------------------------------------------------------------
// CART

struct TreeNode {
    bool leaf = true;
    std::size_t split_dim = 0;  // expanded dimension
    double threshold = 0.0;
    double impurity_decrease = 0.0;  // weighted by node fraction
    int left = -1, right = -1;
    std::vector<double> proba;  // leaf class frequencies
};

struct Tree {
    std::vector<TreeNode> nodes;
    int n_classes = 0;

    const TreeNode& leaf_for(const std::vector<double>& x, std::vector<int>* path = nullptr) const {
        int cur = 0;
        while (!nodes[static_cast<std::size_t>(cur)].leaf) {
            const auto& nd = nodes[static_cast<std::size_t>(cur)];
            if (path) path->push_back(cur);
            cur = x[nd.split_dim] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(cur)];
    }
};

double gini(const std::vector<std::size_t>& counts, double total) {
    if (total <= 0) return 0.0;
    double g = 1.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / total;
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const std::vector<std::vector<double>>& xs;
    const std::vector<int>& ys;
    int n_classes;
    int max_depth;
    std::size_t total_count;
    Tree tree;

    int build(std::vector<std::size_t> idx, int depth) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
        for (auto i : idx) ++counts[static_cast<std::size_t>(ys[i])];
        const double node_n = static_cast<double>(idx.size());
        const double node_gini = gini(counts, node_n);

        TreeNode node;
        node.proba.resize(static_cast<std::size_t>(n_classes));
        for (int c = 0; c < n_classes; ++c)
            node.proba[static_cast<std::size_t>(c)] = static_cast<double>(counts[static_cast<std::size_t>(c)]) / node_n;

        const bool can_split = idx.size() >= 2 && node_gini > 0.0 && (max_depth < 0 || depth < max_depth);
        if (!can_split) {
            tree.nodes.push_back(std::move(node));
            return static_cast<int>(tree.nodes.size()) - 1;
        }

        // Best split: lowest weighted child Gini; ties broken by lowest
        // expanded dimension, then lowest threshold.
        const std::size_t dim = xs[idx[0]].size();
        double best_score = node_gini;
        std::size_t best_dim = 0;
        double best_thr = 0.0;
        bool found = false;

        std::vector<std::pair<double, int>> col(idx.size());
        for (std::size_t d = 0; d < dim; ++d) {
            for (std::size_t k = 0; k < idx.size(); ++k) col[k] = {xs[idx[k]][d], ys[idx[k]]};
            std::sort(col.begin(), col.end());
            if (col.front().first == col.back().first) continue;

            std::vector<std::size_t> left(static_cast<std::size_t>(n_classes), 0);
            std::size_t n_left = 0;
            for (std::size_t k = 0; k + 1 < col.size(); ++k) {
                ++left[static_cast<std::size_t>(col[k].second)];
                ++n_left;
                if (col[k].first == col[k + 1].first) continue;
                std::vector<std::size_t> right(counts);
                for (int c = 0; c < n_classes; ++c) right[static_cast<std::size_t>(c)] -= left[static_cast<std::size_t>(c)];
                const double nl = static_cast<double>(n_left), nr = node_n - nl;
                const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / node_n;
                const double thr = col[k].first + 0.5 * (col[k + 1].first - col[k].first);
                // Scanning dimensions and thresholds in ascending order makes
                // the first strict improvement the tie-break winner (lowest
                // feature index, then lowest threshold).
                constexpr double eps = 1e-12;
                if (score < best_score - eps) {
                    best_score = score;
                    best_dim = d;
                    best_thr = thr;
                    found = true;
                }
            }
        }

        if (!found) {
            tree.nodes.push_back(std::move(node));
            return static_cast<int>(tree.nodes.size()) - 1;
        }

        node.leaf = false;
        node.split_dim = best_dim;
        node.threshold = best_thr;
        node.impurity_decrease = (node_n / static_cast<double>(total_count)) * (node_gini - best_score);
        const int self = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(node);

        std::vector<std::size_t> li, ri;
        for (auto i : idx) (xs[i][best_dim] <= best_thr ? li : ri).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        tree.nodes[static_cast<std::size_t>(self)].left = build(std::move(li), depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].right = build(std::move(ri), depth + 1);
        return self;
    }
};

Tree fit_tree(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys, int n_classes, int max_depth) {
    TreeBuilder b{xs, ys, n_classes, max_depth, xs.size(), {}};
    b.tree.n_classes = n_classes;
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    b.build(std::move(idx), 0);
    return std::move(b.tree);
}

std::vector<double> tree_importances(const Tree& t, const Encoder& enc) {
    std::vector<double> imp(enc.specs.size(), 0.0);
    for (const auto& nd : t.nodes)
        if (!nd.leaf) imp[enc.feature_of(nd.split_dim)] += nd.impurity_decrease;
    const double s = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (s > 0)
        for (auto& v : imp) v /= s;
    return imp;
}

json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& nd : t.nodes) {
        json n;
        n["leaf"] = nd.leaf;
        if (nd.leaf) {
            n["proba"] = nd.proba;
        } else {
            n["dim"] = nd.split_dim;
            n["thr"] = nd.threshold;
            n["gain"] = nd.impurity_decrease;
            n["left"] = nd.left;
            n["right"] = nd.right;
            n["proba"] = nd.proba;
        }
        nodes.push_back(std::move(n));
    }
    return nodes;
}

Tree tree_from_json(const json& nodes, int n_classes) {
    Tree t;
    t.n_classes = n_classes;
    for (const auto& n : nodes) {
        TreeNode nd;
        nd.leaf = n.at("leaf").get<bool>();
        nd.proba = n.at("proba").get<std::vector<double>>();
        if (!nd.leaf) {
            nd.split_dim = n.at("dim").get<std::size_t>();
            nd.threshold = n.at("thr").get<double>();
            nd.impurity_decrease = n.at("gain").get<double>();
            nd.left = n.at("left").get<int>();
            nd.right = n.at("right").get<int>();
        }
        t.nodes.push_back(std::move(nd));
    }
    return t;
}

json specs_to_json(const std::vector<FeatureSpec>& specs) {
    json out = json::array();
    for (const auto& s : specs) {
        json j;
        j["name"] = s.name;
        j["kind"] = s.is_categorical() ? "categorical" : "numerical";
        if (s.is_categorical()) j["categories"] = s.categories;
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<FeatureSpec> specs_from_json(const json& arr) {
    std::vector<FeatureSpec> specs;
    for (const auto& j : arr) {
        FeatureSpec s;
        s.name = j.at("name").get<std::string>();
        s.kind = j.at("kind").get<std::string>() == "categorical" ? FeatureKind::Categorical : FeatureKind::Numerical;
        if (s.is_categorical()) s.categories = j.at("categories").get<std::vector<std::string>>();
        specs.push_back(std::move(s));
    }
    return specs;
}

// ---------------------------------------------------------------------------
// Model kinds

class TreeModelBase : public BlackBoxModel {
public:
    const Encoder& encoder() const override { return enc_; }
    int n_classes() const override { return n_classes_; }

protected:
    Encoder enc_;
    int n_classes_ = 0;
    ModelConfig config_;
};

class DecisionTreeModel : public TreeModelBase {
public:
    Tree tree;

    ModelKind kind() const override { return ModelKind::DecisionTree; }

    std::vector<double> predict_proba_one(const Instance& inst) const override {
        return tree.leaf_for(enc_.encode(inst)).proba;
    }

    GroundTruthRanking ground_truth_ranking() const override {
        return ranking_from_scores(tree_importances(tree, enc_));
    }

    std::vector<PathStep> path(const Instance& inst) const {
        std::vector<int> nodes;
        const auto x = enc_.encode(inst);
        tree.leaf_for(x, &nodes);
        std::vector<PathStep> out;
        for (int id : nodes) {
            const auto& nd = tree.nodes[static_cast<std::size_t>(id)];
            out.push_back(
                {enc_.feature_of(nd.split_dim), nd.split_dim, nd.threshold, x[nd.split_dim] <= nd.threshold});
        }
        return out;
    }

    std::vector<double> path_scores(const Instance& inst) const {
        std::vector<double> scores(enc_.specs.size(), 0.0);
        std::vector<int> nodes;
        tree.leaf_for(enc_.encode(inst), &nodes);
        for (int id : nodes) {
            const auto& nd = tree.nodes[static_cast<std::size_t>(id)];
            scores[enc_.feature_of(nd.split_dim)] += nd.impurity_decrease;
        }
        return scores;
    }

    std::string to_json() const override {
        json j;
        j["schema_version"] = 1;
        j["kind"] = "decision_tree";
        j["n_classes"] = n_classes_;
        j["features"] = specs_to_json(enc_.specs);
        j["hyperparameters"] = {{"max_depth", config_.max_depth}};
        j["tree"] = tree_to_json(tree);
        return j.dump(2);
    }

    friend std::unique_ptr<BlackBoxModel> ape::model_from_json(const std::string&);
    friend std::unique_ptr<BlackBoxModel> ape::train_model(const Dataset&, const ModelConfig&, std::uint64_t);
};

class RandomForestModel : public TreeModelBase {
public:
    std::vector<Tree> trees;

    ModelKind kind() const override { return ModelKind::RandomForest; }

    std::vector<double> predict_proba_one(const Instance& inst) const override {
        std::vector<double> acc(static_cast<std::size_t>(n_classes_), 0.0);
        const auto x = enc_.encode(inst);
        for (const auto& t : trees) {
            const auto& p = t.leaf_for(x).proba;
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += p[c];
        }
        for (auto& v : acc) v /= static_cast<double>(trees.size());
        return acc;
    }

    GroundTruthRanking ground_truth_ranking() const override {
        std::vector<double> imp(enc_.specs.size(), 0.0);
        for (const auto& t : trees) {
            const auto ti = tree_importances(t, enc_);
            for (std::size_t j = 0; j < imp.size(); ++j) imp[j] += ti[j];
        }
        const double s = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (s > 0)
            for (auto& v : imp) v /= s;
        return ranking_from_scores(imp);
    }

    std::string to_json() const override {
        json j;
        j["schema_version"] = 1;
        j["kind"] = "random_forest";
        j["n_classes"] = n_classes_;
        j["features"] = specs_to_json(enc_.specs);
        j["hyperparameters"] = {{"n_trees", config_.n_trees},
                                {"bootstrap", config_.bootstrap},
                                {"max_depth", config_.max_depth}};
        json arr = json::array();
        for (const auto& t : trees) arr.push_back(tree_to_json(t));
        j["trees"] = std::move(arr);
        return j.dump(2);
    }
};

class LogisticRegressionModel : public BlackBoxModel {
public:
    Encoder enc_;
    int n_classes_ = 0;
    // Weights over standardized expanded features, one row per class.
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
    std::vector<double> feat_mean, feat_scale;

    ModelKind kind() const override { return ModelKind::LogisticRegression; }
    const Encoder& encoder() const override { return enc_; }
    int n_classes() const override { return n_classes_; }

    std::vector<double> standardize(const Instance& inst) const {
        auto x = enc_.encode(inst);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] - feat_mean[k]) / feat_scale[k];
        return x;
    }

    std::vector<double> predict_proba_one(const Instance& inst) const override {
        const auto x = standardize(inst);
        std::vector<double> logits(static_cast<std::size_t>(n_classes_), 0.0);
        for (int c = 0; c < n_classes_; ++c) {
            double z = bias[static_cast<std::size_t>(c)];
            const auto& w = weights[static_cast<std::size_t>(c)];
            for (std::size_t k = 0; k < x.size(); ++k) z += w[k] * x[k];
            logits[static_cast<std::size_t>(c)] = z;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (auto& z : logits) {
            z = std::exp(z - mx);
            sum += z;
        }
        for (auto& z : logits) z /= sum;
        return logits;
    }

    GroundTruthRanking ground_truth_ranking() const override {
        // Per-feature magnitude of the class-contrast coefficients.
        std::vector<double> scores(enc_.specs.size(), 0.0);
        for (std::size_t k = 0; k < enc_.expanded_dim; ++k) {
            double contrast = 0.0;
            if (n_classes_ == 2) {
                contrast = std::abs(weights[1][k] - weights[0][k]);
            } else {
                for (int c = 0; c < n_classes_; ++c) contrast = std::max(contrast, std::abs(weights[static_cast<std::size_t>(c)][k]));
            }
            scores[enc_.feature_of(k)] += contrast;
        }
        return ranking_from_scores(scores);
    }

    std::string to_json() const override {
        json j;
        j["schema_version"] = 1;
        j["kind"] = "logistic_regression";
        j["n_classes"] = n_classes_;
        j["features"] = specs_to_json(enc_.specs);
        j["hyperparameters"] = {{"learning_rate", config_.learning_rate}, {"epochs", config_.epochs}, {"l2", config_.l2}};
        j["weights"] = weights;
        j["bias"] = bias;
        j["feat_mean"] = feat_mean;
        j["feat_scale"] = feat_scale;
        return j.dump(2);
    }

    ModelConfig config_;
};

}  // namespace

std::unique_ptr<BlackBoxModel> train_model(const Dataset& ds, const ModelConfig& config, std::uint64_t seed) {
    if (!ds.labels) throw InvalidArgument("train_model: dataset has no labels");
    if (ds.n_classes < 2) throw InvalidArgument("train_model: need at least 2 classes");
    for (const auto& row : ds.rows) check_instance(ds, row);

    const Encoder enc = Encoder::from(ds.specs);
    std::vector<std::vector<double>> xs;
    xs.reserve(ds.rows.size());
    for (const auto& row : ds.rows) xs.push_back(enc.encode(row));
    const std::vector<int>& ys = *ds.labels;

    switch (config.kind) {
        case ModelKind::DecisionTree: {
            auto m = std::make_unique<DecisionTreeModel>();
            m->enc_ = enc;
            m->n_classes_ = ds.n_classes;
            m->config_ = config;
            m->tree = fit_tree(xs, ys, ds.n_classes, config.max_depth);
            return m;
        }
        case ModelKind::RandomForest: {
            auto m = std::make_unique<RandomForestModel>();
            m->enc_ = enc;
            m->n_classes_ = ds.n_classes;
            m->config_ = config;
            for (int t = 0; t < config.n_trees; ++t) {
                std::vector<std::vector<double>> bx;
                std::vector<int> by;
                if (config.bootstrap) {
                    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
                    bx.reserve(xs.size());
                    by.reserve(xs.size());
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                        const std::size_t pick = rng.index(xs.size());
                        bx.push_back(xs[pick]);
                        by.push_back(ys[pick]);
                    }
                } else {
                    bx = xs;
                    by = ys;
                }
                m->trees.push_back(fit_tree(bx, by, ds.n_classes, config.max_depth));
            }
            return m;
        }
        case ModelKind::LogisticRegression: {
            auto m = std::make_unique<LogisticRegressionModel>();
            m->enc_ = enc;
            m->n_classes_ = ds.n_classes;
            m->config_ = config;
            const std::size_t dim = enc.expanded_dim;
            m->feat_mean.assign(dim, 0.0);
            m->feat_scale.assign(dim, 1.0);
            for (const auto& x : xs)
                for (std::size_t k = 0; k < dim; ++k) m->feat_mean[k] += x[k];
            for (auto& v : m->feat_mean) v /= static_cast<double>(xs.size());
            std::vector<double> var(dim, 0.0);
            for (const auto& x : xs)
                for (std::size_t k = 0; k < dim; ++k) {
                    const double d = x[k] - m->feat_mean[k];
                    var[k] += d * d;
                }
            for (std::size_t k = 0; k < dim; ++k) {
                const double s = std::sqrt(var[k] / static_cast<double>(xs.size()));
                m->feat_scale[k] = s > 0 ? s : 1.0;
            }

            std::vector<std::vector<double>> sx = xs;
            for (auto& x : sx)
                for (std::size_t k = 0; k < dim; ++k) x[k] = (x[k] - m->feat_mean[k]) / m->feat_scale[k];

            const int K = ds.n_classes;
            m->weights.assign(static_cast<std::size_t>(K), std::vector<double>(dim, 0.0));
            m->bias.assign(static_cast<std::size_t>(K), 0.0);
            const double n = static_cast<double>(sx.size());
            std::vector<double> probs(static_cast<std::size_t>(K));
            std::vector<std::vector<double>> gw(static_cast<std::size_t>(K), std::vector<double>(dim));
            std::vector<double> gb(static_cast<std::size_t>(K));

            for (int epoch = 0; epoch < config.epochs; ++epoch) {
                for (auto& g : gw) std::fill(g.begin(), g.end(), 0.0);
                std::fill(gb.begin(), gb.end(), 0.0);
                for (std::size_t i = 0; i < sx.size(); ++i) {
                    double mx = -1e300;
                    for (int c = 0; c < K; ++c) {
                        double z = m->bias[static_cast<std::size_t>(c)];
                        for (std::size_t k = 0; k < dim; ++k) z += m->weights[static_cast<std::size_t>(c)][k] * sx[i][k];
                        probs[static_cast<std::size_t>(c)] = z;
                        mx = std::max(mx, z);
                    }
                    double sum = 0.0;
                    for (auto& p : probs) {
                        p = std::exp(p - mx);
                        sum += p;
                    }
                    for (int c = 0; c < K; ++c) {
                        const double err = probs[static_cast<std::size_t>(c)] / sum - (ys[i] == c ? 1.0 : 0.0);
                        gb[static_cast<std::size_t>(c)] += err;
                        auto& g = gw[static_cast<std::size_t>(c)];
                        for (std::size_t k = 0; k < dim; ++k) g[k] += err * sx[i][k];
                    }
                }
                for (int c = 0; c < K; ++c) {
                    auto& w = m->weights[static_cast<std::size_t>(c)];
                    for (std::size_t k = 0; k < dim; ++k)
                        w[k] -= config.learning_rate * (gw[static_cast<std::size_t>(c)][k] / n + config.l2 * w[k]);
                    m->bias[static_cast<std::size_t>(c)] -= config.learning_rate * gb[static_cast<std::size_t>(c)] / n;
                }
            }
            return m;
        }
    }
    throw InvalidArgument("unknown model kind");
}

std::unique_ptr<BlackBoxModel> model_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    const std::string kind = j.at("kind").get<std::string>();
    const auto specs = specs_from_json(j.at("features"));
    const Encoder enc = Encoder::from(specs);
    const int n_classes = j.at("n_classes").get<int>();

    if (kind == "decision_tree") {
        auto m = std::make_unique<DecisionTreeModel>();
        m->enc_ = enc;
        m->n_classes_ = n_classes;
        m->config_.kind = ModelKind::DecisionTree;
        m->config_.max_depth = j.at("hyperparameters").at("max_depth").get<int>();
        m->tree = tree_from_json(j.at("tree"), n_classes);
        return m;
    }
    if (kind == "random_forest") {
        auto m = std::make_unique<RandomForestModel>();
        m->enc_ = enc;
        m->n_classes_ = n_classes;
        m->config_.kind = ModelKind::RandomForest;
        m->config_.n_trees = j.at("hyperparameters").at("n_trees").get<int>();
        m->config_.bootstrap = j.at("hyperparameters").at("bootstrap").get<bool>();
        m->config_.max_depth = j.at("hyperparameters").at("max_depth").get<int>();
        for (const auto& t : j.at("trees")) m->trees.push_back(tree_from_json(t, n_classes));
        return m;
    }
    if (kind == "logistic_regression") {
        auto m = std::make_unique<LogisticRegressionModel>();
        m->enc_ = enc;
        m->n_classes_ = n_classes;
        m->config_.kind = ModelKind::LogisticRegression;
        m->weights = j.at("weights").get<std::vector<std::vector<double>>>();
        m->bias = j.at("bias").get<std::vector<double>>();
        m->feat_mean = j.at("feat_mean").get<std::vector<double>>();
        m->feat_scale = j.at("feat_scale").get<std::vector<double>>();
        return m;
    }
    throw ParseError("unknown model kind '" + kind + "'");
}

std::unique_ptr<BlackBoxModel> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

void save_model(const BlackBoxModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << model.to_json() << '\n';
}

std::vector<PathStep> tree_path(const BlackBoxModel& model, const Instance& inst) {
    const auto* dt = dynamic_cast<const DecisionTreeModel*>(&model);
    if (!dt) throw InvalidArgument("tree_path requires a decision tree model");
    return dt->path(inst);
}

GroundTruthRanking path_ranking(const BlackBoxModel& model, const Instance& inst) {
    if (model.kind() == ModelKind::DecisionTree) {
        const auto& dt = dynamic_cast<const DecisionTreeModel&>(model);
        auto scores = dt.path_scores(inst);
        GroundTruthRanking r = ranking_from_scores(std::move(scores));
        // Keep only the features actually on the path.
        std::size_t keep = 0;
        while (keep < r.scores.size() && r.scores[keep] > 0) ++keep;
        r.order.resize(keep);
        r.scores.resize(keep);
        return r;
    }
    return model.ground_truth_ranking();
}

}  // namespace ape
