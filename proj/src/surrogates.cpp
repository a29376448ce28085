#include "ape/surrogates.hpp"

#include "ape/common.hpp"
#include "ape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ape {

double LinearSurrogate::value(const std::vector<double>& expanded) const {
    double v = intercept;
    for (std::size_t k = 0; k < coefficients.size(); ++k) v += coefficients[k] * expanded[k];
    return v;
}

namespace {

// Solve A x = b by Gaussian elimination with partial pivoting.
// Returns false when the system is numerically singular.
bool solve_linear(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-12) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return true;
}

struct Split {
    std::vector<std::size_t> train, test;
};

Split split_70_30(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = rng.index(i + 1);
        std::swap(idx[i], idx[j]);
    }
    Split sp;
    const std::size_t n_train = (n * 7 + 9) / 10;
    sp.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    sp.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    return sp;
}

}  // namespace

LinearSurrogate fit_linear_surrogate(const std::vector<Instance>& instances,
                                     const Classifier& model,
                                     int target_class,
                                     const Encoder& enc,
                                     std::uint64_t seed,
                                     double training_radius) {
    if (instances.size() < 20) throw InvalidArgument("fit_linear_surrogate needs >= 20 instances");

    std::vector<std::vector<double>> xs;
    xs.reserve(instances.size());
    for (const auto& inst : instances) xs.push_back(enc.encode(inst));
    std::vector<double> ys;
    std::vector<int> labels;
    ys.reserve(instances.size());
    for (const auto& inst : instances) {
        const auto p = model.predict_proba_one(inst);
        ys.push_back(p[static_cast<std::size_t>(target_class)]);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < p.size(); ++c)
            if (p[c] > p[arg]) arg = c;
        labels.push_back(static_cast<int>(arg));
    }

    const Split sp = split_70_30(instances.size(), seed);
    const std::size_t dim = enc.expanded_dim;
    const std::size_t cols = dim + 1;  // intercept last

    std::vector<std::vector<double>> xtx(cols, std::vector<double>(cols, 0.0));
    std::vector<double> xty(cols, 0.0);
    for (auto i : sp.train) {
        const auto& x = xs[i];
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = a; b < dim; ++b) xtx[a][b] += x[a] * x[b];
            xtx[a][dim] += x[a];
            xty[a] += x[a] * ys[i];
        }
        xtx[dim][dim] += 1.0;
        xty[dim] += ys[i];
    }
    for (std::size_t a = 0; a < cols; ++a)
        for (std::size_t b = 0; b < a; ++b) xtx[a][b] = xtx[b][a];

    std::vector<double> beta;
    if (!solve_linear(xtx, xty, beta)) {
        for (std::size_t a = 0; a < cols; ++a) xtx[a][a] += 1e-6;  // ridge fallback
        if (!solve_linear(xtx, xty, beta))
            throw Error("fit_linear_surrogate: singular normal equations even with ridge");
    }

    LinearSurrogate g;
    g.coefficients.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(dim));
    g.intercept = beta[dim];
    g.training_radius = training_radius;

    std::vector<int> pred, truth;
    pred.reserve(sp.test.size());
    for (auto i : sp.test) {
        pred.push_back(g.value(xs[i]) >= 0.5 ? 1 : 0);
        truth.push_back(labels[i] == target_class ? 1 : 0);
    }
    g.adherence = adherence_score(pred, truth);
    return g;
}

std::vector<Instance> local_fit_set(const FieldSample& fs, std::size_t floor_count) {
    std::vector<std::size_t> idx;
    idx.reserve(fs.in_field_friends.size() + fs.in_field_enemies.size());
    idx.insert(idx.end(), fs.in_field_friends.begin(), fs.in_field_friends.end());
    idx.insert(idx.end(), fs.in_field_enemies.begin(), fs.in_field_enemies.end());
    if (idx.size() < floor_count) {
        std::vector<std::size_t> all(fs.instances.size());
        std::iota(all.begin(), all.end(), 0);
        std::sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) { return fs.distance[a] < fs.distance[b]; });
        if (all.size() > floor_count) all.resize(floor_count);
        idx = std::move(all);
    } else {
        std::sort(idx.begin(), idx.end());
    }
    std::vector<Instance> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(fs.instances[i]);
    return out;
}

LinearSurrogate ls_ape(const Dataset& ds,
                       const Classifier& model,
                       const Instance& target,
                       const Instance& closest_enemy,
                       const LsApeConfig& cfg) {
    const DistanceContext ctx = DistanceContext::from(ds, target);
    const int target_class = model.predict_one(target);
    const Encoder enc = Encoder::from(ds.specs);

    double r = std::min(1.0, normalized_distance(target, closest_enemy, ctx));
    if (r <= 0.0) throw InvalidArgument("ls_ape: enemy coincides with the target");

    std::uint64_t stream = 0x15a0;
    auto fit_at = [&](double radius) {
        const FieldSample fs =
            sample_field(ds, model, ctx, radius, closest_enemy, cfg.field, target_class, stream++);
        const auto pts = local_fit_set(fs, cfg.min_fit_points);
        return fit_linear_surrogate(pts, model, target_class, enc,
                                    derive_seed(cfg.field.seed, 0x511 + stream), radius);
    };

    LinearSurrogate g = fit_at(r);
    const double tau = g.adherence;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        double next_r;
        if (cfg.literal_shrink) {
            next_r = cfg.literal_theta * r;
            if (next_r < 1e-6) break;
        } else {
            if (r >= 1.0) break;
            next_r = std::min(1.0, cfg.expansion * r);
        }
        LinearSurrogate candidate = fit_at(next_r);
        if (candidate.adherence >= tau) {
            g = candidate;
            r = next_r;
        } else {
            break;
        }
    }
    return g;
}

FeatureRanking feature_ranking(const LinearSurrogate& g) {
    FeatureRanking fr;
    for (std::size_t k = 0; k < g.coefficients.size(); ++k)
        if (g.coefficients[k] != 0.0) fr.entries.push_back({k, g.coefficients[k]});
    std::stable_sort(fr.entries.begin(), fr.entries.end(),
                     [](const RankedFeature& a, const RankedFeature& b) { return std::abs(a.score) > std::abs(b.score); });
    for (const auto& e : fr.entries) (e.score > 0 ? fr.positive : fr.negative).push_back(e.dim);
    return fr;
}

bool rankings_contradict(const FeatureRanking& a, const FeatureRanking& b) {
    if (a.entries.size() != b.entries.size()) return true;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        if (a.entries[i].dim != b.entries[i].dim) return true;
        if ((a.entries[i].score > 0) != (b.entries[i].score > 0)) return true;
    }
    return false;
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

TreeSurrogate fit_shallow_tree(const std::vector<Instance>& instances,
                               const Classifier& model,
                               const Instance& target,
                               const std::vector<FeatureSpec>& specs,
                               std::uint64_t seed) {
    const auto labels = model.predict(instances);
    const int n_classes = model.n_classes();
    {
        const int first = labels.empty() ? 0 : labels[0];
        bool single = true;
        for (int l : labels)
            if (l != first) {
                single = false;
                break;
            }
        if (single) throw InvalidArgument("fit_shallow_tree: sample contains a single class");
    }

    const Split sp = split_70_30(instances.size(), seed);
    Dataset train;
    train.specs = specs;
    std::vector<int> train_labels;
    for (auto i : sp.train) {
        train.rows.push_back(instances[i]);
        train_labels.push_back(labels[i]);
    }
    // Guard: the split could isolate one class in the training part.
    {
        bool single = true;
        for (int l : train_labels)
            if (l != train_labels[0]) {
                single = false;
                break;
            }
        if (single) {
            train.rows.clear();
            train_labels.clear();
            for (std::size_t i = 0; i < instances.size(); ++i) {
                train.rows.push_back(instances[i]);
                train_labels.push_back(labels[i]);
            }
        }
    }
    train.labels = train_labels;
    train.n_classes = n_classes;
    train.recompute_stats();
    train.n_classes = n_classes;

    ModelConfig mc;
    mc.kind = ModelKind::DecisionTree;
    mc.max_depth = 3;
    TreeSurrogate ts;
    ts.tree = train_model(train, mc, seed);

    std::vector<int> pred, truth;
    for (auto i : sp.test) {
        pred.push_back(ts.tree->predict_one(instances[i]));
        truth.push_back(labels[i]);
    }
    ts.adherence = pred.empty() ? 1.0 : adherence_score(pred, truth);

    ts.target_path = tree_path(*ts.tree, target);
    ts.predicted_class = ts.tree->predict_one(target);

    std::string rule;
    if (ts.target_path.empty()) {
        rule = "true";
    } else {
        const Encoder enc = Encoder::from(specs);
        for (std::size_t i = 0; i < ts.target_path.size(); ++i) {
            const auto& step = ts.target_path[i];
            if (i) rule += " \xE2\x88\xA7 ";  // " ∧ "
            const auto& spec = specs[step.feature];
            if (spec.is_categorical()) {
                const std::size_t cat = step.expanded_dim - enc.offset[step.feature];
                rule += spec.name + (step.went_left ? " \xE2\x89\xA0 " : " = ") + spec.categories[cat];
            } else {
                rule += spec.name + (step.went_left ? " \xE2\x89\xA4 " : " > ") + format_number(step.threshold);
            }
        }
    }
    rule += " \xE2\x87\x92 class " + std::to_string(ts.predicted_class);
    ts.rule_text = std::move(rule);
    return ts;
}

double adherence_score(const std::vector<int>& surrogate, const std::vector<int>& black_box) {
    if (surrogate.empty() || surrogate.size() != black_box.size())
        throw InvalidArgument("adherence_score: empty or mismatched inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < surrogate.size(); ++i)
        if (surrogate[i] == black_box[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(surrogate.size());
}

}  // namespace ape
