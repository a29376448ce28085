#include "ape/ape.hpp"

#include "ape/common.hpp"
#include "ape/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

namespace ape {

using nlohmann::json;

FieldConfig ExplainConfig::field_config() const {
    FieldConfig fc;
    fc.r0 = r0;
    fc.theta = theta;
    fc.n = n_samples;
    fc.seed = seed;
    fc.variant = variant;
    return fc;
}

OracleConfig ExplainConfig::oracle_config() const {
    OracleConfig oc;
    oc.folding_threshold = folding_threshold;
    oc.si_threshold = si_threshold;
    oc.use_folding = use_folding;
    oc.use_thornton = use_thornton;
    oc.seed = derive_seed(seed, 0x0eac1e);
    return oc;
}

namespace {

std::string render_linear(const Explanation& exp, const std::vector<FeatureSpec>& specs) {
    std::string out = "linear explanation (adherence " + std::to_string(exp.surrogate->adherence).substr(0, 5) + "): ";
    const Encoder enc = Encoder::from(specs);
    bool first = true;
    for (const auto& e : exp.ranking->entries) {
        if (!first) out += ", ";
        first = false;
        const std::size_t f = enc.feature_of(e.dim);
        std::string name = specs[f].name;
        if (specs[f].is_categorical()) name += "=" + specs[f].categories[e.dim - enc.offset[f]];
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%+.3g", e.score);
        out += name + " " + buf;
    }
    if (first) out += "(no nonzero attributions)";
    return out;
}

json instance_to_json(const Instance& inst, const std::vector<FeatureSpec>& specs) {
    json j = json::object();
    for (std::size_t f = 0; f < specs.size(); ++f) {
        if (specs[f].is_categorical())
            j[specs[f].name] = specs[f].categories[static_cast<std::size_t>(inst[f])];
        else
            j[specs[f].name] = inst[f];
    }
    return j;
}

}  // namespace

Explanation explain_classifier(const Dataset& ds, const Classifier& model, const Instance& target,
                               const ExplainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    check_instance(ds, target);

    Explanation exp;
    exp.config = cfg;
    exp.target = target;
    exp.target_class = model.predict_one(target);

    FieldConfig fc = cfg.field_config();

    // Closest counterfactual.
    const CounterfactualResult gf = growing_fields(ds, model, target, fc);
    const Instance& enemy = gf.closest_enemy;
    exp.cf_distance = gf.distance;
    exp.cf_iterations = gf.iterations;

    // Field centered on the enemy, radius proportional to dist(x, e).
    const DistanceContext ctx = DistanceContext::from(ds, target);
    const double r = std::min(1.0, std::max(gf.distance, 1e-6));
    exp.field_radius = r;

    FieldConfig oracle_fc = fc;
    oracle_fc.seed = derive_seed(cfg.seed, 0xf1e1d);
    const FieldSample field = sample_field(ds, model, ctx, r, enemy, oracle_fc, exp.target_class, 0);

    // Real instances inside the field, labeled by the model.
    std::vector<Instance> real_in_field;
    for (const auto& row : ds.rows)
        if (normalized_distance(enemy, row, ctx) <= r) real_in_field.push_back(row);
    const std::vector<int> real_labels = model.predict(real_in_field);

    exp.verdict = ape_oracle(field, real_in_field, real_labels, exp.target_class, ctx, cfg.oracle_config());

    if (exp.verdict.linear_suitable) {
        exp.tag = Explanation::Tag::Linear;
        LsApeConfig lc;
        lc.field = fc;
        lc.field.seed = derive_seed(cfg.seed, 0x15ae);
        exp.surrogate = ls_ape(ds, model, target, enemy, lc);
        exp.ranking = feature_ranking(*exp.surrogate);
        exp.counterfactuals = {enemy};
        exp.rendering = render_linear(exp, ds.specs);
        exp.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return exp;
    }

    // Rule-based branch with per-cluster counterfactuals.
    exp.tag = Explanation::Tag::RuleBased;

    std::vector<Instance> extended_enemies;
    for (auto i : field.in_field_enemies) extended_enemies.push_back(field.instances[i]);

    RulePayload payload;
    payload.kind = cfg.fallback;

    // Fit the initial fallback; extension keeps growing the field while the
    // precision of this explanation holds up on fresh samples.
    std::optional<TreeSurrogate> tree;
    std::optional<AnchorRule> anchor;
    std::optional<InterpretableEncoding> encoding;

    auto tree_rule_precision = [&](const TreeSurrogate& ts, const std::vector<Instance>& sample) {
        // Precision of the target's leaf: P(model class == leaf class | leaf).
        std::size_t in_leaf = 0, hits = 0;
        for (const auto& inst : sample) {
            if (ts.tree->predict_one(inst) != ts.predicted_class) continue;
            bool same_leaf = true;
            const auto path = tree_path(*ts.tree, inst);
            if (path.size() != ts.target_path.size()) same_leaf = false;
            for (std::size_t i = 0; same_leaf && i < path.size(); ++i)
                if (path[i].expanded_dim != ts.target_path[i].expanded_dim || path[i].went_left != ts.target_path[i].went_left)
                    same_leaf = false;
            if (!same_leaf) continue;
            ++in_leaf;
            if (model.predict_one(inst) == ts.predicted_class) ++hits;
        }
        return in_leaf == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(in_leaf);
    };

    bool have_fallback = false;
    {
        auto fit_set = local_fit_set(field, 200);
        for (const auto& row : real_in_field) fit_set.push_back(row);
        const auto fit_labels = model.predict(fit_set);
        bool two_classes = false;
        for (int l : fit_labels)
            if (l != fit_labels[0]) {
                two_classes = true;
                break;
            }
        if (two_classes && fit_set.size() >= 20) {
            if (cfg.fallback == FallbackKind::Tree) {
                tree = fit_shallow_tree(fit_set, model, target, ds.specs, derive_seed(cfg.seed, 0x7ee));
                payload.rule_text = tree->rule_text;
                payload.adherence = tree->adherence;
                payload.precision = tree_rule_precision(*tree, fit_set);
                have_fallback = true;
            } else {
                const auto labels = model.predict(ds.rows);
                const auto scheme = discretize(ds, labels, cfg.discretizer);
                encoding = InterpretableEncoding::from(ds.specs, scheme);
                AnchorConfig ac;
                ac.tau = cfg.tau;
                ac.seed = derive_seed(cfg.seed, 0xa2c402);
                anchor = anchor_search(ds, model, target, *encoding, ac);
                payload.rule_text = anchor->text;
                payload.precision = anchor->precision;
                payload.coverage = anchor->coverage;
                payload.adherence = anchor->precision;
                have_fallback = true;
            }
        }
    }

    // Enemy-set extension: expand r while the fallback stays precise.
    if (have_fallback) {
        double r_cur = r;
        std::uint64_t stream = 1;
        while (r_cur < 1.0) {
            const double r_next = std::min(1.0, cfg.theta * r_cur);
            const FieldSample fresh =
                sample_field(ds, model, ctx, r_next, enemy, oracle_fc, exp.target_class, stream++);
            const auto fresh_set = local_fit_set(fresh, 200);
            double precision;
            if (cfg.fallback == FallbackKind::Tree) {
                precision = tree_rule_precision(*tree, fresh_set);
            } else {
                const auto m = rule_metrics(*anchor, *encoding, fresh_set, model, exp.target_class);
                precision = m.precision;
            }
            if (precision < cfg.tau) break;
            for (auto i : fresh.in_field_enemies) extended_enemies.push_back(fresh.instances[i]);
            r_cur = r_next;
        }
    }

    if (extended_enemies.size() >= 2) {
        // Cap the clustering input to keep k-means affordable.
        if (extended_enemies.size() > 5000) {
            Rng rng(derive_seed(cfg.seed, 0xca9));
            for (std::size_t i = 0; i < 5000; ++i) {
                const std::size_t j = i + rng.index(extended_enemies.size() - i);
                std::swap(extended_enemies[i], extended_enemies[j]);
            }
            extended_enemies.resize(5000);
        }
        const EnemyClusterSet clusters = cluster_enemies(extended_enemies, model, target, ctx, cfg.kmax,
                                                         derive_seed(cfg.seed, 0xc1u));
        payload.cluster_count = clusters.k;
        payload.inertia_curve = clusters.inertia_curve;
        exp.counterfactuals = clusters.representatives;
        exp.cluster_centroids = clusters.centroids;
    } else {
        // Degenerate locality: fall back to the single closest counterfactual.
        exp.counterfactuals = {enemy};
        if (exp.verdict.reason.empty()) exp.verdict.reason = "too_few_enemies_for_clustering";
    }

    exp.rule = payload;
    exp.rendering = (have_fallback ? payload.rule_text : std::string("(degenerate locality, no rule)")) + " [" +
                    std::to_string(exp.counterfactuals.size()) + " counterfactual(s)]";
    exp.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return exp;
}

Explanation explain(const Dataset& ds, const BlackBoxModel& model, const Instance& target, const ExplainConfig& cfg) {
    return explain_classifier(ds, model, target, cfg);
}

std::vector<Explanation> explain_batch(const Dataset& ds, const Classifier& model,
                                       const std::vector<Instance>& targets, const ExplainConfig& cfg,
                                       unsigned jobs) {
    std::vector<Explanation> out(targets.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < targets.size(); ++i) {
            ExplainConfig c = cfg;
            c.seed = derive_seed(cfg.seed, i);
            out[i] = explain_classifier(ds, model, targets[i], c);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= targets.size()) break;
            ExplainConfig c = cfg;
            c.seed = derive_seed(cfg.seed, i);
            out[i] = explain_classifier(ds, model, targets[i], c);
        }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return out;
}

std::string explanation_to_json(const Explanation& exp, const std::vector<FeatureSpec>& specs) {
    json j;
    j["schema_version"] = 1;
    j["tag"] = exp.tag == Explanation::Tag::Linear ? "linear" : "rule_based";
    j["target"] = instance_to_json(exp.target, specs);
    j["target_class"] = exp.target_class;
    j["seed"] = exp.config.seed;

    json verdict;
    verdict["linear_suitable"] = exp.verdict.linear_suitable;
    verdict["friends_unimodal"] = exp.verdict.friends_unimodal;
    verdict["enemies_unimodal"] = exp.verdict.enemies_unimodal;
    verdict["separability_index"] = exp.verdict.separability_index;
    if (!exp.verdict.reason.empty()) verdict["reason"] = exp.verdict.reason;
    auto folding_json = [](const FoldingResult& f) {
        json out;
        out["phi"] = f.phi;
        out["folded_variance"] = f.folded_variance;
        out["raw_variance"] = f.raw_variance;
        out["unimodal"] = f.unimodal;
        out["degenerate"] = f.degenerate;
        out["pivot"] = f.pivot;
        return out;
    };
    verdict["friends_folding"] = folding_json(exp.verdict.friends_evidence);
    verdict["enemies_folding"] = folding_json(exp.verdict.enemies_evidence);
    j["verdict"] = std::move(verdict);

    json search;
    search["distance"] = exp.cf_distance;
    search["field_radius"] = exp.field_radius;
    search["iterations"] = exp.cf_iterations;
    j["counterfactual_search"] = std::move(search);

    if (exp.surrogate) {
        json lin;
        lin["intercept"] = exp.surrogate->intercept;
        lin["coefficients"] = exp.surrogate->coefficients;
        lin["training_radius"] = exp.surrogate->training_radius;
        lin["adherence"] = exp.surrogate->adherence;
        json ranking = json::array();
        const Encoder enc = Encoder::from(specs);
        for (const auto& e : exp.ranking->entries) {
            json item;
            const std::size_t f = enc.feature_of(e.dim);
            item["dim"] = e.dim;
            item["feature"] = specs[f].name;
            if (specs[f].is_categorical()) item["category"] = specs[f].categories[e.dim - enc.offset[f]];
            item["score"] = e.score;
            ranking.push_back(std::move(item));
        }
        lin["ranking"] = std::move(ranking);
        j["linear"] = std::move(lin);
    }
    if (exp.rule) {
        json rb;
        rb["kind"] = exp.rule->kind == FallbackKind::Tree ? "tree" : "anchor";
        rb["rule"] = exp.rule->rule_text;
        rb["adherence"] = exp.rule->adherence;
        rb["precision"] = exp.rule->precision;
        if (exp.rule->kind == FallbackKind::Anchor) rb["coverage"] = exp.rule->coverage;
        rb["cluster_count"] = exp.rule->cluster_count;
        rb["inertia_curve"] = exp.rule->inertia_curve;
        json cents = json::array();
        for (const auto& c : exp.cluster_centroids) cents.push_back(instance_to_json(c, specs));
        rb["cluster_centroids"] = std::move(cents);
        j["rule_based"] = std::move(rb);
    }
    json cfs = json::array();
    for (const auto& cf : exp.counterfactuals) cfs.push_back(instance_to_json(cf, specs));
    j["counterfactuals"] = std::move(cfs);
    j["rendering"] = exp.rendering;

    json cfg;
    cfg["n_samples"] = exp.config.n_samples;
    cfg["r0"] = exp.config.r0;
    cfg["theta"] = exp.config.theta;
    cfg["variant"] = exp.config.variant == NumericVariant::Prose ? "prose" : "literal";
    cfg["folding_threshold"] = exp.config.folding_threshold;
    cfg["si_threshold"] = exp.config.si_threshold;
    cfg["tau"] = exp.config.tau;
    cfg["fallback"] = exp.config.fallback == FallbackKind::Tree ? "tree" : "anchor";
    cfg["kmax"] = exp.config.kmax;
    cfg["use_folding"] = exp.config.use_folding;
    cfg["use_thornton"] = exp.config.use_thornton;
    j["config"] = std::move(cfg);

    return j.dump(2) + "\n";
}

}  // namespace ape
