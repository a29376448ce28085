#include "ape/evalharness.hpp"

#include "ape/common.hpp"
#include "ape/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ape {

using nlohmann::json;

std::vector<double> PlantedLinearModel::predict_proba_one(const Instance& inst) const {
    double margin = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) margin += weights[j] * inst[j];
    const double p1 = 1.0 / (1.0 + std::exp(-sharpness * margin));
    return {1.0 - p1, p1};
}

std::vector<double> CheckerboardModel::predict_proba_one(const Instance& inst) const {
    long long parity = 0;
    for (std::size_t j = 0; j < active_dims && j < inst.size(); ++j)
        parity += static_cast<long long>(std::floor(inst[j] / cell));
    const bool one = (parity % 2 + 2) % 2 == 1;
    return one ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
}

double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("kendall_tau_b: need two equal-size vectors");
    const std::size_t n = a.size();
    long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) continue;
            if (da == 0.0) ++ties_a;
            else if (db == 0.0) ++ties_b;
            else if ((da > 0) == (db > 0)) ++concordant;
            else ++discordant;
        }
    }
    const double n0 = static_cast<double>(concordant + discordant);
    const double denom = std::sqrt((n0 + ties_a) * (n0 + ties_b));
    if (denom <= 0.0) return 0.0;
    return (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
}

namespace {

std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct Welford {
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double stddev() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0; }
};

void push_row(ExperimentReport& rep, const std::string& cond, const std::string& metric, const Welford& w) {
    rep.rows.push_back({cond, metric, w.mean, w.stddev(), w.n});
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// 2-D standard-normal dataset with a margin carved out around no boundary;
// rows get labels from the model so training sets look like the paper's.
Dataset gaussian_dataset(std::size_t n, std::size_t d, std::uint64_t seed, const std::vector<double>& scales) {
    Dataset ds;
    for (std::size_t j = 0; j < d; ++j)
        ds.specs.push_back({"x" + std::to_string(j + 1), FeatureKind::Numerical, {}});
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Instance row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = rng.gaussian() * (j < scales.size() ? scales[j] : 1.0);
        ds.rows.push_back(std::move(row));
    }
    ds.recompute_stats();
    return ds;
}

void label_with(Dataset& ds, const Classifier& model) {
    ds.labels = model.predict(ds.rows);
    ds.recompute_stats();
}

std::vector<Instance> draw_targets(const Dataset& ds, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Instance> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(ds.rows[rng.index(ds.n_rows())]);
    return out;
}

struct PipelineOutcome {
    bool ok = false;
    bool verdict_yes = false;
    double lsape_adherence = 0.0;
    double lime_adherence = 0.0;
    double ls_adherence = 0.0;
    LinearSurrogate surrogate;
};

// Shared per-target pipeline: counterfactual, oracle verdict, LS_APE
// adherence, plus the two single-fit baselines.
PipelineOutcome adherence_pipeline(const Dataset& ds, const Classifier& model, const Instance& target,
                                   const ExplainConfig& cfg, bool with_baselines) {
    PipelineOutcome out;
    try {
        const int target_class = model.predict_one(target);
        FieldConfig fc = cfg.field_config();
        const CounterfactualResult gf = growing_fields(ds, model, target, fc);
        const DistanceContext ctx = DistanceContext::from(ds, target);
        const double r = std::min(1.0, std::max(gf.distance, 1e-6));

        FieldConfig ofc = fc;
        ofc.seed = derive_seed(cfg.seed, 0xf1e1d);
        const FieldSample field = sample_field(ds, model, ctx, r, gf.closest_enemy, ofc, target_class, 0);
        std::vector<Instance> real;
        for (const auto& row : ds.rows)
            if (normalized_distance(gf.closest_enemy, row, ctx) <= r) real.push_back(row);
        const auto real_labels = model.predict(real);
        const OracleVerdict verdict = ape_oracle(field, real, real_labels, target_class, ctx, cfg.oracle_config());
        out.verdict_yes = verdict.linear_suitable;

        LsApeConfig lc;
        lc.field = fc;
        lc.field.seed = derive_seed(cfg.seed, 0x15ae);
        out.surrogate = ls_ape(ds, model, target, gf.closest_enemy, lc);
        out.lsape_adherence = out.surrogate.adherence;

        if (with_baselines) {
            const Encoder enc = Encoder::from(ds.specs);
            // LS: single fit on the enemy-centered field, no expansion.
            out.ls_adherence =
                fit_linear_surrogate(local_fit_set(field, 200), model, target_class, enc,
                                     derive_seed(cfg.seed, 0x11), r)
                    .adherence;
            // LIME-lite: target-centered field, uniform weights, same fitter.
            FieldConfig xfc = fc;
            xfc.seed = derive_seed(cfg.seed, 0x13);
            const FieldSample xfield = sample_field(ds, model, ctx, r, target, xfc, target_class, 0);
            out.lime_adherence =
                fit_linear_surrogate(local_fit_set(xfield, 200), model, target_class, enc,
                                     derive_seed(cfg.seed, 0x17), r)
                    .adherence;
        }
        out.ok = true;
    } catch (const Error&) {
        out.ok = false;
    }
    return out;
}

}  // namespace

ExplainConfig HarnessConfig::explain_config() const {
    ExplainConfig ec;
    ec.seed = seed;
    ec.n_samples = n_samples;
    ec.si_threshold = si_threshold;
    ec.folding_threshold = folding_threshold;
    ec.fallback = fallback;
    return ec;
}

const MetricRow* ExperimentReport::find(const std::string& condition, const std::string& metric) const {
    for (const auto& r : rows)
        if (r.condition == condition && r.metric == metric) return &r;
    return nullptr;
}

std::string ExperimentReport::to_json(bool include_wall_time) const {
    json j;
    j["schema_version"] = 1;
    j["experiment"] = id;
    j["seed"] = seed;
    if (!config_snapshot.empty()) j["config"] = json::parse(config_snapshot);
    json rows_json = json::array();
    for (const auto& r : rows) {
        json row;
        row["condition"] = r.condition;
        row["metric"] = r.metric;
        row["mean"] = r.mean;
        row["std"] = r.stddev;
        row["n"] = r.n;
        rows_json.push_back(std::move(row));
    }
    j["rows"] = std::move(rows_json);
    j["scalars"] = scalars;
    if (include_wall_time) j["wall_time_sec"] = wall_time_sec;
    return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream out;
    out << "condition,metric,mean,std,n\n";
    for (const auto& r : rows)
        out << r.condition << ',' << r.metric << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << ',' << r.n << '\n';
    return out.str();
}

namespace {

struct OwnedPool {
    std::vector<std::unique_ptr<Classifier>> models;
    std::vector<PoolCase> cases;
};

// Mixed pool: planted-linear boundaries (suitable) and checkerboards
// (unsuitable), over 2-D and 4-D Gaussian data.
OwnedPool mixed_pool(std::uint64_t seed, std::size_t rows) {
    OwnedPool pool;
    {
        Dataset ds = gaussian_dataset(rows, 2, derive_seed(seed, 1), {1.0, 1.0});
        auto m = std::make_unique<PlantedLinearModel>(std::vector<double>{1.0, 0.6}, 0.1);
        label_with(ds, *m);
        pool.cases.push_back({"linear2d", std::move(ds), m.get(), true});
        pool.models.push_back(std::move(m));
    }
    {
        Dataset ds = gaussian_dataset(rows, 4, derive_seed(seed, 2), {1.0, 1.0, 1.0, 1.0});
        auto m = std::make_unique<PlantedLinearModel>(std::vector<double>{0.8, -0.5, 0.3, 0.0}, 0.0);
        label_with(ds, *m);
        pool.cases.push_back({"linear4d", std::move(ds), m.get(), true});
        pool.models.push_back(std::move(m));
    }
    {
        Dataset ds = gaussian_dataset(rows, 2, derive_seed(seed, 3), {1.0, 1.0});
        auto m = std::make_unique<CheckerboardModel>(1.4, 2);
        label_with(ds, *m);
        pool.cases.push_back({"checkerboard2d", std::move(ds), m.get(), false});
        pool.models.push_back(std::move(m));
    }
    return pool;
}

}  // namespace

ExperimentReport run_adherence_experiment(const HarnessConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.id = "adherence";
    rep.seed = cfg.seed;
    rep.config_snapshot = json{{"n_targets", cfg.n_targets},
                               {"si_threshold", cfg.si_threshold},
                               {"folding_threshold", cfg.folding_threshold}}
                              .dump();

    const OwnedPool pool = mixed_pool(cfg.seed, 600);
    Welford yes, no, lime, ls;
    std::size_t errors = 0;

    for (const auto& pc : pool.cases) {
        const auto targets = draw_targets(pc.dataset, cfg.n_targets / pool.cases.size() + 1,
                                          derive_seed(cfg.seed, stable_hash(pc.name)));
        for (std::size_t i = 0; i < targets.size(); ++i) {
            ExplainConfig ec = cfg.explain_config();
            ec.seed = derive_seed(cfg.seed, i * 977 + 13);
            const auto outcome = adherence_pipeline(pc.dataset, *pc.model, targets[i], ec, true);
            if (!outcome.ok) {
                ++errors;
                continue;
            }
            (outcome.verdict_yes ? yes : no).add(outcome.lsape_adherence);
            lime.add(outcome.lime_adherence);
            ls.add(outcome.ls_adherence);
        }
    }

    push_row(rep, "oracle_yes", "lsape_adherence", yes);
    push_row(rep, "oracle_no", "lsape_adherence", no);
    push_row(rep, "all", "lime_lite_adherence", lime);
    push_row(rep, "all", "ls_adherence", ls);
    rep.scalars["yes_minus_no_gap"] = (yes.n > 0 && no.n > 0) ? yes.mean - no.mean : 0.0;
    rep.scalars["errors"] = static_cast<double>(errors);
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ExperimentReport run_glassbox_fidelity(const HarnessConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.id = "glassbox_fidelity";
    rep.seed = cfg.seed;
    rep.config_snapshot = json{{"n_targets", cfg.n_targets}}.dump();

    // Zero-masked planted-linear data: labels depend on all 8 features, but
    // half are zeroed before training, so the glass boxes can only use the
    // surviving half.
    const std::size_t d = 8;
    Dataset base = gaussian_dataset(800, d, derive_seed(cfg.seed, 0x91a), std::vector<double>(d, 1.0));
    Rng mask_rng(derive_seed(cfg.seed, 0xa5));
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = d; i-- > 1;) std::swap(features[i], features[mask_rng.index(i + 1)]);
    const std::vector<std::size_t> zero_set(features.begin(), features.begin() + d / 2);

    std::vector<double> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = 0.4 + 0.2 * static_cast<double>(j);
    const PlantedLinearModel labeler(w, 0.0, 8.0);
    base.labels = labeler.predict(base.rows);
    for (auto& row : base.rows)
        for (auto z : zero_set) row[z] = 0.0;
    base.recompute_stats();

    // Nonlinear case for the No group.
    Dataset cb_ds = gaussian_dataset(800, 2, derive_seed(cfg.seed, 0x91b), {1.0, 1.0});
    const CheckerboardModel cb_model(1.4, 2);
    label_with(cb_ds, cb_model);

    struct GlassCase {
        std::string name;
        const Dataset* ds;
        std::unique_ptr<BlackBoxModel> model;
    };
    std::vector<GlassCase> cases;
    for (auto kind : {ModelKind::LogisticRegression, ModelKind::DecisionTree, ModelKind::RandomForest}) {
        ModelConfig mc;
        mc.kind = kind;
        GlassCase gc;
        gc.name = kind == ModelKind::LogisticRegression ? "logreg"
                  : kind == ModelKind::DecisionTree     ? "tree"
                                                        : "forest";
        gc.ds = &base;
        gc.model = train_model(base, mc, derive_seed(cfg.seed, 0xbb));
        cases.push_back(std::move(gc));
    }
    {
        ModelConfig mc;
        mc.kind = ModelKind::RandomForest;
        GlassCase gc;
        gc.name = "forest_checkerboard";
        gc.ds = &cb_ds;
        gc.model = train_model(cb_ds, mc, derive_seed(cfg.seed, 0xbc));
        cases.push_back(std::move(gc));
    }

    Welford tau_yes, tau_no, prec_yes, prec_no;
    const Encoder base_enc = Encoder::from(base.specs);

    for (const auto& gc : cases) {
        const auto targets =
            draw_targets(*gc.ds, cfg.n_targets / cases.size() + 1, derive_seed(cfg.seed, stable_hash(gc.name)));
        const GroundTruthRanking truth = gc.model->ground_truth_ranking();
        const std::size_t nf = gc.ds->specs.size();
        std::vector<double> truth_scores(nf, 0.0);
        for (std::size_t i = 0; i < truth.order.size(); ++i) truth_scores[truth.order[i]] = truth.scores[i];

        for (std::size_t i = 0; i < targets.size(); ++i) {
            ExplainConfig ec = cfg.explain_config();
            ec.seed = derive_seed(cfg.seed, i * 131 + 7);
            const auto outcome = adherence_pipeline(*gc.ds, *gc.model, targets[i], ec, false);
            if (!outcome.ok) continue;

            // Surrogate importance per original feature.
            const Encoder enc = Encoder::from(gc.ds->specs);
            std::vector<double> surr(nf, 0.0);
            for (std::size_t k = 0; k < outcome.surrogate.coefficients.size(); ++k)
                surr[enc.feature_of(k)] += std::abs(outcome.surrogate.coefficients[k]);

            // Top-half comparison per the glass-box protocol.
            std::vector<std::size_t> order(nf);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return surr[a] > surr[b]; });
            const std::size_t half = std::max<std::size_t>(1, nf / 2);
            std::vector<double> sub_surr, sub_truth;
            std::size_t in_truth_top = 0;
            std::vector<std::size_t> truth_top(truth.order.begin(),
                                               truth.order.begin() +
                                                   static_cast<std::ptrdiff_t>(std::min(half, truth.order.size())));
            for (std::size_t r2 = 0; r2 < half; ++r2) {
                const std::size_t f = order[r2];
                sub_surr.push_back(surr[f]);
                sub_truth.push_back(truth_scores[f]);
                if (std::find(truth_top.begin(), truth_top.end(), f) != truth_top.end()) ++in_truth_top;
            }
            const double tau = sub_surr.size() >= 2 ? kendall_tau_b(sub_surr, sub_truth) : 1.0;
            const double prec = static_cast<double>(in_truth_top) / static_cast<double>(half);
            (outcome.verdict_yes ? tau_yes : tau_no).add(tau);
            (outcome.verdict_yes ? prec_yes : prec_no).add(prec);
        }
    }

    push_row(rep, "oracle_yes", "kendall_tau_b", tau_yes);
    push_row(rep, "oracle_no", "kendall_tau_b", tau_no);
    push_row(rep, "oracle_yes", "top_half_precision", prec_yes);
    push_row(rep, "oracle_no", "top_half_precision", prec_no);
    rep.scalars["tau_gap"] = (tau_yes.n > 0 && tau_no.n > 0) ? tau_yes.mean - tau_no.mean : 0.0;
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ExperimentReport run_cf_quality(const HarnessConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.id = "cf_quality";
    rep.seed = cfg.seed;
    rep.config_snapshot = json{{"n_targets", cfg.n_targets}}.dump();

    struct CfCase {
        std::string name;
        Dataset ds;
        std::unique_ptr<Classifier> model;
    };
    std::vector<CfCase> cases;
    {
        // Scale-skewed: stds (1, 1000), boundary across the large-scale axis.
        CfCase c;
        c.name = "skewed";
        c.ds = gaussian_dataset(600, 2, derive_seed(cfg.seed, 0x5c1), {1.0, 1000.0});
        c.model = std::make_unique<PlantedLinearModel>(std::vector<double>{0.0, 1.0 / 1000.0}, 0.0, 8.0);
        label_with(c.ds, *c.model);
        cases.push_back(std::move(c));
    }
    {
        // Isotropic control.
        CfCase c;
        c.name = "isotropic";
        c.ds = gaussian_dataset(600, 2, derive_seed(cfg.seed, 0x5c2), {1.0, 1.0});
        c.model = std::make_unique<PlantedLinearModel>(std::vector<double>{0.7, 0.7}, 0.0, 8.0);
        label_with(c.ds, *c.model);
        cases.push_back(std::move(c));
    }

    for (const auto& c : cases) {
        Welford gf_maha, gs_maha, gf_time, gs_time, gf_dist, gs_dist;
        std::vector<double> gf_times, gs_times;
        const auto targets = draw_targets(c.ds, cfg.n_targets, derive_seed(cfg.seed, stable_hash(c.name)));
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const int target_class = c.model->predict_one(targets[i]);
            std::vector<Instance> enemy_pool;
            for (std::size_t rix = 0; rix < c.ds.n_rows(); ++rix)
                if ((*c.ds.labels)[rix] != target_class) enemy_pool.push_back(c.ds.rows[rix]);
            if (enemy_pool.size() < 2) continue;

            FieldConfig fc;
            fc.n = cfg.n_samples;
            fc.seed = derive_seed(cfg.seed, i * 31 + 1);
            try {
                const auto gf = growing_fields(c.ds, *c.model, targets[i], fc);
                gf_maha.add(mahalanobis_distance(gf.closest_enemy, enemy_pool, c.ds.specs));
                gf_time.add(gf.wall_time_sec);
                gf_times.push_back(gf.wall_time_sec);
                gf_dist.add(gf.distance);
                const auto gs = growing_spheres(c.ds, *c.model, targets[i], fc);
                gs_maha.add(mahalanobis_distance(gs.closest_enemy, enemy_pool, c.ds.specs));
                gs_time.add(gs.wall_time_sec);
                gs_times.push_back(gs.wall_time_sec);
                const DistanceContext ctx = DistanceContext::from(c.ds, targets[i]);
                gs_dist.add(normalized_distance(targets[i], gs.closest_enemy, ctx));
            } catch (const Error&) {
                continue;
            }
        }
        push_row(rep, c.name + "/growing_fields", "mahalanobis", gf_maha);
        push_row(rep, c.name + "/growing_spheres", "mahalanobis", gs_maha);
        push_row(rep, c.name + "/growing_fields", "wall_time_sec", gf_time);
        push_row(rep, c.name + "/growing_spheres", "wall_time_sec", gs_time);
        push_row(rep, c.name + "/growing_fields", "normalized_distance", gf_dist);
        push_row(rep, c.name + "/growing_spheres", "normalized_distance", gs_dist);
        auto median = [](std::vector<double> v) {
            if (v.empty()) return 0.0;
            std::sort(v.begin(), v.end());
            return v[v.size() / 2];
        };
        rep.scalars[c.name + "/gf_median_time"] = median(gf_times);
        rep.scalars[c.name + "/gs_median_time"] = median(gs_times);
    }
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ExperimentReport run_ablation(const HarnessConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.id = "ablation";
    rep.seed = cfg.seed;
    rep.config_snapshot = json{{"n_targets", cfg.n_targets}}.dump();

    const OwnedPool pool = mixed_pool(cfg.seed, 600);
    struct Arm {
        std::string name;
        bool use_folding, use_thornton;
    };
    const std::vector<Arm> arms = {{"full", true, true}, {"no_folding", false, true}, {"no_thornton", true, false}};

    std::map<std::string, Welford> adherence_by_arm;
    std::map<std::string, Welford> yes_rate_by_arm;

    for (const auto& pc : pool.cases) {
        const auto targets = draw_targets(pc.dataset, cfg.n_targets / pool.cases.size() + 1,
                                          derive_seed(cfg.seed, stable_hash(pc.name)));
        for (std::size_t i = 0; i < targets.size(); ++i) {
            // Paired design: all arms share the target and derived seed.
            for (const auto& arm : arms) {
                ExplainConfig ec = cfg.explain_config();
                ec.seed = derive_seed(cfg.seed, i * 977 + 13);
                ec.use_folding = arm.use_folding;
                ec.use_thornton = arm.use_thornton;
                try {
                    const Explanation exp = explain_classifier(pc.dataset, *pc.model, targets[i], ec);
                    double adherence = 0.0;
                    if (exp.tag == Explanation::Tag::Linear)
                        adherence = exp.surrogate->adherence;
                    else if (exp.rule)
                        adherence = exp.rule->adherence;
                    adherence_by_arm[arm.name].add(adherence);
                    yes_rate_by_arm[arm.name].add(exp.verdict.linear_suitable ? 1.0 : 0.0);
                } catch (const Error&) {
                    continue;
                }
            }
        }
    }

    for (const auto& arm : arms) {
        push_row(rep, arm.name, "adherence", adherence_by_arm[arm.name]);
        push_row(rep, arm.name, "yes_rate", yes_rate_by_arm[arm.name]);
    }
    rep.scalars["full_minus_no_folding"] = adherence_by_arm["full"].mean - adherence_by_arm["no_folding"].mean;
    rep.scalars["full_minus_no_thornton"] = adherence_by_arm["full"].mean - adherence_by_arm["no_thornton"].mean;
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace ape
