#include "ape/rules.hpp"

#include "ape/common.hpp"
#include "ape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace ape {

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

double entropy(const std::map<int, std::size_t>& counts, double n) {
    double h = 0.0;
    for (const auto& [c, k] : counts) {
        if (k == 0) continue;
        const double p = static_cast<double>(k) / n;
        h -= p * std::log2(p);
    }
    return h;
}

struct SortedColumn {
    std::vector<double> values;
    std::vector<int> labels;
};

SortedColumn sort_column(const std::vector<double>& values, const std::vector<int>& labels) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    SortedColumn sc;
    for (auto i : idx) {
        sc.values.push_back(values[i]);
        sc.labels.push_back(labels[i]);
    }
    return sc;
}

// Candidate cut positions (midpoints between consecutive distinct values).
// When `boundary_only` is set, a midpoint is kept only if the two adjacent
// value groups differ in class composition (Fayyad-Irani boundary points).
std::vector<std::pair<double, std::size_t>> candidate_cuts(const SortedColumn& sc, std::size_t lo, std::size_t hi,
                                                           bool boundary_only) {
    std::vector<std::pair<double, std::size_t>> cands;  // (cut value, split index)
    std::size_t g_start = lo;
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        if (sc.values[i] == sc.values[i + 1]) continue;
        // Value group [g_start, i], next group starts at i+1.
        bool keep = true;
        if (boundary_only) {
            std::set<int> left_labels, right_labels;
            for (std::size_t a = g_start; a <= i; ++a) left_labels.insert(sc.labels[a]);
            std::size_t g2_end = i + 1;
            while (g2_end + 1 < hi && sc.values[g2_end + 1] == sc.values[i + 1]) ++g2_end;
            for (std::size_t a = i + 1; a <= g2_end; ++a) right_labels.insert(sc.labels[a]);
            keep = !(left_labels.size() == 1 && right_labels.size() == 1 && *left_labels.begin() == *right_labels.begin());
        }
        if (keep) cands.emplace_back(sc.values[i] + 0.5 * (sc.values[i + 1] - sc.values[i]), i + 1);
        g_start = i + 1;
    }
    return cands;
}

void mdlp_recurse(const SortedColumn& sc, std::size_t lo, std::size_t hi, std::vector<double>& cuts) {
    const double n = static_cast<double>(hi - lo);
    if (hi - lo < 2) return;

    std::map<int, std::size_t> total;
    for (std::size_t i = lo; i < hi; ++i) ++total[sc.labels[i]];
    const double ent_s = entropy(total, n);
    if (ent_s <= 0.0) return;  // pure segment

    const auto cands = candidate_cuts(sc, lo, hi, /*boundary_only=*/true);
    if (cands.empty()) return;

    double best_gain = -1.0;
    std::size_t best_split = 0;
    double best_cut = 0.0;
    double best_e1 = 0.0, best_e2 = 0.0;
    std::size_t best_k1 = 0, best_k2 = 0;

    std::map<int, std::size_t> left;
    std::size_t next_cand = 0;
    for (std::size_t i = lo; i < hi && next_cand < cands.size(); ++i) {
        ++left[sc.labels[i]];
        while (next_cand < cands.size() && cands[next_cand].second == i + 1) {
            const double n1 = static_cast<double>(i + 1 - lo);
            const double n2 = n - n1;
            std::map<int, std::size_t> right = total;
            for (const auto& [c, k] : left) right[c] -= k;
            const double e1 = entropy(left, n1);
            const double e2 = entropy(right, n2);
            const double gain = ent_s - (n1 / n) * e1 - (n2 / n) * e2;
            if (gain > best_gain + 1e-12) {
                best_gain = gain;
                best_split = i + 1;
                best_cut = cands[next_cand].first;
                best_e1 = e1;
                best_e2 = e2;
                best_k1 = 0;
                best_k2 = 0;
                for (const auto& [c, k] : left)
                    if (k > 0) ++best_k1;
                for (const auto& [c, k] : right)
                    if (k > 0) ++best_k2;
            }
            ++next_cand;
        }
    }
    if (best_gain <= 0.0) return;

    // MDL acceptance criterion.
    const double k = static_cast<double>(total.size());
    const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                         (k * ent_s - static_cast<double>(best_k1) * best_e1 - static_cast<double>(best_k2) * best_e2);
    const double threshold = (std::log2(n - 1.0) + delta) / n;
    if (best_gain <= threshold) return;

    cuts.push_back(best_cut);
    mdlp_recurse(sc, lo, best_split, cuts);
    mdlp_recurse(sc, best_split, hi, cuts);
}

void entropy_recurse(const SortedColumn& sc, std::size_t lo, std::size_t hi, int depth, std::vector<double>& cuts) {
    if (depth <= 0 || hi - lo < 2) return;
    const double n = static_cast<double>(hi - lo);
    std::map<int, std::size_t> total;
    for (std::size_t i = lo; i < hi; ++i) ++total[sc.labels[i]];
    const double ent_s = entropy(total, n);
    if (ent_s <= 0.0) return;

    const auto cands = candidate_cuts(sc, lo, hi, /*boundary_only=*/false);
    if (cands.empty()) return;

    double best_gain = 0.0;
    std::size_t best_split = 0;
    double best_cut = 0.0;
    std::map<int, std::size_t> left;
    std::size_t next_cand = 0;
    for (std::size_t i = lo; i < hi && next_cand < cands.size(); ++i) {
        ++left[sc.labels[i]];
        while (next_cand < cands.size() && cands[next_cand].second == i + 1) {
            const double n1 = static_cast<double>(i + 1 - lo);
            const double n2 = n - n1;
            std::map<int, std::size_t> right = total;
            for (const auto& [c, cnt] : left) right[c] -= cnt;
            const double gain = ent_s - (n1 / n) * entropy(left, n1) - (n2 / n) * entropy(right, n2);
            if (gain > best_gain + 1e-12) {
                best_gain = gain;
                best_split = i + 1;
                best_cut = cands[next_cand].first;
            }
            ++next_cand;
        }
    }
    if (best_gain <= 0.0) return;
    cuts.push_back(best_cut);
    entropy_recurse(sc, lo, best_split, depth - 1, cuts);
    entropy_recurse(sc, best_split, hi, depth - 1, cuts);
}

std::vector<double> quantile_cuts(std::vector<double> values, int parts) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::vector<double> cuts;
    for (int p = 1; p < parts; ++p) {
        // Linear interpolation, inclusive endpoints.
        const double pos = static_cast<double>(p) / parts * static_cast<double>(n - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        const double q = i + 1 < n ? values[i] + frac * (values[i + 1] - values[i]) : values[i];
        cuts.push_back(q);
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // Cuts at or beyond the extremes produce empty bins; drop them.
    std::vector<double> out;
    for (double c : cuts)
        if (c > values.front() && c < values.back()) out.push_back(c);
    return out;
}

}  // namespace

std::vector<double> mdlp_cuts(const std::vector<double>& values, const std::vector<int>& labels) {
    if (values.size() != labels.size()) throw InvalidArgument("mdlp_cuts: size mismatch");
    if (values.size() < 2) return {};
    const SortedColumn sc = sort_column(values, labels);
    std::vector<double> cuts;
    mdlp_recurse(sc, 0, sc.values.size(), cuts);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

double kmeans_1d(const std::vector<double>& xs, std::size_t k, std::vector<std::size_t>& boundaries) {
    const std::size_t n = xs.size();
    if (k == 0 || k > n) throw InvalidArgument("kmeans_1d: invalid k");
    // Prefix sums for O(1) segment SSE.
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + xs[i];
        s2[i + 1] = s2[i] + xs[i] * xs[i];
    }
    auto sse = [&](std::size_t i, std::size_t j) {  // [i, j)
        const double cnt = static_cast<double>(j - i);
        const double sum = s1[j] - s1[i];
        return (s2[j] - s2[i]) - sum * sum / cnt;
    };

    const double INF = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> D(k + 1, std::vector<double>(n + 1, INF));
    std::vector<std::vector<std::size_t>> arg(k + 1, std::vector<std::size_t>(n + 1, 0));
    D[0][0] = 0.0;
    for (std::size_t c = 1; c <= k; ++c) {
        for (std::size_t j = c; j <= n; ++j) {
            for (std::size_t i = c - 1; i < j; ++i) {
                if (D[c - 1][i] == INF) continue;
                const double cost = D[c - 1][i] + sse(i, j);
                if (cost < D[c][j]) {
                    D[c][j] = cost;
                    arg[c][j] = i;
                }
            }
        }
    }
    boundaries.clear();
    std::size_t j = n;
    for (std::size_t c = k; c > 1; --c) {
        j = arg[c][j];
        boundaries.push_back(j);  // first index of cluster c
    }
    std::reverse(boundaries.begin(), boundaries.end());
    return D[k][n];
}

DiscretizationScheme discretize(const Dataset& ds, const std::vector<int>& labels, DiscretizerMethod method) {
    if ((method == DiscretizerMethod::Entropy || method == DiscretizerMethod::MDLP) && labels.size() != ds.n_rows())
        throw InvalidArgument("discretize: Entropy/MDLP require one model label per row");

    DiscretizationScheme scheme;
    scheme.method = method;
    scheme.cuts.resize(ds.n_features());
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        if (ds.specs[j].is_categorical()) continue;
        std::vector<double> col;
        col.reserve(ds.n_rows());
        for (const auto& row : ds.rows) col.push_back(row[j]);
        std::set<double> distinct(col.begin(), col.end());
        if (distinct.size() < 2) continue;  // constant feature, zero cuts

        switch (method) {
            case DiscretizerMethod::Quartile:
                scheme.cuts[j] = quantile_cuts(col, 4);
                break;
            case DiscretizerMethod::Decile:
                scheme.cuts[j] = quantile_cuts(col, 10);
                break;
            case DiscretizerMethod::Entropy: {
                const SortedColumn sc = sort_column(col, labels);
                std::vector<double> cuts;
                entropy_recurse(sc, 0, sc.values.size(), 3, cuts);
                std::sort(cuts.begin(), cuts.end());
                scheme.cuts[j] = std::move(cuts);
                break;
            }
            case DiscretizerMethod::MDLP:
                scheme.cuts[j] = mdlp_cuts(col, labels);
                break;
            case DiscretizerMethod::KMeans: {
                std::vector<double> xs(col);
                std::sort(xs.begin(), xs.end());
                const std::size_t kmax = std::min<std::size_t>(9, distinct.size());
                std::vector<double> inertia(kmax + 1, 0.0);
                std::vector<std::vector<std::size_t>> bounds(kmax + 1);
                for (std::size_t k = 1; k <= kmax; ++k) inertia[k] = kmeans_1d(xs, k, bounds[k]);
                std::size_t chosen = 1;
                if (kmax >= 3) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (std::size_t k = 2; k + 1 <= kmax; ++k) {
                        const double curv = inertia[k - 1] - 2.0 * inertia[k] + inertia[k + 1];
                        if (curv > best + 1e-12) {
                            best = curv;
                            chosen = k;
                        }
                    }
                } else if (kmax == 2) {
                    chosen = inertia[2] <= 0.25 * inertia[1] ? 2 : 1;
                }
                std::vector<double> cuts;
                for (auto b : bounds[chosen]) cuts.push_back(xs[b - 1] + 0.5 * (xs[b] - xs[b - 1]));
                cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
                scheme.cuts[j] = std::move(cuts);
                break;
            }
        }
    }
    return scheme;
}

std::string Predicate::text(const std::vector<FeatureSpec>& specs) const {
    const std::string& name = specs[feature].name;
    if (categorical) return name + " = " + specs[feature].categories[category];
    const bool no_lo = std::isinf(lo), no_hi = std::isinf(hi);
    if (no_lo && no_hi) return name + " : any";
    if (no_lo) return name + " \xE2\x89\xA4 " + fmt4(hi);
    if (no_hi) return name + " > " + fmt4(lo);
    return name + " \xE2\x88\x88 (" + fmt4(lo) + ", " + fmt4(hi) + "]";
}

bool Predicate::matches(const Instance& inst) const {
    if (categorical) return static_cast<std::size_t>(inst[feature]) == category;
    return inst[feature] > lo && inst[feature] <= hi;
}

InterpretableEncoding InterpretableEncoding::from(const std::vector<FeatureSpec>& specs,
                                                  const DiscretizationScheme& scheme) {
    InterpretableEncoding enc;
    enc.specs = specs;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < specs.size(); ++j) {
        enc.feature_offset.push_back(enc.predicates.size());
        if (specs[j].is_categorical()) {
            for (std::size_t c = 0; c < specs[j].categories.size(); ++c) {
                Predicate p;
                p.feature = j;
                p.categorical = true;
                p.category = c;
                enc.predicates.push_back(p);
            }
            enc.feature_arity.push_back(specs[j].categories.size());
        } else {
            const auto& cuts = scheme.cuts.at(j);
            for (std::size_t b = 0; b <= cuts.size(); ++b) {
                Predicate p;
                p.feature = j;
                p.lo = b == 0 ? -inf : cuts[b - 1];
                p.hi = b == cuts.size() ? inf : cuts[b];
                enc.predicates.push_back(p);
            }
            enc.feature_arity.push_back(cuts.size() + 1);
        }
    }
    return enc;
}

std::vector<bool> InterpretableEncoding::encode(const Instance& inst) const {
    std::vector<bool> out(predicates.size(), false);
    for (std::size_t p = 0; p < predicates.size(); ++p) out[p] = predicates[p].matches(inst);
    return out;
}

std::size_t InterpretableEncoding::active_predicate(const Instance& inst, std::size_t j) const {
    for (std::size_t p = feature_offset[j]; p < feature_offset[j] + feature_arity[j]; ++p)
        if (predicates[p].matches(inst)) return p;
    throw Error("internal: encoding is not total for feature " + specs[j].name);
}

std::string render_rule(const AnchorRule& rule, const InterpretableEncoding& encoding, int predicted_class) {
    std::string out;
    if (rule.predicate_ids.empty()) {
        out = "true";
    } else {
        for (std::size_t i = 0; i < rule.predicate_ids.size(); ++i) {
            if (i) out += " \xE2\x88\xA7 ";
            out += encoding.predicates[rule.predicate_ids[i]].text(encoding.specs);
        }
    }
    out += " \xE2\x87\x92 class " + std::to_string(predicted_class);
    return out;
}

namespace {

std::uint64_t rule_fingerprint(const std::vector<std::size_t>& ids) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto id : ids) {
        h ^= id + 1;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct Candidate {
    std::vector<std::size_t> ids;
    double precision = 0.0;
    double coverage = 0.0;
};

}  // namespace

AnchorRule anchor_search(const Dataset& ds,
                         const Classifier& model,
                         const Instance& target,
                         const InterpretableEncoding& encoding,
                         const AnchorConfig& cfg) {
    const int target_class = model.predict_one(target);
    const std::size_t d = ds.n_features();

    // Per-predicate pools of training values satisfying the predicate.
    std::vector<std::vector<double>> pools(encoding.predicates.size());
    for (std::size_t p = 0; p < encoding.predicates.size(); ++p) {
        const auto& pred = encoding.predicates[p];
        for (const auto& row : ds.rows)
            if (pred.matches(row)) pools[p].push_back(row[pred.feature]);
    }

    // Monte-Carlo precision: unconstrained features come from a random
    // training row; constrained ones are resampled within their predicate.
    auto estimate_precision = [&](const std::vector<std::size_t>& ids) {
        Rng rng(derive_seed(cfg.seed, rule_fingerprint(ids)));
        std::vector<std::ptrdiff_t> constraint(d, -1);
        for (auto id : ids) constraint[encoding.predicates[id].feature] = static_cast<std::ptrdiff_t>(id);
        std::size_t hits = 0;
        Instance z(d);
        for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
            const auto& base = ds.rows[rng.index(ds.n_rows())];
            z = base;
            for (std::size_t j = 0; j < d; ++j) {
                if (constraint[j] < 0) continue;
                const auto& pool = pools[static_cast<std::size_t>(constraint[j])];
                z[j] = pool.empty() ? target[j] : pool[rng.index(pool.size())];
            }
            if (model.predict_one(z) == target_class) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(cfg.mc_samples);
    };

    auto coverage_of = [&](const std::vector<std::size_t>& ids) {
        std::size_t matched = 0;
        for (const auto& row : ds.rows) {
            bool ok = true;
            for (auto id : ids)
                if (!encoding.predicates[id].matches(row)) {
                    ok = false;
                    break;
                }
            if (ok) ++matched;
        }
        return static_cast<double>(matched) / static_cast<double>(ds.n_rows());
    };

    // Maximal attainable coverage for this class, for ncov.
    double p_class = 0.0;
    for (const auto& row : ds.rows)
        if (model.predict_one(row) == target_class) p_class += 1.0;
    p_class /= static_cast<double>(ds.n_rows());

    auto finalize = [&](const Candidate& c, bool below) {
        AnchorRule rule;
        rule.predicate_ids = c.ids;
        rule.predicted_class = target_class;
        rule.precision = c.precision;
        rule.coverage = c.coverage;
        rule.length = c.ids.size();
        rule.below_threshold = below;
        rule.zero_coverage = c.coverage <= 0.0;
        rule.ncov = p_class > 0 ? std::min(1.0, c.coverage / p_class) : 0.0;
        rule.f1 = (rule.ncov > 0 && rule.precision > 0) ? 2.0 / (1.0 / rule.ncov + 1.0 / rule.precision) : 0.0;
        rule.text = render_rule(rule, encoding, target_class);
        return rule;
    };

    // The predicates true on the target, one per feature.
    std::vector<std::size_t> target_preds;
    for (std::size_t j = 0; j < d; ++j) target_preds.push_back(encoding.active_predicate(target, j));

    // Level 0: the vacuous rule (covers a constant model).
    Candidate empty_rule;
    empty_rule.precision = estimate_precision({});
    empty_rule.coverage = 1.0;
    if (empty_rule.precision >= cfg.tau) return finalize(empty_rule, false);

    Candidate best_overall = empty_rule;
    std::vector<Candidate> beam = {empty_rule};

    const std::size_t max_len = std::min(cfg.max_length, d);
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Candidate> level;
        std::set<std::vector<std::size_t>> seen;
        for (const auto& parent : beam) {
            for (auto p : target_preds) {
                bool used = false;
                for (auto id : parent.ids)
                    if (encoding.predicates[id].feature == encoding.predicates[p].feature) {
                        used = true;
                        break;
                    }
                if (used) continue;
                auto ids = parent.ids;
                ids.push_back(p);
                std::sort(ids.begin(), ids.end());
                if (!seen.insert(ids).second) continue;
                Candidate c;
                c.ids = std::move(ids);
                c.precision = estimate_precision(c.ids);
                c.coverage = coverage_of(c.ids);
                level.push_back(std::move(c));
            }
        }
        if (level.empty()) break;

        std::sort(level.begin(), level.end(), [](const Candidate& a, const Candidate& b) {
            if (a.precision != b.precision) return a.precision > b.precision;
            if (a.coverage != b.coverage) return a.coverage > b.coverage;
            return a.ids < b.ids;
        });

        // Shortest-first guarantee: the first level with a tau-satisfying
        // candidate wins; among them prefer coverage, then lexicographic ids.
        Candidate* winner = nullptr;
        for (auto& c : level) {
            if (c.precision < cfg.tau) continue;
            if (!winner || c.coverage > winner->coverage ||
                (c.coverage == winner->coverage && c.ids < winner->ids))
                winner = &c;
        }
        if (winner) return finalize(*winner, false);

        if (level.front().precision > best_overall.precision) best_overall = level.front();
        if (level.size() > cfg.beam_width) level.resize(cfg.beam_width);
        beam = std::move(level);
    }
    return finalize(best_overall, true);
}

RuleMetrics rule_metrics(const AnchorRule& rule,
                         const InterpretableEncoding& encoding,
                         const std::vector<Instance>& eval_sample,
                         const Classifier& model,
                         int target_class) {
    if (eval_sample.empty()) throw InvalidArgument("rule_metrics: empty evaluation sample");
    const auto labels = model.predict(eval_sample);
    std::size_t matched = 0, matched_hits = 0, class_total = 0;
    for (std::size_t i = 0; i < eval_sample.size(); ++i) {
        if (labels[i] == target_class) ++class_total;
        bool ok = true;
        for (auto id : rule.predicate_ids)
            if (!encoding.predicates[id].matches(eval_sample[i])) {
                ok = false;
                break;
            }
        if (ok) {
            ++matched;
            if (labels[i] == target_class) ++matched_hits;
        }
    }
    RuleMetrics m;
    m.length = rule.predicate_ids.size();
    const double n = static_cast<double>(eval_sample.size());
    m.coverage = static_cast<double>(matched) / n;
    if (matched == 0) {
        m.zero_coverage = true;
        m.precision = 0.0;
    } else {
        m.precision = static_cast<double>(matched_hits) / static_cast<double>(matched);
    }
    const double p_class = static_cast<double>(class_total) / n;
    m.ncov = p_class > 0 ? std::min(1.0, m.coverage / p_class) : 0.0;
    m.f1 = (m.ncov > 0 && m.precision > 0) ? 2.0 / (1.0 / m.ncov + 1.0 / m.precision) : 0.0;
    return m;
}

}  // namespace ape
