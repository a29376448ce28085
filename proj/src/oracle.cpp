#include "ape/oracle.hpp"

#include "ape/common.hpp"
#include "ape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ape {

namespace {

// Exact minimizer of Var(|x - s|) for one coordinate. Between consecutive
// data points the folded variance is a convex quadratic in s, so the global
// optimum is found by scanning segments and evaluating each vertex.
struct FoldedCoord {
    double pivot;
    double variance;
};

FoldedCoord fold_coordinate(std::vector<double> xs) {
    const std::size_t n = xs.size();
    std::sort(xs.begin(), xs.end());
    const double nn = static_cast<double>(n);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / nn;
    double q = 0.0;  // E[x^2]
    for (double x : xs) q += x * x;
    q /= nn;

    double prefix = 0.0;  // sum of xs[0..k-1]
    const double total = mean * nn;
    double best_var = std::numeric_limits<double>::infinity();
    double best_s = xs[0];

    auto consider = [&](double s, double alpha, double beta) {
        // Var(s) = (1 - a^2) s^2 - 2 (mean + a b) s + q - b^2
        const double var = (1.0 - alpha * alpha) * s * s - 2.0 * (mean + alpha * beta) * s + q - beta * beta;
        if (var < best_var) {
            best_var = var;
            best_s = s;
        }
    };

    for (std::size_t k = 0; k <= n; ++k) {
        // Segment where exactly k points lie at or below s.
        const double alpha = (2.0 * static_cast<double>(k) - nn) / nn;
        const double beta = ((total - prefix) - prefix) / nn;
        const double lo = k == 0 ? xs[0] : xs[k - 1];
        const double hi = k == n ? xs[n - 1] : xs[k];
        if (lo <= hi) {
            const double lead = 1.0 - alpha * alpha;
            if (lead > 1e-15) {
                const double vertex = (mean + alpha * beta) / lead;
                consider(std::clamp(vertex, lo, hi), alpha, beta);
            }
            consider(lo, alpha, beta);
            consider(hi, alpha, beta);
        }
        if (k < n) prefix += xs[k];
    }
    return {best_s, std::max(best_var, 0.0)};
}

}  // namespace

FoldingResult folding_test(const std::vector<std::vector<double>>& points, double threshold) {
    FoldingResult res;
    if (points.size() < 10) {
        res.unimodal = true;
        res.degenerate = true;
        return res;
    }
    const std::size_t dim = points[0].size();
    const double n = static_cast<double>(points.size());

    res.pivot.resize(dim);
    std::vector<double> col(points.size());
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < points.size(); ++i) col[i] = points[i][j];
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double var = 0.0;
        for (double x : col) var += (x - mean) * (x - mean);
        var /= n;
        res.raw_variance += var;
        const FoldedCoord fc = fold_coordinate(col);
        res.pivot[j] = fc.pivot;
        res.folded_variance += fc.variance;
    }

    if (res.raw_variance <= 1e-15) {
        res.unimodal = true;
        res.degenerate = true;
        return res;
    }
    res.phi = 4.0 * res.folded_variance / res.raw_variance;
    res.unimodal = res.phi >= threshold;
    return res;
}

double separability_index(const std::vector<std::vector<double>>& points, const std::vector<int>& labels) {
    if (points.size() < 2) throw InvalidArgument("separability_index needs >= 2 points");
    if (points.size() != labels.size()) throw InvalidArgument("separability_index: size mismatch");
    const std::size_t n = points.size();
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = i;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0.0;
            for (std::size_t d = 0; d < points[i].size(); ++d) {
                const double diff = points[i][d] - points[j][d];
                s += diff * diff;
            }
            if (s < best) {  // strict: ties keep the lowest index
                best = s;
                arg = j;
            }
        }
        if (labels[arg] == labels[i]) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(n);
}

std::vector<double> oracle_embed(const Instance& inst, const DistanceContext& ctx, const Encoder& enc) {
    auto x = enc.encode(inst);
    for (std::size_t j = 0; j < ctx.specs.size(); ++j) {
        if (!ctx.specs[j].is_categorical() && ctx.stats[j].stddev > 0) x[enc.offset[j]] /= ctx.stats[j].stddev;
    }
    return x;
}

namespace {

// In-field indices of one partition, topped up with the nearest
// out-of-field draws so the tests always see a workable local sample.
std::vector<std::size_t> local_subset(const FieldSample& fs,
                                      const std::vector<std::size_t>& in_field,
                                      const std::vector<std::size_t>& all,
                                      std::size_t floor_count) {
    if (in_field.size() >= floor_count) return in_field;
    std::vector<std::size_t> sorted = all;
    std::sort(sorted.begin(), sorted.end(),
              [&](std::size_t a, std::size_t b) { return fs.distance[a] < fs.distance[b]; });
    if (sorted.size() > floor_count) sorted.resize(floor_count);
    return sorted;
}

}  // namespace

OracleVerdict ape_oracle(const FieldSample& sample,
                         const std::vector<Instance>& real_in_field,
                         const std::vector<int>& real_labels,
                         int target_class,
                         const DistanceContext& ctx,
                         const OracleConfig& cfg) {
    OracleVerdict v;
    if (sample.friends.empty() || sample.enemies.empty()) {
        v.reason = sample.enemies.empty() ? "no_enemies_in_field" : "no_friends_in_field";
        v.linear_suitable = false;
        return v;
    }

    const Encoder enc = Encoder::from(ctx.specs);
    const auto friend_idx = local_subset(sample, sample.in_field_friends, sample.friends, cfg.locality_floor);
    const auto enemy_idx = local_subset(sample, sample.in_field_enemies, sample.enemies, cfg.locality_floor);

    auto embed_all = [&](const std::vector<std::size_t>& idx) {
        std::vector<std::vector<double>> pts;
        pts.reserve(idx.size());
        for (auto i : idx) pts.push_back(oracle_embed(sample.instances[i], ctx, enc));
        return pts;
    };

    const auto friend_pts = embed_all(friend_idx);
    const auto enemy_pts = embed_all(enemy_idx);

    if (cfg.use_folding) {
        v.friends_evidence = folding_test(friend_pts, cfg.folding_threshold);
        v.enemies_evidence = folding_test(enemy_pts, cfg.folding_threshold);
        v.friends_unimodal = v.friends_evidence.unimodal;
        v.enemies_unimodal = v.enemies_evidence.unimodal;
    } else {
        v.friends_unimodal = v.enemies_unimodal = true;
    }

    if (!(v.friends_unimodal && v.enemies_unimodal)) {
        v.separability_index = 0.0;
        v.linear_suitable = false;
        return v;
    }

    if (cfg.use_thornton) {
        // Balanced subsample: downsample the majority partition uniformly.
        const std::size_t half = std::min({friend_idx.size(), enemy_idx.size(), cfg.balanced_cap / 2});
        Rng rng(derive_seed(cfg.seed, 0xba1a));
        auto pick = [&](const std::vector<std::size_t>& idx, std::size_t count) {
            std::vector<std::size_t> pool = idx;
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t j = i + rng.index(pool.size() - i);
                std::swap(pool[i], pool[j]);
            }
            pool.resize(count);
            return pool;
        };
        std::vector<std::vector<double>> pts;
        std::vector<int> labels;
        for (auto i : pick(friend_idx, half)) {
            pts.push_back(oracle_embed(sample.instances[i], ctx, enc));
            labels.push_back(1);
        }
        for (auto i : pick(enemy_idx, half)) {
            pts.push_back(oracle_embed(sample.instances[i], ctx, enc));
            labels.push_back(0);
        }
        for (std::size_t i = 0; i < real_in_field.size(); ++i) {
            pts.push_back(oracle_embed(real_in_field[i], ctx, enc));
            labels.push_back(real_labels[i] == target_class ? 1 : 0);
        }
        if (pts.size() >= 2) {
            v.separability_index = separability_index(pts, labels);
        } else {
            v.separability_index = 1.0;
            v.reason = "balanced_sample_too_small";
        }
        v.linear_suitable = v.separability_index >= cfg.si_threshold;
    } else {
        v.separability_index = 1.0;
        v.linear_suitable = true;
    }
    return v;
}

}  // namespace ape
