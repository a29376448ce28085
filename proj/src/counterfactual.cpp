#include "ape/counterfactual.hpp"

#include "ape/common.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ape {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void track_best(const FieldSample& fs, Instance& best, double& best_dist) {
    for (std::size_t i : fs.in_field_enemies) {
        if (fs.distance[i] < best_dist) {
            best_dist = fs.distance[i];
            best = fs.instances[i];
        }
    }
}

}  // namespace

CounterfactualResult growing_fields(const Dataset& ds,
                                    const Classifier& model,
                                    const Instance& target,
                                    const FieldConfig& cfg) {
    const auto t0 = Clock::now();
    const DistanceContext ctx = DistanceContext::from(ds, target);
    const int target_class = model.predict_one(target);

    CounterfactualResult res;
    res.distance = std::numeric_limits<double>::infinity();

    double r = cfg.r0;
    std::uint64_t stream = 0;
    FieldSample fs = sample_field(ds, model, ctx, r, target, cfg, target_class, stream++);
    track_best(fs, res.closest_enemy, res.distance);

    // Phase 1: shrink while the boundary is still inside the field.
    int halvings = 0;
    while (!fs.in_field_enemies.empty() && halvings < cfg.max_halvings) {
        r /= 2.0;
        ++halvings;
        fs = sample_field(ds, model, ctx, r, target, cfg, target_class, stream++);
        track_best(fs, res.closest_enemy, res.distance);
    }

    // Phase 2: expand until the boundary is crossed again.
    int expansions = 0;
    while (fs.in_field_enemies.empty()) {
        if (expansions++ >= cfg.max_expansions)
            throw NoCounterfactual("no enemy found after " + std::to_string(cfg.max_expansions) +
                                   " expansions (locally constant model?)");
        r = std::min(1.0, cfg.theta * r);
        fs = sample_field(ds, model, ctx, r, target, cfg, target_class, stream++);
        track_best(fs, res.closest_enemy, res.distance);
    }

    res.final_radius = r;
    res.iterations = static_cast<std::size_t>(stream);
    res.model_calls = res.iterations * cfg.n;
    res.sample = std::move(fs);
    res.wall_time_sec = seconds_since(t0);
    return res;
}

CounterfactualResult growing_spheres(const Dataset& ds,
                                     const Classifier& model,
                                     const Instance& target,
                                     const FieldConfig& cfg) {
    for (const auto& s : ds.specs)
        if (s.is_categorical())
            throw UnsupportedFeature("growing_spheres does not handle categorical attributes");

    const auto t0 = Clock::now();
    const int target_class = model.predict_one(target);
    const std::size_t d = target.size();

    auto sample_ball = [&](double radius, std::uint64_t stream) {
        FieldSample fs;
        fs.center = target;
        fs.radius = radius;
        fs.reference_class = target_class;
        Rng rng(derive_seed(cfg.seed, stream));
        for (std::size_t i = 0; i < cfg.n; ++i) {
            Instance z(d);
            double norm2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                z[j] = rng.gaussian();
                norm2 += z[j] * z[j];
            }
            const double norm = std::sqrt(std::max(norm2, 1e-300));
            const double rad = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
            for (std::size_t j = 0; j < d; ++j) z[j] = target[j] + z[j] * rad / norm;
            fs.instances.push_back(std::move(z));
        }
        fs.labels = model.predict(fs.instances);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            fs.distance.push_back(euclidean_distance(target, fs.instances[i]));
            if (fs.labels[i] == target_class) {
                fs.friends.push_back(i);
                fs.in_field_friends.push_back(i);
            } else {
                fs.enemies.push_back(i);
                fs.in_field_enemies.push_back(i);
            }
        }
        return fs;
    };

    CounterfactualResult res;
    res.distance = std::numeric_limits<double>::infinity();

    double r = cfg.r0;
    std::uint64_t stream = 0;
    FieldSample fs = sample_ball(r, stream++);
    track_best(fs, res.closest_enemy, res.distance);

    int halvings = 0;
    while (!fs.enemies.empty() && halvings < cfg.max_halvings) {
        r /= 2.0;
        ++halvings;
        fs = sample_ball(r, stream++);
        track_best(fs, res.closest_enemy, res.distance);
    }
    int expansions = 0;
    while (fs.enemies.empty()) {
        if (expansions++ >= cfg.max_expansions)
            throw NoCounterfactual("no enemy found after " + std::to_string(cfg.max_expansions) +
                                   " expansions (locally constant model?)");
        r *= cfg.theta;  // raw-space radius, no unit cap
        fs = sample_ball(r, stream++);
        track_best(fs, res.closest_enemy, res.distance);
    }

    res.final_radius = r;
    res.iterations = static_cast<std::size_t>(stream);
    res.model_calls = res.iterations * cfg.n;
    res.sample = std::move(fs);
    res.wall_time_sec = seconds_since(t0);
    return res;
}

double kmeans_lloyd(const std::vector<std::vector<double>>& points,
                    std::size_t k,
                    std::uint64_t seed,
                    std::vector<std::size_t>& assignment,
                    std::vector<std::vector<double>>& centroids,
                    std::vector<double>* trace) {
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    Rng rng(seed);

    auto sqdist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        return s;
    };

    // k-means++ seeding.
    centroids.clear();
    centroids.push_back(points[rng.index(n)]);
    std::vector<double> d2(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sqdist(points[i], c));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centroids.push_back(points[rng.index(n)]);
            continue;
        }
        double u = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        centroids.push_back(points[pick]);
    }

    assignment.assign(n, 0);
    double inertia = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double s = sqdist(points[i], centroids[c]);
                if (s < bd) {
                    bd = s;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
            inertia += bd;
        }
        if (trace) trace->push_back(inertia);
        if (!changed && iter > 0) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assignment[i]];
            for (std::size_t j = 0; j < dim; ++j) sums[assignment[i]][j] += points[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed an empty cluster at the farthest point.
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double s = sqdist(points[i], centroids[assignment[i]]);
                    if (s > fd) {
                        fd = s;
                        far = i;
                    }
                }
                centroids[c] = points[far];
            } else {
                for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }
    return inertia;
}

EnemyClusterSet cluster_enemies(const std::vector<Instance>& enemies,
                                const Classifier& model,
                                const Instance& target,
                                const DistanceContext& ctx,
                                std::size_t kmax,
                                std::uint64_t seed) {
    if (enemies.size() < 2) throw InvalidArgument("cluster_enemies needs at least 2 enemies");

    const Encoder enc = Encoder::from(ctx.specs);
    std::vector<std::vector<double>> pts;
    pts.reserve(enemies.size());
    for (const auto& e : enemies) {
        auto x = enc.encode(e);
        for (std::size_t j = 0; j < ctx.specs.size(); ++j) {
            if (!ctx.specs[j].is_categorical() && ctx.stats[j].stddev > 0)
                x[enc.offset[j]] /= ctx.stats[j].stddev;
        }
        pts.push_back(std::move(x));
    }

    const std::size_t K = std::min(kmax, enemies.size());
    EnemyClusterSet out;

    std::vector<std::vector<std::size_t>> assignments(K + 1);
    std::vector<std::vector<std::vector<double>>> centroid_sets(K + 1);
    out.inertia_curve.resize(K + 1, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (int restart = 0; restart < 5; ++restart) {
            std::vector<std::size_t> assign;
            std::vector<std::vector<double>> cents;
            const double inertia =
                kmeans_lloyd(pts, k, derive_seed(seed, k * 16 + static_cast<std::size_t>(restart)), assign, cents);
            if (inertia < best) {
                best = inertia;
                assignments[k] = std::move(assign);
                centroid_sets[k] = std::move(cents);
            }
        }
        out.inertia_curve[k] = best;
    }

    // Elbow: maximum second difference of the inertia curve, preferring
    // smaller k on ties. A near-zero total inertia means one tight cloud.
    std::size_t chosen = 1;
    if (out.inertia_curve[1] <= 1e-12) {
        chosen = 1;
    } else if (K == 1) {
        chosen = 1;
    } else if (K == 2) {
        chosen = out.inertia_curve[2] <= 0.25 * out.inertia_curve[1] ? 2 : 1;
    } else {
        double best_curv = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 2; k + 1 <= K; ++k) {
            const double curv = out.inertia_curve[k - 1] - 2.0 * out.inertia_curve[k] + out.inertia_curve[k + 1];
            if (curv > best_curv + 1e-12) {
                best_curv = curv;
                chosen = k;
            }
        }
    }
    out.k = chosen;
    out.inertia_curve.erase(out.inertia_curve.begin());  // drop the k=0 slot

    const auto& cents = centroid_sets[chosen];
    const auto& assign = assignments[chosen];
    auto sqdist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        return s;
    };

    for (std::size_t c = 0; c < chosen; ++c) {
        // Nearest member of the cluster; fall back to global nearest if the
        // cluster came out empty.
        std::size_t best_i = 0;
        double bd = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (assign[i] != c) continue;
            const double s = sqdist(pts[i], cents[c]);
            if (s < bd) {
                bd = s;
                best_i = i;
                found = true;
            }
        }
        if (!found) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double s = sqdist(pts[i], cents[c]);
                if (s < bd) {
                    bd = s;
                    best_i = i;
                }
            }
        }
        out.representatives.push_back(enemies[best_i]);

        // Project the centroid back to instance coordinates.
        Instance centroid(ctx.specs.size(), 0.0);
        for (std::size_t j = 0; j < ctx.specs.size(); ++j) {
            if (ctx.specs[j].is_categorical()) {
                const std::size_t off = enc.offset[j];
                std::size_t arg = 0;
                for (std::size_t m = 1; m < ctx.specs[j].categories.size(); ++m)
                    if (cents[c][off + m] > cents[c][off + arg]) arg = m;
                centroid[j] = static_cast<double>(arg);
            } else {
                const double sigma = ctx.stats[j].stddev > 0 ? ctx.stats[j].stddev : 1.0;
                centroid[j] = cents[c][enc.offset[j]] * sigma;
            }
        }
        out.centroids.push_back(std::move(centroid));
    }

    // Validity guard on representatives.
    const int target_class = model.predict_one(target);
    for (const auto& rep : out.representatives)
        if (model.predict_one(rep) == target_class)
            throw Error("internal: cluster representative is not an enemy");

    return out;
}

}  // namespace ape
