#include "ape/geometry.hpp"

#include "ape/common.hpp"

#include <cmath>
#include <limits>

namespace ape {

DistanceContext DistanceContext::from(const Dataset& ds, const Instance& reference) {
    const ReferenceStats rs = compute_stats(ds, reference);
    DistanceContext ctx;
    ctx.specs = ds.specs;
    ctx.stats = rs.per_feature;
    ctx.delta = rs.delta;
    return ctx;
}

DistanceContext DistanceContext::raw(const Dataset& ds) {
    DistanceContext ctx;
    ctx.specs = ds.specs;
    ctx.stats = ds.stats;
    ctx.delta = 1.0;
    return ctx;
}

double standardized_distance(const Instance& a, const Instance& b, const DistanceContext& ctx) {
    if (a.size() != b.size() || a.size() != ctx.specs.size())
        throw InvalidArgument("standardized_distance: arity mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (ctx.specs[j].is_categorical()) {
            // One-hot coordinates with sigma = 1: a differing category flips
            // two coordinates, each contributing 1.
            if (a[j] != b[j]) sum += 2.0;
        } else {
            const double diff = a[j] - b[j];
            if (diff == 0.0) continue;
            const double sigma = ctx.stats[j].stddev;
            if (sigma <= 0.0) return std::numeric_limits<double>::infinity();
            sum += (diff / sigma) * (diff / sigma);
        }
    }
    return std::sqrt(sum);
}

double normalized_distance(const Instance& a, const Instance& b, const DistanceContext& ctx) {
    return standardized_distance(a, b, ctx) / ctx.delta;
}

double mahalanobis_distance(const Instance& point,
                            const std::vector<Instance>& sample,
                            const std::vector<FeatureSpec>& specs) {
    if (sample.size() < 2) throw InvalidArgument("mahalanobis_distance needs a sample of >= 2 points");
    // Expand into one-hot space, accumulate mean and variance per dimension.
    std::size_t dim = 0;
    for (const auto& s : specs) dim += s.is_categorical() ? s.categories.size() : 1;

    auto expand = [&](const Instance& inst, std::vector<double>& out) {
        out.assign(dim, 0.0);
        std::size_t k = 0;
        for (std::size_t j = 0; j < specs.size(); ++j) {
            if (specs[j].is_categorical()) {
                out[k + static_cast<std::size_t>(inst[j])] = 1.0;
                k += specs[j].categories.size();
            } else {
                out[k++] = inst[j];
            }
        }
    };

    std::vector<double> mean(dim, 0.0), var(dim, 0.0), buf;
    const double n = static_cast<double>(sample.size());
    for (const auto& inst : sample) {
        expand(inst, buf);
        for (std::size_t k = 0; k < dim; ++k) mean[k] += buf[k];
    }
    for (auto& m : mean) m /= n;
    for (const auto& inst : sample) {
        expand(inst, buf);
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = buf[k] - mean[k];
            var[k] += d * d;
        }
    }
    for (auto& v : var) v /= n;

    expand(point, buf);
    double sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = buf[k] - mean[k];
        if (var[k] <= 0.0) {
            if (d != 0.0) sum += d * d / 1e-12;
        } else {
            sum += d * d / var[k];
        }
    }
    return std::sqrt(sum);
}

double euclidean_distance(const Instance& a, const Instance& b) {
    if (a.size() != b.size()) throw InvalidArgument("euclidean_distance: arity mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(sum);
}

}  // namespace ape
