#include "ape/fieldgen.hpp"

#include "ape/common.hpp"

#include <algorithm>
#include <cmath>

namespace ape {

PerturbBounds perturb_bounds(const FeatureStats& st, double r, NumericVariant variant) {
    PerturbBounds pb;
    if (variant == NumericVariant::Prose) {
        const double v = std::sqrt(12.0 * st.stddev);
        pb.a = std::min(0.0, r * st.amplitude - v);
        pb.b = pb.a + v;
    } else {
        pb.a = std::min(0.0, r * st.amplitude - st.stddev);
        pb.b = pb.a + st.stddev;
    }
    return pb;
}

Instance sample_field_instance(const std::vector<FeatureSpec>& specs,
                               const std::vector<FeatureStats>& stats,
                               const std::vector<std::vector<double>>& cat_freqs,
                               double r,
                               const Instance& center,
                               Rng& rng,
                               NumericVariant variant) {
    if (r <= 0.0 || r > 1.0) throw InvalidArgument("field radius must be in (0, 1]");
    Instance z = center;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        if (specs[j].is_categorical()) {
            const double rho = rng.uniform(0.0, r);
            if (rng.uniform() < rho) {
                // Redistribute the empirical mass of the remaining categories.
                const auto& freq = cat_freqs[j];
                const auto keep = static_cast<std::size_t>(center[j]);
                double total = 0.0;
                for (std::size_t c = 0; c < freq.size(); ++c)
                    if (c != keep) total += freq[c];
                if (total <= 0.0) continue;  // no alternative ever observed
                double u = rng.uniform() * total;
                std::size_t chosen = keep;
                for (std::size_t c = 0; c < freq.size(); ++c) {
                    if (c == keep) continue;
                    u -= freq[c];
                    if (u <= 0.0) {
                        chosen = c;
                        break;
                    }
                }
                if (chosen == keep) {  // numeric fringe: pick last alternative
                    for (std::size_t c = freq.size(); c-- > 0;)
                        if (c != keep) {
                            chosen = c;
                            break;
                        }
                }
                z[j] = static_cast<double>(chosen);
            }
        } else {
            if (stats[j].stddev <= 0.0) continue;
            const PerturbBounds pb = perturb_bounds(stats[j], r, variant);
            z[j] = center[j] + rng.uniform(pb.a, pb.b);
        }
    }
    return z;
}

FieldSample sample_field(const Dataset& ds,
                         const Classifier& model,
                         const DistanceContext& ctx,
                         double r,
                         const Instance& center,
                         const FieldConfig& cfg,
                         int reference_class,
                         std::uint64_t stream) {
    if (cfg.n < 1) throw InvalidArgument("field sample count must be >= 1");
    FieldSample fs;
    fs.center = center;
    fs.radius = r;
    fs.reference_class = reference_class;
    fs.instances.reserve(cfg.n);
    Rng rng(derive_seed(cfg.seed, stream));
    for (std::size_t i = 0; i < cfg.n; ++i)
        fs.instances.push_back(
            sample_field_instance(ds.specs, ctx.stats, ds.cat_freqs, r, center, rng, cfg.variant));
    fs.labels = model.predict(fs.instances);
    fs.distance.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        fs.distance.push_back(normalized_distance(center, fs.instances[i], ctx));
        const bool in_field = fs.distance[i] <= r + 1e-12;
        if (fs.labels[i] == reference_class) {
            fs.friends.push_back(i);
            if (in_field) fs.in_field_friends.push_back(i);
        } else {
            fs.enemies.push_back(i);
            if (in_field) fs.in_field_enemies.push_back(i);
        }
    }
    return fs;
}

}  // namespace ape
