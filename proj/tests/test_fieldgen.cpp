#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ape/fieldgen.hpp"
#include "ape/geometry.hpp"
#include "ape/rng.hpp"
#include "ape/tabular.hpp"

#include <cmath>

using namespace ape;

namespace {

struct SignX1 : Classifier {
    int n_classes() const override { return 2; }
    std::vector<double> predict_proba_one(const Instance& inst) const override {
        return inst[0] >= 0 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
    }
};

struct ConstantModel : Classifier {
    int n_classes() const override { return 2; }
    std::vector<double> predict_proba_one(const Instance&) const override { return {1.0, 0.0}; }
};

Dataset numeric_dataset() {
    Dataset ds;
    ds.specs = {{"x1", FeatureKind::Numerical, {}}, {"x2", FeatureKind::Numerical, {}}};
    Rng rng(12);
    for (int i = 0; i < 500; ++i) ds.rows.push_back({rng.gaussian(), rng.gaussian()});
    ds.recompute_stats();
    return ds;
}

}  // namespace

TEST_CASE("uniform bounds follow the prose formulas") {
    FeatureStats st;
    st.stddev = 0.75;
    st.amplitude = 4.0;
    const double v = std::sqrt(12.0 * st.stddev);
    const auto pb = perturb_bounds(st, 0.1, NumericVariant::Prose);
    CHECK(pb.a == doctest::Approx(std::min(0.0, 0.1 * 4.0 - v)));
    CHECK(pb.b == doctest::Approx(pb.a + v));
    const auto lit = perturb_bounds(st, 0.1, NumericVariant::Literal);
    CHECK(lit.a == doctest::Approx(std::min(0.0, 0.1 * 4.0 - 0.75)));
    CHECK(lit.b == doctest::Approx(lit.a + 0.75));
}

TEST_CASE("emitted offsets match the uniform variance identity within 5%") {
    FeatureStats st;
    st.stddev = 1.3;
    st.amplitude = 5.0;
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}};
    const std::vector<FeatureStats> stats = {st};
    const std::vector<std::vector<double>> freqs = {{}};
    Rng rng(77);
    const double r = 0.01;  // near-zero radius: sigma-scaled interval
    const auto pb = perturb_bounds(st, r, NumericVariant::Prose);
    const double expected_var = (pb.b - pb.a) * (pb.b - pb.a) / 12.0;
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto z = sample_field_instance(specs, stats, freqs, r, {0.0}, rng);
        sum += z[0];
        sum2 += z[0] * z[0];
        CHECK(z[0] >= pb.a);
        CHECK(z[0] <= pb.b);
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(var == doctest::Approx(expected_var).epsilon(0.05));
}

TEST_CASE("sigma-zero features are never perturbed") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}};
    std::vector<FeatureStats> stats(1);
    stats[0].stddev = 0.0;
    stats[0].amplitude = 0.0;
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto z = sample_field_instance(specs, stats, {{}}, 0.5, {42.0}, rng);
        CHECK(z[0] == 42.0);
    }
}

TEST_CASE("categorical change rate tends to r/2") {
    const std::vector<FeatureSpec> specs = {{"c", FeatureKind::Categorical, {"a", "b", "c"}}};
    const std::vector<FeatureStats> stats(1);
    const std::vector<std::vector<double>> freqs = {{0.5, 0.3, 0.2}};
    Rng rng(41);
    const double r = 0.6;
    const int n = 100000;
    int changed = 0;
    for (int i = 0; i < n; ++i) {
        const auto z = sample_field_instance(specs, stats, freqs, r, {0.0}, rng);
        if (z[0] != 0.0) ++changed;
    }
    const double rate = static_cast<double>(changed) / n;
    const double expect = r / 2.0;
    const double sigma3 = 3.0 * std::sqrt(expect * (1.0 - expect) / n);
    CHECK(std::abs(rate - expect) <= sigma3);
}

TEST_CASE("forced change on a two-category feature picks the only alternative") {
    const std::vector<FeatureSpec> specs = {{"c", FeatureKind::Categorical, {"A", "B"}}};
    const std::vector<FeatureStats> stats(1);
    const std::vector<std::vector<double>> freqs = {{0.7, 0.3}};
    Rng rng(9);
    for (int i = 0; i < 20000; ++i) {
        const auto z = sample_field_instance(specs, stats, freqs, 1.0, {0.0}, rng);
        CHECK((z[0] == 0.0 || z[0] == 1.0));
    }
}

TEST_CASE("re-adjusted probabilities govern the replacement category") {
    const std::vector<FeatureSpec> specs = {{"c", FeatureKind::Categorical, {"a", "b", "c"}}};
    const std::vector<FeatureStats> stats(1);
    // From center "a", alternatives b and c have empirical 0.3 and 0.1,
    // re-adjusted to 0.75 / 0.25.
    const std::vector<std::vector<double>> freqs = {{0.6, 0.3, 0.1}};
    Rng rng(123);
    int to_b = 0, to_c = 0;
    for (int i = 0; i < 200000; ++i) {
        const auto z = sample_field_instance(specs, stats, freqs, 1.0, {0.0}, rng);
        if (z[0] == 1.0) ++to_b;
        if (z[0] == 2.0) ++to_c;
    }
    const double ratio = static_cast<double>(to_b) / static_cast<double>(to_b + to_c);
    CHECK(ratio == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("sample_field partitions friends and enemies and is deterministic") {
    const auto ds = numeric_dataset();
    SignX1 model;
    const Instance center = {0.0, 0.0};  // on the decision line
    const DistanceContext ctx = DistanceContext::from(ds, {0.5, 0.0});
    FieldConfig cfg;
    cfg.seed = 19;
    const auto a = sample_field(ds, model, ctx, 0.4, center, cfg, model.predict_one(center), 0);
    const auto b = sample_field(ds, model, ctx, 0.4, center, cfg, model.predict_one(center), 0);
    CHECK(a.instances == b.instances);
    CHECK(a.labels == b.labels);
    CHECK(a.friends.size() + a.enemies.size() == cfg.n);
    CHECK(!a.friends.empty());
    CHECK(!a.enemies.empty());
    CHECK(!a.in_field_friends.empty());
    CHECK(!a.in_field_enemies.empty());
    for (auto i : a.in_field_enemies) CHECK(a.distance[i] <= 0.4 + 1e-9);
}

TEST_CASE("constant classifier yields no enemies") {
    const auto ds = numeric_dataset();
    ConstantModel model;
    const DistanceContext ctx = DistanceContext::from(ds, {0.5, 0.0});
    FieldConfig cfg;
    cfg.seed = 7;
    const auto fs = sample_field(ds, model, ctx, 0.3, {0.0, 0.0}, cfg, 0, 0);
    CHECK(fs.enemies.empty());
    CHECK(fs.friends.size() == cfg.n);
}

TEST_CASE("radius outside (0,1] is rejected") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}};
    std::vector<FeatureStats> stats(1);
    stats[0].stddev = 1.0;
    Rng rng(1);
    CHECK_THROWS(sample_field_instance(specs, stats, {{}}, 0.0, {0.0}, rng));
    CHECK_THROWS(sample_field_instance(specs, stats, {{}}, 1.5, {0.0}, rng));
}
