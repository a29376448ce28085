#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ape/evalharness.hpp"
#include "ape/oracle.hpp"
#include "ape/rng.hpp"

#include <cmath>

using namespace ape;

namespace {

std::vector<std::vector<double>> gaussian_1d(std::size_t n, std::uint64_t seed, double mu = 0.0, double sigma = 1.0) {
    Rng rng(seed);
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({mu + sigma * rng.gaussian()});
    return pts;
}

Dataset gaussian_dataset2(std::uint64_t seed) {
    Dataset ds;
    ds.specs = {{"x1", FeatureKind::Numerical, {}}, {"x2", FeatureKind::Numerical, {}}};
    Rng rng(seed);
    for (int i = 0; i < 500; ++i) ds.rows.push_back({rng.gaussian(), rng.gaussian()});
    ds.recompute_stats();
    return ds;
}

}  // namespace

TEST_CASE("1-D gaussian samples pass the folding test in at least 90% of seeds") {
    int unimodal = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto res = folding_test(gaussian_1d(2000, s));
        if (res.unimodal && !res.degenerate) ++unimodal;
    }
    CHECK(unimodal >= 45);
}

TEST_CASE("well-separated 1-D mixture fails the folding test in at least 90% of seeds") {
    int multimodal = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(1000 + s);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 2000; ++i) {
            const double mu = i % 2 == 0 ? -5.0 : 5.0;
            pts.push_back({mu + 0.5 * rng.gaussian()});
        }
        const auto res = folding_test(pts);
        if (!res.unimodal) ++multimodal;
    }
    CHECK(multimodal >= 45);
}

TEST_CASE("folding statistic calibration: uniform sits at the frontier") {
    Rng rng(8);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 100000; ++i) pts.push_back({rng.uniform()});
    const auto res = folding_test(pts);
    CHECK(res.phi == doctest::Approx(1.0).epsilon(0.02));
    // And the gaussian lands near 4 * (1 - 2/pi).
    const auto gauss = folding_test(gaussian_1d(100000, 3));
    CHECK(gauss.phi == doctest::Approx(4.0 * (1.0 - 2.0 / 3.14159265358979)).epsilon(0.03));
}

TEST_CASE("degenerate folding inputs") {
    CHECK(folding_test({{1.0}, {2.0}}).degenerate);  // < 10 points
    std::vector<std::vector<double>> identical(50, {3.0, 3.0});
    const auto res = folding_test(identical);
    CHECK(res.unimodal);
    CHECK(res.degenerate);
}

TEST_CASE("separability index: far-apart single-class clusters give 1") {
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    Rng rng(4);
    for (int i = 0; i < 30; ++i) {
        pts.push_back({rng.gaussian() * 0.1, 0.0});
        labels.push_back(0);
        pts.push_back({10.0 + rng.gaussian() * 0.1, 0.0});
        labels.push_back(1);
    }
    CHECK(separability_index(pts, labels) == doctest::Approx(1.0));
}

TEST_CASE("alternating labels on the integer line give 0") {
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        pts.push_back({static_cast<double>(i)});
        labels.push_back(i % 2);
    }
    CHECK(separability_index(pts, labels) == doctest::Approx(0.0));
}

TEST_CASE("single class present gives 1") {
    std::vector<std::vector<double>> pts = {{0.0}, {1.0}, {2.0}};
    CHECK(separability_index(pts, {1, 1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("si is invariant under joint positive rescaling") {
    Rng rng(10);
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        pts.push_back({rng.gaussian(), rng.gaussian()});
        labels.push_back(pts.back()[0] > 0 ? 1 : 0);
    }
    const double base = separability_index(pts, labels);
    auto scaled = pts;
    for (auto& p : scaled)
        for (auto& v : p) v *= 37.5;
    CHECK(separability_index(scaled, labels) == doctest::Approx(base));
}

TEST_CASE("duplicate points with different labels count via the lowest-index tie break") {
    std::vector<std::vector<double>> pts = {{0.0}, {0.0}, {5.0}};
    // Point 0's nearest is point 1 (distance 0), and vice versa; point 2's
    // nearest is point 0 (lowest index among equidistant... here unique).
    const double si = separability_index(pts, {0, 1, 0});
    CHECK(si == doctest::Approx(1.0 / 3.0));
}

namespace {

OracleVerdict run_oracle_on(const Classifier& model, const Dataset& ds, const Instance& center, double r,
                            std::uint64_t seed, double si_threshold = 0.98, double folding_threshold = 0.85) {
    const DistanceContext ctx = DistanceContext::from(ds, ds.rows[0]);
    FieldConfig fc;
    fc.seed = seed;
    const int target_class = 1;
    const FieldSample fs = sample_field(ds, model, ctx, r, center, fc, target_class, 0);
    std::vector<Instance> real;
    for (const auto& row : ds.rows)
        if (normalized_distance(center, row, ctx) <= r) real.push_back(row);
    OracleConfig oc;
    oc.seed = seed;
    oc.si_threshold = si_threshold;
    oc.folding_threshold = folding_threshold;
    return ape_oracle(fs, real, model.predict(real), target_class, ctx, oc);
}

}  // namespace

TEST_CASE("linear boundary is judged suitable in a majority of seeds") {
    const PlantedLinearModel model({1.0, 0.0}, 0.0, 50.0);
    int yes = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto ds = gaussian_dataset2(900 + s);
        const auto v = run_oracle_on(model, ds, {0.0, 0.0}, 0.35, s);
        if (v.linear_suitable) ++yes;
    }
    CHECK(yes >= 40);
}

TEST_CASE("checkerboard pattern at the origin is judged unsuitable") {
    const CheckerboardModel model(1.4, 2);
    int no = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto ds = gaussian_dataset2(500 + s);
        const auto v = run_oracle_on(model, ds, {1.4, 1.4}, 0.9, s);
        if (!v.linear_suitable) ++no;
    }
    CHECK(no >= 40);
}

TEST_CASE("single-class sample returns a reason code") {
    struct Constant : Classifier {
        int n_classes() const override { return 2; }
        std::vector<double> predict_proba_one(const Instance&) const override { return {0.0, 1.0}; }
    } model;
    const auto ds = gaussian_dataset2(3);
    const auto v = run_oracle_on(model, ds, {0.0, 0.0}, 0.3, 1);
    CHECK(!v.linear_suitable);
    CHECK(v.reason == "no_enemies_in_field");
}

TEST_CASE("ablation switches bypass exactly one gate each") {
    const CheckerboardModel model(1.4, 2);  // bimodal enemies and mixed si
    const auto ds = gaussian_dataset2(42);
    const DistanceContext ctx = DistanceContext::from(ds, ds.rows[0]);
    FieldConfig fc;
    fc.seed = 5;
    const FieldSample fs = sample_field(ds, model, ctx, 0.9, {1.4, 1.4}, fc, 1, 0);
    std::vector<Instance> real;
    for (const auto& row : ds.rows)
        if (normalized_distance({1.4, 1.4}, row, ctx) <= 0.9) real.push_back(row);

    OracleConfig base;
    base.seed = 5;
    base.si_threshold = 0.98;
    base.folding_threshold = 0.85;
    auto with = [&](bool folding, bool thornton) {
        OracleConfig oc = base;
        oc.use_folding = folding;
        oc.use_thornton = thornton;
        return ape_oracle(fs, real, model.predict(real), 1, ctx, oc);
    };
    const auto full = with(true, true);
    const auto no_fold = with(false, true);
    const auto no_thorn = with(true, false);
    CHECK(!full.linear_suitable);
    // Disabling a gate can only flip the verdict when that gate was binding.
    if (!full.friends_unimodal || !full.enemies_unimodal) {
        CHECK(no_thorn.linear_suitable == (full.friends_unimodal && full.enemies_unimodal));
    }
    CHECK(no_fold.friends_unimodal);
    CHECK(no_fold.enemies_unimodal);
}

TEST_CASE("verdict is deterministic under a fixed seed") {
    const PlantedLinearModel model({1.0, -0.4}, 0.1, 30.0);
    const auto ds = gaussian_dataset2(77);
    const auto a = run_oracle_on(model, ds, {0.1, 0.2}, 0.4, 9);
    const auto b = run_oracle_on(model, ds, {0.1, 0.2}, 0.4, 9);
    CHECK(a.linear_suitable == b.linear_suitable);
    CHECK(a.separability_index == b.separability_index);
    CHECK(a.friends_evidence.phi == b.friends_evidence.phi);
}
