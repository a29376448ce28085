#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ape/geometry.hpp"
#include "ape/rng.hpp"
#include "ape/tabular.hpp"

#include <cmath>

using namespace ape;

namespace {

DistanceContext numeric_ctx(std::vector<double> sigmas) {
    DistanceContext ctx;
    for (std::size_t j = 0; j < sigmas.size(); ++j) {
        ctx.specs.push_back({"x" + std::to_string(j), FeatureKind::Numerical, {}});
        FeatureStats st;
        st.stddev = sigmas[j];
        ctx.stats.push_back(st);
    }
    ctx.delta = 1.0;
    return ctx;
}

}  // namespace

TEST_CASE("identity gives zero distance") {
    const auto ctx = numeric_ctx({2.0, 3.0});
    CHECK(standardized_distance({1.0, 2.0}, {1.0, 2.0}, ctx) == 0.0);
}

TEST_CASE("single numerical feature, sigma 2, values 1 and 5") {
    const auto ctx = numeric_ctx({2.0});
    CHECK(standardized_distance({1.0}, {5.0}, ctx) == doctest::Approx(2.0));
}

TEST_CASE("one differing categorical contributes sqrt(2)") {
    DistanceContext ctx;
    ctx.specs = {{"sex", FeatureKind::Categorical, {"F", "M"}}};
    ctx.stats.resize(1);
    ctx.delta = 1.0;
    CHECK(standardized_distance({0.0}, {1.0}, ctx) == doctest::Approx(std::sqrt(2.0)));
    CHECK(standardized_distance({1.0}, {1.0}, ctx) == 0.0);
}

TEST_CASE("zero-sigma feature: equal values contribute nothing, differing flag infinity") {
    const auto ctx = numeric_ctx({0.0, 1.0});
    CHECK(standardized_distance({5.0, 1.0}, {5.0, 3.0}, ctx) == doctest::Approx(2.0));
    CHECK(std::isinf(standardized_distance({5.0, 1.0}, {6.0, 1.0}, ctx)));
}

TEST_CASE("symmetry and monotonicity") {
    const auto ctx = numeric_ctx({1.5, 0.5});
    Rng rng(99);
    for (int it = 0; it < 200; ++it) {
        Instance a = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
        Instance b = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double d_ab = standardized_distance(a, b, ctx);
        CHECK(d_ab == doctest::Approx(standardized_distance(b, a, ctx)));
        CHECK(d_ab >= 0.0);
        // Increasing one coordinate gap never decreases the distance.
        Instance b2 = b;
        b2[0] = a[0] + 2.0 * (b[0] - a[0]);
        CHECK(standardized_distance(a, b2, ctx) >= d_ab - 1e-12);
    }
}

TEST_CASE("mahalanobis: centered point gives zero") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}};
    const std::vector<Instance> sample = {{0.0}, {2.0}};
    CHECK(mahalanobis_distance({1.0}, sample, specs) == doctest::Approx(0.0));
}

TEST_CASE("mahalanobis: 1-D sample {0,2}, point 3 gives 2") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}};
    const std::vector<Instance> sample = {{0.0}, {2.0}};
    CHECK(mahalanobis_distance({3.0}, sample, specs) == doctest::Approx(2.0));
}

TEST_CASE("mahalanobis is invariant under joint rescaling") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}, {"y", FeatureKind::Numerical, {}}};
    std::vector<Instance> sample = {{0.0, 1.0}, {2.0, 4.0}, {1.0, 2.0}, {3.0, 0.0}};
    const Instance pt = {2.5, 3.0};
    const double base = mahalanobis_distance(pt, sample, specs);
    std::vector<Instance> scaled = sample;
    Instance pt10 = pt;
    for (auto& s : scaled)
        for (auto& v : s) v *= 10.0;
    for (auto& v : pt10) v *= 10.0;
    CHECK(mahalanobis_distance(pt10, scaled, specs) == doctest::Approx(base));
}

TEST_CASE("mahalanobis needs two points") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}};
    CHECK_THROWS(mahalanobis_distance({1.0}, {{1.0}}, specs));
}

TEST_CASE("zero-variance dimension uses the floor only when the point deviates") {
    const std::vector<FeatureSpec> specs = {{"x", FeatureKind::Numerical, {}}, {"y", FeatureKind::Numerical, {}}};
    const std::vector<Instance> sample = {{1.0, 0.0}, {1.0, 2.0}};
    CHECK(mahalanobis_distance({1.0, 1.0}, sample, specs) == doctest::Approx(0.0));
    CHECK(mahalanobis_distance({1.1, 1.0}, sample, specs) > 1e4);  // variance floor kicks in
}
