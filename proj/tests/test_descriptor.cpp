#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "orthoview/descriptor.hpp"

using namespace orthoview;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("descriptor");

namespace {

ViewGrid make_grid(int w, int h, double fill) {
    ViewGrid grid;
    grid.view = View::front;
    grid.width = w;
    grid.height = h;
    grid.values.assign(static_cast<std::size_t>(w) * h, fill);
    return grid;
}

fs::path temp_file(const std::string& name, const std::string& body) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::trunc);
    out << body;
    return path;
}

} // namespace

TEST_CASE("all-zero grid gives an all-zero 640-dim feature") {
    const ViewFeature f = describe_view(make_grid(64, 64, 0.0), 8);
    CHECK(f.dim() == 640);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("constant grid: mean c, occupancy 1, zero gradient bins") {
    const double c = 0.37;
    const ViewFeature f = describe_view(make_grid(64, 64, c), 8);
    REQUIRE(f.dim() == 640);
    for (std::size_t block = 0; block < 64; ++block) {
        const double* vals = f.values.data() + block * 10;
        CHECK(vals[0] == doctest::Approx(c).epsilon(1e-12));
        CHECK(vals[1] == 1.0);
        for (int bin = 0; bin < 8; ++bin) CHECK(vals[2 + bin] == 0.0);
    }
}

TEST_CASE("describe_view matches the reference implementation exactly") {
    const PointCloud box = generate_shape(ShapeSpec::box(4, 2, 1), 3000, 0.005, 3);
    const auto grids =
        project_all(canonicalize(box, compute_reference_frame(box)), 64, 64);
    for (const auto& grid : grids) {
        const ViewFeature fast = describe_view(grid, 8);
        const std::vector<double> slow = oracles::reference_block_descriptor(grid, 8);
        REQUIRE(fast.values.size() == slow.size());
        for (std::size_t i = 0; i < slow.size(); ++i) {
            CHECK(fast.values[i] == slow[i]); // bitwise
        }
    }
}

TEST_CASE("describe_view rejects block counts that do not divide the grid") {
    CHECK_THROWS_AS(describe_view(make_grid(64, 64, 0.0), 7), BadConfig);
    CHECK_THROWS_AS(describe_view(make_grid(60, 64, 0.0), 8), BadConfig);
}

TEST_CASE("load_external_view_feature") {
    const fs::path good = temp_file("ov_feat_good.feat", "1 2 3\n");
    const ViewFeature f = load_external_view_feature(good, 3);
    CHECK(f.values == std::vector<double>{1, 2, 3});
    CHECK(f.descriptor_id == "external:ov_feat_good");

    const fs::path commas = temp_file("ov_feat_commas.feat", "0.5,1.5, 2.5\n");
    CHECK(load_external_view_feature(commas, 3).values == std::vector<double>{0.5, 1.5, 2.5});

    const fs::path two = temp_file("ov_feat_two.feat", "1 2\n");
    CHECK_THROWS_AS(load_external_view_feature(two, 3), DimensionMismatch);

    const fs::path nan_file = temp_file("ov_feat_nan.feat", "1 nan 3\n");
    CHECK_THROWS_AS(load_external_view_feature(nan_file, 3), NonFiniteValue);
}

TEST_CASE("pool_max arithmetic") {
    auto vf = [](std::vector<double> v) {
        ViewFeature f;
        f.values = std::move(v);
        f.descriptor_id = "test";
        return f;
    };
    const GlobalFeature pooled = pool_max(vf({1, 0, 2}), vf({0, 3, 1}), vf({1, 1, 1}));
    const double norm = std::sqrt(14.0);
    CHECK(pooled.values[0] == doctest::Approx(1.0 / norm).epsilon(1e-12));
    CHECK(pooled.values[1] == doctest::Approx(3.0 / norm).epsilon(1e-12));
    CHECK(pooled.values[2] == doctest::Approx(2.0 / norm).epsilon(1e-12));

    const GlobalFeature same = pool_max(vf({3, 4}), vf({3, 4}), vf({3, 4}));
    CHECK(same.values[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(same.values[1] == doctest::Approx(0.8).epsilon(1e-12));

    CHECK_THROWS_AS(pool_max(vf({0, 0}), vf({0, 0}), vf({0, 0})), ZeroVector);
    CHECK_THROWS_AS(pool_max(vf({1}), vf({1, 2}), vf({1})), DimensionMismatch);
}

TEST_CASE("pool_max descriptor identity rules") {
    auto vf = [](const std::string& id) {
        ViewFeature f;
        f.values = {1, 2};
        f.descriptor_id = id;
        return f;
    };
    CHECK_THROWS_AS(pool_max(vf("a"), vf("b"), vf("a")), DimensionMismatch);
    const GlobalFeature ext =
        pool_max(vf("external:m1.front"), vf("external:m1.top"), vf("external:m1.right"));
    CHECK(ext.descriptor_id == "external:d2");
}

TEST_CASE("pool algebra properties on random triples") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a(16), b(16), c(16);
        for (int i = 0; i < 16; ++i) {
            a[i] = uni(rng);
            b[i] = uni(rng);
            c[i] = uni(rng);
        }
        const auto ab_c = elementwise_max(elementwise_max(a, b), c);
        const auto a_bc = elementwise_max(a, elementwise_max(b, c));
        const auto ba_c = elementwise_max(elementwise_max(b, a), c);
        CHECK(ab_c == a_bc); // associative
        CHECK(ab_c == ba_c); // commutative
        CHECK(elementwise_max(a, a) == a); // idempotent
        for (int i = 0; i < 16; ++i) {
            CHECK(ab_c[i] >= a[i]);
            CHECK(ab_c[i] >= b[i]);
            CHECK(ab_c[i] >= c[i]);
        }
    }
}

TEST_CASE("global_feature: unit norm, determinism, degenerate rejection") {
    const FeatureConfig config;
    const PointCloud box = generate_shape(ShapeSpec::box(4, 2, 1), 3000, 0.005, 5);

    const GlobalFeature f1 = global_feature(box, config);
    const GlobalFeature f2 = global_feature(box, config);
    CHECK(f1.values == f2.values); // bit-for-bit
    CHECK(f1.descriptor_id == "block-grad:r64x64:b8");

    double sq = 0.0;
    for (double v : f1.values) sq += v * v;
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-9));

    const PointCloud sphere = generate_shape(ShapeSpec::sphere(1), 3000, 0.002, 5);
    CHECK_THROWS_AS(global_feature(sphere, config), DegenerateCloud);
}

TEST_CASE("pose and scale invariance smoke check") {
    const FeatureConfig config;
    const PointCloud shape = generate_shape(ShapeSpec::lshape(2, 0.6), 5000, 0.005, 9);
    const GlobalFeature base = global_feature(shape, config);

    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        const PointCloud moved = apply_transform(shape, oracles::random_transform(rng));
        const GlobalFeature f = global_feature(moved, config);
        double dot = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i) dot += f.values[i] * base.values[i];
        CHECK(1.0 - dot < 0.05);
    }
}

TEST_CASE("feature_to_text round trips through the external loader") {
    std::vector<double> values = {1.0, -0.25, 3.5e-9, 123456.789012345};
    const fs::path path = temp_file("ov_feat_rt.feat", feature_to_text(values));
    const ViewFeature back = load_external_view_feature(path, values.size());
    CHECK(back.values == values);
}

TEST_SUITE_END();
