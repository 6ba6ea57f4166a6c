#include <doctest.h>

#include <cstring>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "orthoview/memory.hpp"

using namespace orthoview;

TEST_SUITE_BEGIN("memory");

namespace {

GlobalFeature gf(std::vector<double> values, std::string id = "test") {
    GlobalFeature f;
    f.values = std::move(values);
    f.descriptor_id = std::move(id);
    return f;
}

} // namespace

TEST_CASE("teach: creation, appends, dimension checks") {
    CategoryMemory memory;
    CHECK(memory.empty());
    memory.teach("mug", gf({1, 0}));
    CHECK(memory.category_count() == 1);
    CHECK(memory.instances("mug").size() == 1);

    memory.teach("mug", gf({1, 0}));
    CHECK(memory.instances("mug").size() == 2);

    CHECK_THROWS_AS(memory.teach("bowl", gf({1, 0, 0})), DimensionMismatch);
    CHECK_THROWS_AS(memory.teach("bowl", gf({1, 0}, "other")), DimensionMismatch);
}

TEST_CASE("classify: direct arithmetic and tie-breaking") {
    CategoryMemory memory;
    memory.teach("A", gf({1, 0}));
    memory.teach("B", gf({0, 1}));

    const auto pred = memory.classify(gf({0.9, 0.1}), Metric::euclidean);
    REQUIRE(pred.has_value());
    CHECK(pred->label == "A");
    CHECK(pred->distance == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    REQUIRE(pred->runner_up_distance.has_value());
    CHECK(*pred->runner_up_distance == doctest::Approx(std::sqrt(0.81 + 0.81)).epsilon(1e-12));
    CHECK(pred->distance <= *pred->runner_up_distance);

    // equidistant query: lexicographically smallest label wins
    const auto tie = memory.classify(gf({0.5, 0.5}), Metric::euclidean);
    REQUIRE(tie.has_value());
    CHECK(tie->label == "A");

    CHECK(!CategoryMemory{}.classify(gf({0, 1}), Metric::euclidean).has_value());
    CHECK_THROWS_AS(memory.classify(gf({1, 2, 3}), Metric::euclidean), DimensionMismatch);
}

TEST_CASE("classify: tau_unknown rejects distant queries") {
    CategoryMemory memory;
    memory.teach("A", gf({1, 0}));
    CHECK(memory.classify(gf({0, 1}), Metric::euclidean, 0.5) == std::nullopt);
    CHECK(memory.classify(gf({1, 0}), Metric::euclidean, 0.5).has_value());
    // single category: no runner-up
    CHECK(!memory.classify(gf({1, 0}), Metric::euclidean)->runner_up_distance.has_value());
}

TEST_CASE("distance definitions") {
    const std::vector<double> f = {0.6, 0.8};
    CHECK(feature_distance(f, f, Metric::euclidean) == 0.0);
    CHECK(feature_distance(f, f, Metric::cosine) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(feature_distance(f, f, Metric::chisquare) == 0.0);

    const std::vector<double> g = {0.8, -0.6}; // orthogonal unit vector
    CHECK(feature_distance(f, g, Metric::cosine) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> h = {-0.6, -0.8};
    CHECK(feature_distance(f, h, Metric::cosine) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("forget removes exactly one category") {
    CategoryMemory memory;
    memory.teach("A", gf({1, 0}));
    memory.teach("B", gf({0, 1}));
    memory.forget("A");
    CHECK(!memory.contains("A"));
    CHECK(memory.contains("B"));
    CHECK(memory.creation_order() == std::vector<std::string>{"B"});
    CHECK_THROWS_AS(memory.forget("C"), UnknownLabel);

    memory.teach("A", gf({1, 0}));
    memory.forget("A");
    memory.forget("B");
    CHECK(!memory.classify(gf({1, 0}), Metric::euclidean).has_value()); // Unknown
}

TEST_CASE("stats") {
    CategoryMemory memory;
    CHECK(memory.stats().per_label.empty());
    CHECK(memory.stats().avg_instances_per_category == 0.0);

    memory.teach("A", gf({1, 0}));
    CHECK(memory.stats().avg_instances_per_category == 1.0);

    memory.teach("A", gf({1, 0}));
    memory.teach("B", gf({0, 1}));
    memory.teach("B", gf({0, 1}));
    memory.teach("B", gf({0, 1}));
    memory.teach("B", gf({0, 1}));
    const MemoryStats s = memory.stats();
    CHECK(s.per_label.at("A") == 2);
    CHECK(s.per_label.at("B") == 4);
    CHECK(s.total_instances == 6);
    CHECK(s.avg_instances_per_category == 3.0);
}

TEST_CASE("classify equals the brute-force oracle on random problems") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 2 + rng() % 16;
        const std::size_t n_cats = 1 + rng() % 5;
        CategoryMemory memory;
        std::vector<std::pair<std::string, std::vector<double>>> flat;
        for (std::size_t c = 0; c < n_cats; ++c) {
            const std::string label(1, static_cast<char>('a' + c));
            const std::size_t n_inst = 1 + rng() % 6;
            for (std::size_t i = 0; i < n_inst; ++i) {
                std::vector<double> v(dim);
                for (auto& x : v) x = uni(rng);
                flat.emplace_back(label, v);
                memory.teach(label, gf(std::move(v)));
            }
        }
        std::vector<double> q(dim);
        for (auto& x : q) x = uni(rng);
        const Metric metric = static_cast<Metric>(rng() % 3);
        const double tau =
            (trial % 4 == 0) ? uni(rng) : std::numeric_limits<double>::infinity();

        const auto mine = memory.classify(gf(q), metric, tau);
        const auto ref = oracles::brute_force_classify(flat, q, metric, tau);
        REQUIRE(mine.has_value() == ref.has_value());
        if (mine) {
            CHECK(mine->label == ref->label);
            CHECK(mine->distance == ref->distance);
            REQUIRE(mine->runner_up_distance.has_value() == ref->runner_up.has_value());
            if (mine->runner_up_distance) {
                CHECK(*mine->runner_up_distance == *ref->runner_up);
            }
        }
    }
}

TEST_CASE("teaching never rewrites stored features") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    CategoryMemory memory;
    for (int c = 0; c < 4; ++c) {
        for (int i = 0; i < 3; ++i) {
            std::vector<double> v(8);
            for (auto& x : v) x = uni(rng);
            memory.teach("cat" + std::to_string(c), gf(std::move(v)));
        }
    }
    // byte-level snapshot of every stored vector
    std::vector<std::vector<unsigned char>> before;
    for (const auto& label : memory.creation_order()) {
        for (const auto& inst : memory.instances(label)) {
            std::vector<unsigned char> bytes(inst.values.size() * sizeof(double));
            std::memcpy(bytes.data(), inst.values.data(), bytes.size());
            before.push_back(std::move(bytes));
        }
    }
    std::vector<double> v(8);
    for (auto& x : v) x = uni(rng);
    memory.teach("brand_new", gf(std::move(v)));

    std::size_t idx = 0;
    for (const auto& label : memory.creation_order()) {
        if (label == "brand_new") continue;
        for (const auto& inst : memory.instances(label)) {
            std::vector<unsigned char> bytes(inst.values.size() * sizeof(double));
            std::memcpy(bytes.data(), inst.values.data(), bytes.size());
            CHECK(bytes == before[idx]);
            ++idx;
        }
    }
    CHECK(idx == before.size());
}

TEST_CASE("snapshot json round trip is exact") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    CategoryMemory memory;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 2; ++i) {
            std::vector<double> v(5);
            for (auto& x : v) x = uni(rng) * std::pow(10.0, static_cast<int>(rng() % 8) - 4);
            memory.teach("cat" + std::to_string(c), gf(std::move(v), "snap"));
        }
    }
    const std::string text = memory.to_json().dump();
    const CategoryMemory back = CategoryMemory::from_json(nlohmann::json::parse(text));
    CHECK(back.creation_order() == memory.creation_order());
    CHECK(back.descriptor_id() == memory.descriptor_id());
    for (const auto& label : memory.creation_order()) {
        const auto& a = memory.instances(label);
        const auto& b = back.instances(label);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].values == b[i].values); // exact decimal round trip
        }
    }

    CHECK_THROWS_AS(CategoryMemory::from_json(nlohmann::json::object()), ConfigInvalid);
}

TEST_CASE("teach then classify returns the label at distance zero") {
    CategoryMemory memory;
    const GlobalFeature f = gf({0.36, 0.48, 0.8});
    memory.teach("thing", f);
    for (Metric metric : {Metric::euclidean, Metric::cosine, Metric::chisquare}) {
        const auto pred = memory.classify(f, metric);
        REQUIRE(pred.has_value());
        CHECK(pred->label == "thing");
        CHECK(pred->distance == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_SUITE_END();
