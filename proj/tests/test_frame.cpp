#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "orthoview/frame.hpp"

using namespace orthoview;

TEST_SUITE_BEGIN("frame");

TEST_CASE("centroid basics") {
    PointCloud cloud;
    cloud.points.emplace_back(0, 0, 0);
    cloud.points.emplace_back(2, 0, 0);
    CHECK(centroid(cloud) == Eigen::Vector3d(1, 0, 0));

    PointCloud single;
    single.points.emplace_back(4, -5, 6);
    CHECK(centroid(single) == Eigen::Vector3d(4, -5, 6));

    CHECK_THROWS_AS(centroid(PointCloud{}), EmptyCloud);

    const PointCloud cube = generate_shape(ShapeSpec::box(2, 2, 2), 5000, 0.0, 1);
    CHECK(centroid(cube).norm() < 0.05);
}

TEST_CASE("box frame matches the closed-form covariance oracle") {
    const PointCloud cloud = generate_shape(ShapeSpec::box(4, 2, 1), 10000, 0.0, 7);
    const ReferenceFrame frame = compute_reference_frame(cloud);

    // axes are +-unit vectors along x, y, z in that order
    const Eigen::Vector3d expected = oracles::box_surface_covariance_diagonal(4, 2, 1);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(std::abs(frame.axes.col(i)[i]) - 1.0) < 0.01);
        CHECK(frame.eigenvalues[i] == doctest::Approx(expected[i]).epsilon(0.06));
    }
    CHECK(frame.eigenvalues[0] > frame.eigenvalues[1]);
    CHECK(frame.eigenvalues[1] > frame.eigenvalues[2]);
    CHECK(frame.origin.norm() < 0.05);
}

TEST_CASE("frame type invariants hold for assorted shapes") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        PointCloud cloud = generate_shape(ShapeSpec::lshape(2.5, 0.5), 2000, 0.005, seed);
        cloud = apply_transform(cloud, oracles::random_transform(rng));
        const ReferenceFrame frame = compute_reference_frame(cloud);
        const Eigen::Matrix3d gram = frame.axes.transpose() * frame.axes;
        CHECK((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(frame.axes.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(frame.eigenvalues[0] >= frame.eigenvalues[1]);
        CHECK(frame.eigenvalues[1] >= frame.eigenvalues[2]);
        CHECK(frame.eigenvalues[2] >= 0.0);
    }
}

TEST_CASE("transformed cloud: axes follow the rotation, eigenvalues scale by s^2") {
    const PointCloud cloud = generate_shape(ShapeSpec::box(4, 2, 1), 4000, 0.0, 3);
    const ReferenceFrame base = compute_reference_frame(cloud);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const RigidScaleTransform t = oracles::random_transform(rng);
        const ReferenceFrame moved = compute_reference_frame(apply_transform(cloud, t));
        for (int i = 0; i < 3; ++i) {
            // sign rule may flip columns; compare up to sign
            const double align =
                std::abs(moved.axes.col(i).dot(t.rotation * base.axes.col(i)));
            CHECK(align > 1.0 - 1e-6);
            CHECK(moved.eigenvalues[i] ==
                  doctest::Approx(base.eigenvalues[i] * t.scale * t.scale).epsilon(1e-9));
        }
    }
}

TEST_CASE("collinear and empty clouds are rejected") {
    PointCloud line;
    for (int i = 0; i < 10; ++i) line.points.emplace_back(static_cast<double>(i), 0, 0);
    CHECK_THROWS_AS(compute_reference_frame(line), DegenerateCloud);

    CHECK_THROWS_AS(compute_reference_frame(PointCloud{}), EmptyCloud);

    PointCloud all_same;
    for (int i = 0; i < 8; ++i) all_same.points.emplace_back(1, 2, 3);
    CHECK_THROWS_AS(compute_reference_frame(all_same), DegenerateCloud);
}

TEST_CASE("canonicalize: already canonical input is unchanged") {
    PointCloud cloud;
    cloud.points.emplace_back(1, 0.25, -0.5);
    cloud.points.emplace_back(-1, -0.25, 0.5);
    const ReferenceFrame identity_frame{Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity(),
                                        {3, 2, 1}};
    const PointCloud canonical = canonicalize(cloud, identity_frame);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK((canonical.points[i] - cloud.points[i]).norm() < 1e-9);
    }
}

TEST_CASE("canonicalize: offset cluster is centered and bounded") {
    std::mt19937_64 rng(23);
    PointCloud cloud = oracles::random_cloud(rng, 300);
    RigidScaleTransform shift;
    shift.translation = {5, 5, 5};
    shift.scale = 0.2;
    cloud = apply_transform(cloud, shift);

    const ReferenceFrame frame = compute_reference_frame(cloud);
    const PointCloud canonical = canonicalize(cloud, frame);
    double max_abs = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : canonical.points) {
        max_abs = std::max(max_abs, p.cwiseAbs().maxCoeff());
        mean += p;
    }
    CHECK(max_abs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((mean / static_cast<double>(canonical.size())).norm() < 1e-9);
}

TEST_CASE("canonicalization is invariant under rigid+scale transforms") {
    // Property holds for clouds with clear eigenvalue gaps (>= 1.15 both).
    const std::vector<PointCloud> shapes = {
        generate_shape(ShapeSpec::box(4, 2, 1), 1000, 0.0, 11),
        generate_shape(ShapeSpec::lshape(2.5, 0.5), 1000, 0.003, 12),
    };
    std::mt19937_64 rng(29);
    for (const auto& cloud : shapes) {
        const ReferenceFrame frame = compute_reference_frame(cloud);
        REQUIRE(frame.eigenvalues[0] / frame.eigenvalues[1] >= 1.15);
        REQUIRE(frame.eigenvalues[1] / frame.eigenvalues[2] >= 1.15);
        const PointCloud canonical = canonicalize(cloud, frame);

        for (int trial = 0; trial < 50; ++trial) {
            const RigidScaleTransform t = oracles::random_transform(rng);
            const PointCloud moved = apply_transform(cloud, t);
            const PointCloud canonical2 = canonicalize(moved, compute_reference_frame(moved));
            // nearest-neighbor re-association between the two canonical sets
            double worst = 0.0;
            for (const auto& p : canonical2.points) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& q : canonical.points) {
                    best = std::min(best, (p - q).squaredNorm());
                }
                worst = std::max(worst, best);
            }
            CHECK(std::sqrt(worst) < 1e-6);
        }
    }
}

TEST_SUITE_END();
