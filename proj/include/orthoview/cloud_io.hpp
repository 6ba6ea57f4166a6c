#ifndef ORTHOVIEW_CLOUD_IO_HPP
#define ORTHOVIEW_CLOUD_IO_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "orthoview/errors.hpp"

namespace orthoview {

/// A set of 3D points in meters. The raw perceptual input of the pipeline.
struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    std::string source_id;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Similarity transform: p -> scale * rotation * p + translation.
/// rotation must be orthonormal with det +1 (within 1e-9), scale > 0.
struct RigidScaleTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double scale = 1.0;

    /// Throws InvalidTransform if the invariants do not hold.
    void validate() const;

    /// Composition: (*this)(other(p)) == composed(p).
    RigidScaleTransform compose(const RigidScaleTransform& inner) const;

    static RigidScaleTransform identity() { return {}; }
};

enum class CloudFormat { pcd_ascii, ply_ascii, xyz };

/// Maps .pcd/.ply/.xyz (case-insensitive) to a format. Throws MalformedHeader otherwise.
CloudFormat format_from_extension(const std::filesystem::path& path);

/// Parses an ASCII point-cloud file body. Color/normal attributes are ignored.
/// Binary PCD/PLY variants are rejected with MalformedHeader.
PointCloud parse_cloud(std::string_view text, CloudFormat format,
                       std::string source_id = {});

/// Serializes a cloud so that parse_cloud(write_cloud(c, f), f) reproduces the
/// coordinates exactly (shortest round-trip decimal text).
std::string write_cloud(const PointCloud& cloud, CloudFormat format);

/// Convenience wrappers; format is chosen by file extension and source_id is
/// set from the filename.
PointCloud read_cloud_file(const std::filesystem::path& path);
void write_cloud_file(const PointCloud& cloud, const std::filesystem::path& path);

/// Synthetic test shapes, sampled uniformly on the surface, centered at the
/// origin and axis-aligned. Desk-scale stand-ins for dataset objects.
struct ShapeSpec {
    enum class Kind { box, cylinder, sphere, lshape };
    Kind kind = Kind::box;
    // box: dims = (wx, wy, wz) full extents.
    // cylinder: dims = (radius, height, unused).
    // sphere: dims = (radius, unused, unused).
    // lshape: dims = (arm, thickness, unused); two arms of length `arm`,
    //         square cross-section of side `thickness`.
    Eigen::Vector3d dims = Eigen::Vector3d::Ones();

    static ShapeSpec box(double wx, double wy, double wz) {
        return {Kind::box, {wx, wy, wz}};
    }
    static ShapeSpec cylinder(double radius, double height) {
        return {Kind::cylinder, {radius, height, 0.0}};
    }
    static ShapeSpec sphere(double radius) { return {Kind::sphere, {radius, 0.0, 0.0}}; }
    static ShapeSpec lshape(double arm, double thickness) {
        return {Kind::lshape, {arm, thickness, 0.0}};
    }
};

/// Deterministic in (spec, n_points, noise_sigma, seed). Requires all used
/// dimensions > 0 and n_points >= 50; isotropic Gaussian noise of std
/// noise_sigma is added per coordinate.
PointCloud generate_shape(const ShapeSpec& spec, std::size_t n_points,
                          double noise_sigma, std::uint64_t seed);

/// Applies p -> scale * rotation * p + translation to every point.
PointCloud apply_transform(const PointCloud& cloud, const RigidScaleTransform& t);

} // namespace orthoview

#endif
