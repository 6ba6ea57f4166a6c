#ifndef ORTHOVIEW_DATASET_HPP
#define ORTHOVIEW_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "orthoview/protocol.hpp"

namespace orthoview {

/// Loads `<root>/<category>/<instance>.<ext>` into per-category features.
/// Directories and files are visited in sorted order. With external = true,
/// instances are triples `<stem>.front.feat`, `<stem>.top.feat`,
/// `<stem>.right.feat` of dimension external_dim, pooled element-wise;
/// otherwise every .pcd/.ply/.xyz cloud goes through the feature pipeline.
std::map<std::string, std::vector<GlobalFeature>> load_feature_directory(
    const std::filesystem::path& root, const FeatureConfig& config,
    bool external = false, std::size_t external_dim = 0);

/// Synthetic open-ended category dataset: up to 10 well-separated shape
/// recipes (box/cylinder/L-profile families with distinct aspect ratios).
/// Per-instance variation is a fresh surface sample, mild per-axis aspect
/// jitter, a global size factor and additive noise. Deterministic in seed.
std::map<std::string, std::vector<PointCloud>> synthetic_category_clouds(
    std::size_t n_categories, std::size_t n_instances, std::size_t points_per_instance,
    std::uint64_t seed);

/// Feature-space version of the same dataset.
std::map<std::string, std::vector<GlobalFeature>> synthetic_category_features(
    std::size_t n_categories, std::size_t n_instances, std::size_t points_per_instance,
    std::uint64_t seed, const FeatureConfig& config);

/// Dataset where every instance of every category is the identical cloud, so
/// no classifier can separate the labels. Exercises breakpoint termination.
std::map<std::string, std::vector<GlobalFeature>> confusion_features(
    std::size_t n_categories, std::size_t n_instances, const FeatureConfig& config);

} // namespace orthoview

#endif
