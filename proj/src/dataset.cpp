#include "orthoview/dataset.hpp"

#include <algorithm>

#include "orthoview/detail/rng.hpp"

namespace orthoview {

namespace fs = std::filesystem;

std::map<std::string, std::vector<GlobalFeature>> load_feature_directory(
    const fs::path& root, const FeatureConfig& config, bool external,
    std::size_t external_dim) {
    if (!fs::is_directory(root)) {
        throw ConfigInvalid("dataset root '" + root.string() + "' is not a directory");
    }
    std::vector<fs::path> category_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) category_dirs.push_back(entry.path());
    }
    std::sort(category_dirs.begin(), category_dirs.end());

    std::map<std::string, std::vector<GlobalFeature>> out;
    for (const auto& dir : category_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());

        std::vector<GlobalFeature>& features = out[dir.filename().string()];
        if (external) {
            for (const auto& file : files) {
                const std::string name = file.filename().string();
                const std::string suffix = ".front.feat";
                if (name.size() <= suffix.size() || !name.ends_with(suffix)) continue;
                const std::string stem = name.substr(0, name.size() - suffix.size());
                const ViewFeature front = load_external_view_feature(file, external_dim);
                const ViewFeature top =
                    load_external_view_feature(dir / (stem + ".top.feat"), external_dim);
                const ViewFeature right =
                    load_external_view_feature(dir / (stem + ".right.feat"), external_dim);
                features.push_back(pool_max(front, top, right));
            }
        } else {
            for (const auto& file : files) {
                const std::string ext = file.extension().string();
                if (ext != ".pcd" && ext != ".ply" && ext != ".xyz") continue;
                features.push_back(global_feature(read_cloud_file(file), config));
            }
        }
        if (features.empty()) out.erase(dir.filename().string());
    }
    return out;
}

namespace {

struct CategoryRecipe {
    const char* name;
    ShapeSpec spec;
};

// Aspect ratios are chosen pairwise distinct; the features are scale
// invariant, so only shape separates categories.
const std::vector<CategoryRecipe>& recipes() {
    static const std::vector<CategoryRecipe> r = {
        {"box_slab", ShapeSpec::box(4.0, 2.0, 1.0)},
        {"box_plank", ShapeSpec::box(10.0, 3.0, 1.0)},
        {"box_tile", ShapeSpec::box(8.0, 5.0, 1.0)},
        {"box_beam", ShapeSpec::box(12.0, 2.0, 1.5)},
        {"cyl_rod", ShapeSpec::cylinder(1.0, 8.0)},
        {"cyl_can", ShapeSpec::cylinder(1.0, 2.5)},
        {"cyl_disk", ShapeSpec::cylinder(3.0, 1.0)},
        {"l_bracket", ShapeSpec::lshape(3.0, 0.9)},
        {"l_rail", ShapeSpec::lshape(4.0, 0.4)},
        {"l_corner", ShapeSpec::lshape(2.0, 0.8)},
    };
    return r;
}

} // namespace

std::map<std::string, std::vector<PointCloud>> synthetic_category_clouds(
    std::size_t n_categories, std::size_t n_instances, std::size_t points_per_instance,
    std::uint64_t seed) {
    if (n_categories < 1 || n_categories > recipes().size()) {
        throw ConfigInvalid("synthetic dataset supports 1.." +
                            std::to_string(recipes().size()) + " categories");
    }
    std::map<std::string, std::vector<PointCloud>> out;
    for (std::size_t c = 0; c < n_categories; ++c) {
        const CategoryRecipe& recipe = recipes()[c];
        auto& instances = out[recipe.name];
        instances.reserve(n_instances);
        for (std::size_t i = 0; i < n_instances; ++i) {
            const std::uint64_t inst_seed =
                detail::mix_seed(seed ^ detail::mix_seed((c << 20) + i + 1));
            std::mt19937_64 jitter_rng(inst_seed);
            ShapeSpec spec = recipe.spec;
            const double size_factor = detail::uniform(jitter_rng, 0.8, 1.25);
            for (int d = 0; d < 3; ++d) {
                spec.dims[d] *= size_factor * detail::uniform(jitter_rng, 0.95, 1.05);
            }
            const double noise = 0.01 * spec.dims.maxCoeff();
            instances.push_back(
                generate_shape(spec, points_per_instance, noise, detail::mix_seed(inst_seed)));
            instances.back().source_id =
                std::string(recipe.name) + "_" + std::to_string(i);
        }
    }
    return out;
}

std::map<std::string, std::vector<GlobalFeature>> synthetic_category_features(
    std::size_t n_categories, std::size_t n_instances, std::size_t points_per_instance,
    std::uint64_t seed, const FeatureConfig& config) {
    std::map<std::string, std::vector<GlobalFeature>> out;
    for (const auto& [label, clouds] :
         synthetic_category_clouds(n_categories, n_instances, points_per_instance, seed)) {
        auto& features = out[label];
        features.reserve(clouds.size());
        for (const auto& cloud : clouds) features.push_back(global_feature(cloud, config));
    }
    return out;
}

std::map<std::string, std::vector<GlobalFeature>> confusion_features(
    std::size_t n_categories, std::size_t n_instances, const FeatureConfig& config) {
    const PointCloud cloud = generate_shape(ShapeSpec::box(4.0, 2.0, 1.0), 1500, 0.0, 99);
    const GlobalFeature feature = global_feature(cloud, config);
    std::map<std::string, std::vector<GlobalFeature>> out;
    for (std::size_t c = 0; c < n_categories; ++c) {
        out["clone_" + std::string(1, static_cast<char>('a' + c))] =
            std::vector<GlobalFeature>(n_instances, feature);
    }
    return out;
}

} // namespace orthoview
