#ifndef ORTHOVIEW_DESCRIPTOR_HPP
#define ORTHOVIEW_DESCRIPTOR_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "orthoview/frame.hpp"
#include "orthoview/ortho.hpp"

namespace orthoview {

/// Fixed-length description of one view grid.
struct ViewFeature {
    std::vector<double> values;
    std::string descriptor_id;

    std::size_t dim() const { return values.size(); }
};

/// Pooled object representation, unit L2 norm.
struct GlobalFeature {
    std::vector<double> values;
    std::string descriptor_id;

    std::size_t dim() const { return values.size(); }
};

/// Parameters of the in-repo feature pipeline.
struct FeatureConfig {
    int resolution_w = 64;
    int resolution_h = 64;
    int blocks = 8; // B x B blocks per grid

    std::string descriptor_id() const;
    /// Throws BadConfig unless blocks divides both resolution axes.
    void validate() const;
};

/// Baseline "block-grad" descriptor: the grid is partitioned into B x B equal
/// blocks; each block contributes [mean, occupancy fraction, 8-bin
/// gradient-orientation histogram weighted by gradient magnitude]. Gradients
/// are central differences; cells on the grid border take a zero gradient
/// component where a neighbor would fall outside. D = B*B*10.
ViewFeature describe_view(const ViewGrid& grid, int blocks);

/// Reads one whitespace/comma-separated vector of exactly expected_dim reals.
/// descriptor_id is "external:<basename>".
ViewFeature load_external_view_feature(const std::filesystem::path& path,
                                       std::size_t expected_dim);

/// Element-wise maximum of the three view features, then L2 normalization.
/// Requires equal dimensions and a common descriptor. Per-view external
/// features ("external:*") pool into descriptor_id "external:d<D>".
GlobalFeature pool_max(const ViewFeature& front, const ViewFeature& top,
                       const ViewFeature& right);

/// Element-wise maximum without normalization; the algebraic core of pool_max.
std::vector<double> elementwise_max(const std::vector<double>& a,
                                    const std::vector<double>& b);

/// Everything the feature pipeline computes for one cloud. Kept around where
/// later stages (grasp templates) need the intermediate products.
struct PipelineResult {
    ReferenceFrame frame;
    double scale = 1.0;       // canonicalization scale (max abs coordinate)
    PointCloud canonical;
    std::array<ViewGrid, 3> grids; // front, top, right
    GlobalFeature feature;
};

/// compute_reference_frame -> canonicalize -> project_all -> describe_view x3
/// -> pool_max. Throws DegenerateCloud for collinear or isotropic clouds
/// (spheres and near-cubes have no usable reference frame).
PipelineResult run_pipeline(const PointCloud& cloud, const FeatureConfig& config);

/// The pooled feature alone.
GlobalFeature global_feature(const PointCloud& cloud, const FeatureConfig& config);

/// Writes/reads a feature as one line of whitespace-separated reals with
/// exact decimal round-trip.
std::string feature_to_text(const std::vector<double>& values);

} // namespace orthoview

#endif
