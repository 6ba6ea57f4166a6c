#ifndef ORTHOVIEW_GRASP_HPP
#define ORTHOVIEW_GRASP_HPP

#include <Eigen/Geometry>

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "orthoview/descriptor.hpp"

namespace orthoview {

/// End-effector position and orientation. Both learn-time (world) and stored
/// (object-frame) poses use this type.
struct GripperPose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity(); // (w,x,y,z)

    /// Throws PoseOutsideObject-unrelated InvalidTransform on a non-unit quaternion.
    void validate() const;
};

/// One demonstrated grasp: affordance label, pose in the scale-normalized
/// object frame, the object's global feature, and a local descriptor of the
/// front-view window around the grasp projection.
struct GraspTemplate {
    std::string affordance_label;
    GripperPose pose; // object frame, bounding-cube scaled
    GlobalFeature global_feature;
    ViewFeature local_feature;
    int grid_row = 0; // grasp projection cell in the front view
    int grid_col = 0;
};

struct GraspMatch {
    std::string affordance_label;
    GripperPose world_pose;
    double distance = 0.0;   // combined global/local distance of the best template
    double similarity = 0.0; // 1 - distance
};

/// Side length of the local front-view window around the grasp projection.
inline constexpr int kLocalWindow = 16;

/// Grasp template store. Learn from demonstrations on non-degenerate clouds,
/// retrieve a world-frame grasp for familiar query objects. Single writer,
/// concurrent readers.
class TemplateStore {
public:
    TemplateStore() = default;
    explicit TemplateStore(FeatureConfig config);

    /// Converts world_pose into the object reference frame, computes global +
    /// local features, appends a template. Throws DegenerateCloud and
    /// PoseOutsideObject (object-frame position outside [-1.5, 1.5]^3).
    void learn(const PointCloud& cloud, const std::string& affordance_label,
               const GripperPose& world_pose);

    /// Ranks templates by d = global_weight * cosine(global) +
    /// (1 - global_weight) * cosine(local); the local term re-describes the
    /// query's front view at the template's stored projection cell. Returns
    /// nullopt (NotFamiliar) when the best distance exceeds tau_familiar,
    /// otherwise maps the winning object-frame pose into the query's world
    /// frame. Throws EmptyStore, DegenerateCloud.
    std::optional<GraspMatch> recognize(const PointCloud& cloud, double tau_familiar) const;

    std::size_t size() const { return templates_.size(); }
    bool empty() const { return templates_.empty(); }
    const std::vector<GraspTemplate>& templates() const { return templates_; }
    const FeatureConfig& config() const { return config_; }
    double global_weight() const { return global_weight_; }
    void set_global_weight(double w); // throws ConfigInvalid outside [0,1]

    nlohmann::json to_json() const;
    static TemplateStore from_json(const nlohmann::json& doc);

private:
    FeatureConfig config_;
    double global_weight_ = 0.5;
    std::vector<GraspTemplate> templates_;
};

/// Block-grad descriptor of the kLocalWindow x kLocalWindow sub-grid of
/// `grid` centered on (row, col), zero-padded outside the grid.
ViewFeature local_window_feature(const ViewGrid& grid, int row, int col, int blocks);

} // namespace orthoview

#endif
