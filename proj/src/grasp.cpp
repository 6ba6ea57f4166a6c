#include "orthoview/grasp.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace orthoview {

void GripperPose::validate() const {
    if (!position.allFinite()) throw InvalidTransform("gripper position is not finite");
    if (std::abs(orientation.norm() - 1.0) > 1e-9) {
        throw InvalidTransform("gripper orientation quaternion is not unit");
    }
}

TemplateStore::TemplateStore(FeatureConfig config) : config_(config) {
    config_.validate();
    if (kLocalWindow % config_.blocks != 0) {
        throw BadConfig("grasp store: blocks must divide the local window size");
    }
}

void TemplateStore::set_global_weight(double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigInvalid("global_weight must be in [0, 1]");
    global_weight_ = w;
}

ViewFeature local_window_feature(const ViewGrid& grid, int row, int col, int blocks) {
    ViewGrid window;
    window.view = grid.view;
    window.width = kLocalWindow;
    window.height = kLocalWindow;
    window.values.assign(static_cast<std::size_t>(kLocalWindow) * kLocalWindow, 0.0);
    const int half = kLocalWindow / 2;
    for (int r = 0; r < kLocalWindow; ++r) {
        const int gr = row - half + 1 + r;
        if (gr < 0 || gr >= grid.height) continue;
        for (int c = 0; c < kLocalWindow; ++c) {
            const int gc = col - half + 1 + c;
            if (gc < 0 || gc >= grid.width) continue;
            window.at(r, c) = grid.at(gr, gc);
        }
    }
    return describe_view(window, blocks);
}

namespace {

/// Cosine distance tolerant of non-unit and zero vectors: two zero vectors are
/// identical (0), a single zero vector is maximally unrelated (1).
double cosine_distance_general(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 && nb == 0.0) return 0.0;
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

void TemplateStore::learn(const PointCloud& cloud, const std::string& affordance_label,
                          const GripperPose& world_pose) {
    world_pose.validate();
    const PipelineResult pipeline = run_pipeline(cloud, config_);

    GraspTemplate tpl;
    tpl.affordance_label = affordance_label;
    tpl.pose.position = pipeline.frame.axes.transpose() *
                        (world_pose.position - pipeline.frame.origin) / pipeline.scale;
    tpl.pose.orientation =
        (Eigen::Quaterniond(pipeline.frame.axes.transpose()) * world_pose.orientation)
            .normalized();
    if (tpl.pose.position.cwiseAbs().maxCoeff() > 1.5) {
        throw PoseOutsideObject("grasp position lies outside the object bounds");
    }

    const ViewGrid& front = pipeline.grids[0];
    tpl.grid_row = cell_from_vertical(tpl.pose.position.z(), front.height);
    tpl.grid_col = cell_from_horizontal(tpl.pose.position.y(), front.width);
    tpl.local_feature = local_window_feature(front, tpl.grid_row, tpl.grid_col, config_.blocks);
    tpl.global_feature = pipeline.feature;
    templates_.push_back(std::move(tpl));
}

std::optional<GraspMatch> TemplateStore::recognize(const PointCloud& cloud,
                                                   double tau_familiar) const {
    if (templates_.empty()) throw EmptyStore("recognize: no grasp templates");
    const PipelineResult pipeline = run_pipeline(cloud, config_);
    const ViewGrid& front = pipeline.grids[0];

    const GraspTemplate* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const auto& tpl : templates_) {
        const double global_d =
            cosine_distance_general(pipeline.feature.values, tpl.global_feature.values);
        const ViewFeature local =
            local_window_feature(front, tpl.grid_row, tpl.grid_col, config_.blocks);
        const double local_d = cosine_distance_general(local.values, tpl.local_feature.values);
        const double d = global_weight_ * global_d + (1.0 - global_weight_) * local_d;
        if (d < best_distance) {
            best_distance = d;
            best = &tpl;
        }
    }
    if (best_distance > tau_familiar) return std::nullopt;

    GraspMatch match;
    match.affordance_label = best->affordance_label;
    match.distance = best_distance;
    match.similarity = 1.0 - best_distance;
    match.world_pose.position =
        pipeline.frame.origin + pipeline.frame.axes * (pipeline.scale * best->pose.position);
    match.world_pose.orientation =
        (Eigen::Quaterniond(pipeline.frame.axes) * best->pose.orientation).normalized();
    return match;
}

nlohmann::json TemplateStore::to_json() const {
    nlohmann::json doc;
    doc["format"] = "orthoview-grasps";
    doc["version"] = 1;
    doc["resolution"] = {config_.resolution_w, config_.resolution_h};
    doc["blocks"] = config_.blocks;
    doc["global_weight"] = global_weight_;
    nlohmann::json templates = nlohmann::json::array();
    for (const auto& tpl : templates_) {
        nlohmann::json t;
        t["affordance"] = tpl.affordance_label;
        t["position"] = {tpl.pose.position.x(), tpl.pose.position.y(), tpl.pose.position.z()};
        t["orientation"] = {tpl.pose.orientation.w(), tpl.pose.orientation.x(),
                            tpl.pose.orientation.y(), tpl.pose.orientation.z()};
        t["grid_row"] = tpl.grid_row;
        t["grid_col"] = tpl.grid_col;
        t["descriptor_id"] = tpl.global_feature.descriptor_id;
        t["global_feature"] = tpl.global_feature.values;
        t["local_descriptor_id"] = tpl.local_feature.descriptor_id;
        t["local_feature"] = tpl.local_feature.values;
        templates.push_back(std::move(t));
    }
    doc["templates"] = std::move(templates);
    return doc;
}

TemplateStore TemplateStore::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "orthoview-grasps") {
        throw ConfigInvalid("grasp store: wrong format tag");
    }
    if (doc.value("version", 0) != 1) throw ConfigInvalid("grasp store: unsupported version");
    FeatureConfig config;
    config.resolution_w = doc.at("resolution").at(0).get<int>();
    config.resolution_h = doc.at("resolution").at(1).get<int>();
    config.blocks = doc.at("blocks").get<int>();
    TemplateStore store(config);
    store.set_global_weight(doc.value("global_weight", 0.5));
    for (const auto& t : doc.at("templates")) {
        GraspTemplate tpl;
        tpl.affordance_label = t.at("affordance").get<std::string>();
        const auto& pos = t.at("position");
        tpl.pose.position = {pos.at(0).get<double>(), pos.at(1).get<double>(),
                             pos.at(2).get<double>()};
        const auto& q = t.at("orientation");
        tpl.pose.orientation = Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(),
                                                  q.at(2).get<double>(), q.at(3).get<double>());
        tpl.grid_row = t.at("grid_row").get<int>();
        tpl.grid_col = t.at("grid_col").get<int>();
        tpl.global_feature.descriptor_id = t.at("descriptor_id").get<std::string>();
        tpl.global_feature.values = t.at("global_feature").get<std::vector<double>>();
        tpl.local_feature.descriptor_id = t.at("local_descriptor_id").get<std::string>();
        tpl.local_feature.values = t.at("local_feature").get<std::vector<double>>();
        store.templates_.push_back(std::move(tpl));
    }
    return store;
}

} // namespace orthoview
