#include "orthoview/memory.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace orthoview {

Metric metric_from_name(const std::string& name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine") return Metric::cosine;
    if (name == "chisquare") return Metric::chisquare;
    throw ConfigInvalid("unknown metric '" + name + "'");
}

const char* metric_name(Metric metric) {
    switch (metric) {
        case Metric::euclidean: return "euclidean";
        case Metric::cosine: return "cosine";
        case Metric::chisquare: return "chisquare";
    }
    return "?";
}

double feature_distance(const std::vector<double>& a, const std::vector<double>& b,
                        Metric metric) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("feature_distance: dimensions differ");
    }
    switch (metric) {
        case Metric::euclidean: {
            double sq = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                sq += d * d;
            }
            return std::sqrt(sq);
        }
        case Metric::cosine: {
            double dot = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
            return 1.0 - dot;
        }
        case Metric::chisquare: {
            constexpr double eps = 1e-12;
            double sum = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                sum += d * d / (a[i] + b[i] + eps);
            }
            return sum;
        }
    }
    throw ConfigInvalid("feature_distance: unknown metric");
}

void CategoryMemory::teach(const std::string& label, GlobalFeature feature) {
    if (empty()) {
        dimension_ = feature.dim();
        descriptor_id_ = feature.descriptor_id;
    } else if (feature.dim() != dimension_) {
        throw DimensionMismatch("teach: feature has dimension " + std::to_string(feature.dim()) +
                                ", memory stores " + std::to_string(dimension_));
    } else if (feature.descriptor_id != descriptor_id_) {
        throw DimensionMismatch("teach: feature descriptor '" + feature.descriptor_id +
                                "' does not match stored '" + descriptor_id_ + "'");
    }
    auto [it, inserted] = categories_.try_emplace(label);
    if (inserted) creation_order_.push_back(label);
    it->second.push_back(std::move(feature));
}

std::optional<Prediction> CategoryMemory::classify(const GlobalFeature& query, Metric metric,
                                                   double tau_unknown) const {
    if (empty()) return std::nullopt;
    if (query.dim() != dimension_) {
        throw DimensionMismatch("classify: query dimension " + std::to_string(query.dim()) +
                                ", memory stores " + std::to_string(dimension_));
    }

    const std::string* best_label = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [label, instances] : categories_) {
        for (const auto& inst : instances) {
            const double d = feature_distance(query.values, inst.values, metric);
            // map order is lexicographic, so a strict < keeps the smallest label on ties
            if (d < best) {
                best = d;
                best_label = &label;
            }
        }
    }
    if (best > tau_unknown) return std::nullopt;

    Prediction pred;
    pred.label = *best_label;
    pred.distance = best;
    double runner_up = std::numeric_limits<double>::infinity();
    for (const auto& [label, instances] : categories_) {
        if (label == pred.label) continue;
        for (const auto& inst : instances) {
            runner_up = std::min(runner_up, feature_distance(query.values, inst.values, metric));
        }
    }
    if (std::isfinite(runner_up)) pred.runner_up_distance = runner_up;
    return pred;
}

void CategoryMemory::forget(const std::string& label) {
    const auto it = categories_.find(label);
    if (it == categories_.end()) throw UnknownLabel("forget: unknown label '" + label + "'");
    categories_.erase(it);
    std::erase(creation_order_, label);
    if (categories_.empty()) {
        dimension_ = 0;
        descriptor_id_.clear();
    }
}

MemoryStats CategoryMemory::stats() const {
    MemoryStats s;
    for (const auto& [label, instances] : categories_) {
        s.per_label[label] = instances.size();
        s.total_instances += instances.size();
    }
    if (!categories_.empty()) {
        s.avg_instances_per_category =
            static_cast<double>(s.total_instances) / static_cast<double>(categories_.size());
    }
    return s;
}

const std::vector<GlobalFeature>& CategoryMemory::instances(const std::string& label) const {
    const auto it = categories_.find(label);
    if (it == categories_.end()) throw UnknownLabel("instances: unknown label '" + label + "'");
    return it->second;
}

nlohmann::json CategoryMemory::to_json() const {
    nlohmann::json doc;
    doc["format"] = "orthoview-memory";
    doc["version"] = 1;
    doc["descriptor_id"] = descriptor_id_;
    doc["dimension"] = dimension_;
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& label : creation_order_) {
        nlohmann::json entry;
        entry["label"] = label;
        nlohmann::json instances = nlohmann::json::array();
        for (const auto& inst : categories_.at(label)) {
            instances.push_back(inst.values);
        }
        entry["instances"] = std::move(instances);
        cats.push_back(std::move(entry));
    }
    doc["categories"] = std::move(cats);
    return doc;
}

CategoryMemory CategoryMemory::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "orthoview-memory") {
        throw ConfigInvalid("memory snapshot: wrong format tag");
    }
    if (doc.value("version", 0) != 1) {
        throw ConfigInvalid("memory snapshot: unsupported version");
    }
    CategoryMemory memory;
    const std::string descriptor_id = doc.at("descriptor_id").get<std::string>();
    for (const auto& entry : doc.at("categories")) {
        const std::string label = entry.at("label").get<std::string>();
        for (const auto& values : entry.at("instances")) {
            GlobalFeature f;
            f.descriptor_id = descriptor_id;
            f.values = values.get<std::vector<double>>();
            memory.teach(label, std::move(f));
        }
    }
    return memory;
}

} // namespace orthoview
