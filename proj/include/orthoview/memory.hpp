#ifndef ORTHOVIEW_MEMORY_HPP
#define ORTHOVIEW_MEMORY_HPP

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "orthoview/descriptor.hpp"

namespace orthoview {

enum class Metric { euclidean, cosine, chisquare };

Metric metric_from_name(const std::string& name); // throws ConfigInvalid
const char* metric_name(Metric metric);

/// Distance between equal-length vectors under the given metric.
/// cosine assumes unit vectors (1 - dot); chisquare assumes non-negative
/// components, as produced by the block-grad descriptor.
double feature_distance(const std::vector<double>& a, const std::vector<double>& b,
                        Metric metric);

/// Nearest-neighbor answer.
struct Prediction {
    std::string label;
    double distance = 0.0;
    /// Best distance among instances of any other label; absent with a single
    /// category.
    std::optional<double> runner_up_distance;
};

struct MemoryStats {
    std::map<std::string, std::size_t> per_label;
    std::size_t total_instances = 0;
    double avg_instances_per_category = 0.0;
};

/// Open-ended instance store: label -> taught features, nearest-neighbor
/// classification. Adding a category never touches previously stored
/// instances. Single writer, concurrent readers.
class CategoryMemory {
public:
    /// Appends an instance, creating the category on first sight.
    /// Throws DimensionMismatch when the feature does not match the store.
    void teach(const std::string& label, GlobalFeature feature);

    /// Nearest stored instance, or nullopt (Unknown) when the memory is empty
    /// or the best distance exceeds tau_unknown. Exact ties go to the
    /// lexicographically smallest label. Equivalent to a brute-force scan.
    std::optional<Prediction> classify(
        const GlobalFeature& query, Metric metric = Metric::cosine,
        double tau_unknown = std::numeric_limits<double>::infinity()) const;

    /// Removes a category and its instances. Throws UnknownLabel.
    void forget(const std::string& label);

    MemoryStats stats() const;

    std::size_t category_count() const { return creation_order_.size(); }
    bool empty() const { return creation_order_.empty(); }
    const std::vector<std::string>& creation_order() const { return creation_order_; }
    bool contains(const std::string& label) const { return categories_.count(label) != 0; }
    const std::vector<GlobalFeature>& instances(const std::string& label) const;
    const std::string& descriptor_id() const { return descriptor_id_; }
    std::size_t dimension() const { return dimension_; }

    /// Versioned snapshot with exact decimal round-trip.
    nlohmann::json to_json() const;
    static CategoryMemory from_json(const nlohmann::json& doc);

private:
    std::map<std::string, std::vector<GlobalFeature>> categories_;
    std::vector<std::string> creation_order_;
    std::string descriptor_id_;
    std::size_t dimension_ = 0;
};

} // namespace orthoview

#endif
