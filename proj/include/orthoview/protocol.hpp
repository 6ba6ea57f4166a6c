#ifndef ORTHOVIEW_PROTOCOL_HPP
#define ORTHOVIEW_PROTOCOL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "orthoview/memory.hpp"

namespace orthoview {

/// One entry of the experiment log.
struct TeachingEvent {
    enum class Kind { teach, ask, correct, introduce, context_switch };

    std::uint64_t index = 0; // strictly increasing over the whole experiment
    Kind kind = Kind::teach;
    std::string true_label;                 // teach/correct/introduce/ask
    std::optional<std::string> predicted_label; // ask only
    std::optional<bool> correct;                // ask only
    std::string context_id;

    nlohmann::json to_json() const;
    static TeachingEvent from_json(const nlohmann::json& doc);
};

const char* event_kind_name(TeachingEvent::Kind kind);

enum class Termination { all_learned, breakpoint_stall, data_exhausted };
const char* termination_name(Termination t);

/// Tunables of the simulated-teacher protocol. The cited teaching protocol's
/// exact constants are not public; these defaults are this artifact's own and
/// every report records the configuration it ran with.
struct ProtocolConfig {
    double intro_threshold = 0.67;   // windowed accuracy needed to introduce
    std::uint32_t window_factor = 3; // window length = window_factor * known categories
    std::uint32_t max_stall = 100;   // stall limit = max_stall * known categories (asks)
    std::uint64_t seed = 0;
    Metric metric = Metric::cosine;
    double tau_unknown = std::numeric_limits<double>::infinity();
    /// (context_id, first QC iteration of that context), ascending, first at 0.
    /// Empty means a single context named "default".
    std::vector<std::pair<std::string, std::uint64_t>> context_schedule;

    void validate() const; // throws ConfigInvalid
};

/// Labeled features grouped by context and category. Single-context datasets
/// live under the context id "default".
struct Dataset {
    std::map<std::string, std::map<std::string, std::vector<GlobalFeature>>> contexts;

    static Dataset single(std::map<std::string, std::vector<GlobalFeature>> categories);
    /// Feature-extracts every cloud with the given config.
    static Dataset from_clouds(
        const std::map<std::string, std::vector<PointCloud>>& categories,
        const FeatureConfig& config);

    std::vector<std::string> category_union() const; // sorted labels
};

struct ExperimentReport {
    std::size_t learned_categories = 0;
    std::uint64_t qc_iterations = 0; // number of ask events
    double avg_instances_per_category = 0.0;
    double gca = 0.0;
    double apa = 0.0;
    Termination termination = Termination::data_exhausted;
    std::vector<TeachingEvent> events;
    std::map<std::string, double> per_context_gca;

    /// Report body (without the event list; events go to a JSONL file).
    nlohmann::json to_json(const ProtocolConfig& config) const;
};

/// Runs the teach/ask/correct loop over the dataset:
///  1. introduce the first category (teach one instance);
///  2. question known categories round-robin with unseen instances, teaching a
///     correction after every wrong answer;
///  3. after each ask, once the accuracy window (window_factor * k asks) is
///     full, every askable known category has been questioned since the last
///     introduction, and the windowed accuracy reaches intro_threshold,
///     introduce the next category;
///  4. stop with all_learned when no category is left to introduce and the
///     condition fires once more, breakpoint_stall when max_stall * k asks
///     pass without an introduction, data_exhausted when instances run out.
/// Context switches follow config.context_schedule on the ask counter; the
/// learner sees only the data, never the context id.
ExperimentReport run_experiment(const Dataset& dataset, const ProtocolConfig& config);

/// Fraction of correct answers over all ask events. Throws NoPredictions.
double compute_gca(const std::vector<TeachingEvent>& events);

/// Mean of every windowed accuracy the protocol computed (full windows only),
/// replayed from the event log. Throws NoWindows.
double compute_apa(const std::vector<TeachingEvent>& events, const ProtocolConfig& config);

/// Mean/std (population) of each metric over a batch of runs.
struct Aggregate {
    std::size_t runs = 0;
    double gca_mean = 0.0, gca_std = 0.0;
    double apa_mean = 0.0, apa_std = 0.0;
    double learned_mean = 0.0, learned_std = 0.0;
    double qc_mean = 0.0, qc_std = 0.0;
    double instances_mean = 0.0, instances_std = 0.0;
};
Aggregate summarize(const std::vector<ExperimentReport>& reports);

/// JSON-lines event log, one TeachingEvent per line.
std::string events_to_jsonl(const std::vector<TeachingEvent>& events);
std::vector<TeachingEvent> events_from_jsonl(const std::string& text);

} // namespace orthoview

#endif
