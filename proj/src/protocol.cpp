#include "orthoview/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orthoview/detail/rng.hpp"

namespace orthoview {

const char* event_kind_name(TeachingEvent::Kind kind) {
    switch (kind) {
        case TeachingEvent::Kind::teach: return "teach";
        case TeachingEvent::Kind::ask: return "ask";
        case TeachingEvent::Kind::correct: return "correct";
        case TeachingEvent::Kind::introduce: return "introduce";
        case TeachingEvent::Kind::context_switch: return "context_switch";
    }
    return "?";
}

namespace {

TeachingEvent::Kind event_kind_from_name(const std::string& name) {
    if (name == "teach") return TeachingEvent::Kind::teach;
    if (name == "ask") return TeachingEvent::Kind::ask;
    if (name == "correct") return TeachingEvent::Kind::correct;
    if (name == "introduce") return TeachingEvent::Kind::introduce;
    if (name == "context_switch") return TeachingEvent::Kind::context_switch;
    throw ConfigInvalid("unknown event kind '" + name + "'");
}

} // namespace

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::all_learned: return "all_learned";
        case Termination::breakpoint_stall: return "breakpoint_stall";
        case Termination::data_exhausted: return "data_exhausted";
    }
    return "?";
}

nlohmann::json TeachingEvent::to_json() const {
    nlohmann::json doc;
    doc["index"] = index;
    doc["kind"] = event_kind_name(kind);
    doc["context"] = context_id;
    if (!true_label.empty()) doc["true_label"] = true_label;
    if (predicted_label) doc["predicted"] = *predicted_label;
    if (correct) doc["correct"] = *correct;
    return doc;
}

TeachingEvent TeachingEvent::from_json(const nlohmann::json& doc) {
    TeachingEvent e;
    e.index = doc.at("index").get<std::uint64_t>();
    e.kind = event_kind_from_name(doc.at("kind").get<std::string>());
    e.context_id = doc.at("context").get<std::string>();
    if (doc.contains("true_label")) e.true_label = doc.at("true_label").get<std::string>();
    if (doc.contains("predicted")) e.predicted_label = doc.at("predicted").get<std::string>();
    if (doc.contains("correct")) e.correct = doc.at("correct").get<bool>();
    return e;
}

void ProtocolConfig::validate() const {
    if (!(intro_threshold > 0.0 && intro_threshold <= 1.0)) {
        throw ConfigInvalid("intro_threshold must be in (0, 1]");
    }
    if (window_factor == 0) throw ConfigInvalid("window_factor must be positive");
    if (max_stall == 0) throw ConfigInvalid("max_stall must be positive");
    if (!context_schedule.empty()) {
        if (context_schedule.front().second != 0) {
            throw ConfigInvalid("context_schedule must start at iteration 0");
        }
        for (std::size_t i = 1; i < context_schedule.size(); ++i) {
            if (context_schedule[i].second <= context_schedule[i - 1].second) {
                throw ConfigInvalid("context_schedule iterations must be strictly increasing");
            }
        }
        for (const auto& [ctx, start] : context_schedule) {
            if (ctx.empty()) throw ConfigInvalid("context_schedule has an empty context id");
        }
    }
}

Dataset Dataset::single(std::map<std::string, std::vector<GlobalFeature>> categories) {
    Dataset d;
    d.contexts.emplace("default", std::move(categories));
    return d;
}

Dataset Dataset::from_clouds(const std::map<std::string, std::vector<PointCloud>>& categories,
                             const FeatureConfig& config) {
    std::map<std::string, std::vector<GlobalFeature>> features;
    for (const auto& [label, clouds] : categories) {
        auto& out = features[label];
        out.reserve(clouds.size());
        for (const auto& cloud : clouds) out.push_back(global_feature(cloud, config));
    }
    return single(std::move(features));
}

std::vector<std::string> Dataset::category_union() const {
    std::set<std::string> labels;
    for (const auto& [ctx, categories] : contexts) {
        for (const auto& [label, instances] : categories) labels.insert(label);
    }
    return {labels.begin(), labels.end()};
}

namespace {

/// Unseen-instance pool for one (context, category); draws advance a cursor
/// over a seeded shuffle of the dataset instances.
struct Pool {
    std::vector<const GlobalFeature*> instances;
    std::size_t cursor = 0;

    bool exhausted() const { return cursor >= instances.size(); }
    const GlobalFeature& draw() { return *instances[cursor++]; }
};

struct WindowState {
    std::deque<bool> asks; // correctness of every ask so far, oldest first
    std::vector<double> values;

    /// Accuracy over the last `window` asks; records the value. Call only when
    /// the window is full.
    double compute(std::size_t window) {
        std::size_t correct = 0;
        for (std::size_t i = asks.size() - window; i < asks.size(); ++i) {
            if (asks[i]) ++correct;
        }
        const double acc = static_cast<double>(correct) / static_cast<double>(window);
        values.push_back(acc);
        return acc;
    }
};

} // namespace

ExperimentReport run_experiment(const Dataset& dataset, const ProtocolConfig& config) {
    config.validate();

    const std::vector<std::string> all_labels = dataset.category_union();
    if (all_labels.size() < 2) {
        throw DatasetTooSmall("run_experiment: need at least 2 categories");
    }
    for (const auto& label : all_labels) {
        std::size_t total = 0;
        for (const auto& [ctx, categories] : dataset.contexts) {
            const auto it = categories.find(label);
            if (it != categories.end()) total += it->second.size();
        }
        if (total < 3) {
            throw DatasetTooSmall("run_experiment: category '" + label +
                                  "' has fewer than 3 instances");
        }
    }

    std::vector<std::pair<std::string, std::uint64_t>> schedule = config.context_schedule;
    if (schedule.empty()) schedule.emplace_back("default", 0);
    for (const auto& [ctx, start] : schedule) {
        if (!dataset.contexts.count(ctx)) {
            throw ConfigInvalid("context_schedule names unknown context '" + ctx + "'");
        }
    }

    std::mt19937_64 rng(detail::mix_seed(config.seed));

    // Category presentation order: seeded permutation of the sorted union.
    std::vector<std::string> intro_order = all_labels;
    detail::shuffle(intro_order, rng);

    // Per-(context, category) pools, shuffled in a fixed traversal order.
    std::map<std::string, std::map<std::string, Pool>> pools;
    for (const auto& [ctx, categories] : dataset.contexts) {
        for (const auto& [label, instances] : categories) {
            Pool pool;
            pool.instances.reserve(instances.size());
            for (const auto& f : instances) pool.instances.push_back(&f);
            detail::shuffle(pool.instances, rng);
            pools[ctx].emplace(label, std::move(pool));
        }
    }

    ExperimentReport report;
    CategoryMemory memory;
    WindowState window;

    std::vector<std::string> known;          // introduction order
    std::set<std::string> asked_since_intro; // cleared on every introduction
    std::size_t next_intro = 0;
    std::size_t round_robin = 0;
    std::uint64_t asks_total = 0;
    std::uint64_t asks_since_intro = 0;
    std::uint64_t event_index = 0;
    std::size_t schedule_pos = 0;
    std::string active_context = schedule[0].first;

    auto log = [&](TeachingEvent e) {
        e.index = event_index++;
        e.context_id = active_context;
        report.events.push_back(std::move(e));
    };

    auto pool_of = [&](const std::string& label) -> Pool* {
        auto ctx_it = pools.find(active_context);
        if (ctx_it == pools.end()) return nullptr;
        auto it = ctx_it->second.find(label);
        return it == ctx_it->second.end() ? nullptr : &it->second;
    };

    // Introduces intro_order[next_intro]; returns false on an empty pool
    // (data_exhausted).
    auto introduce_next = [&]() -> bool {
        const std::string& label = intro_order[next_intro];
        Pool* pool = pool_of(label);
        if (pool == nullptr || pool->exhausted()) return false;
        TeachingEvent intro;
        intro.kind = TeachingEvent::Kind::introduce;
        intro.true_label = label;
        log(std::move(intro));
        const GlobalFeature& instance = pool->draw();
        memory.teach(label, instance);
        TeachingEvent teach;
        teach.kind = TeachingEvent::Kind::teach;
        teach.true_label = label;
        log(std::move(teach));
        known.push_back(label);
        ++next_intro;
        asked_since_intro.clear();
        asks_since_intro = 0;
        return true;
    };

    auto finish = [&](Termination t) {
        report.termination = t;
        report.learned_categories = known.size();
        report.qc_iterations = asks_total;
        report.avg_instances_per_category = memory.stats().avg_instances_per_category;
        std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_ctx;
        std::uint64_t correct_total = 0;
        for (const auto& e : report.events) {
            if (e.kind != TeachingEvent::Kind::ask) continue;
            auto& [corr, total] = per_ctx[e.context_id];
            ++total;
            if (e.correct.value_or(false)) {
                ++corr;
                ++correct_total;
            }
        }
        report.gca = asks_total > 0
                         ? static_cast<double>(correct_total) / static_cast<double>(asks_total)
                         : 0.0;
        for (const auto& [ctx, counts] : per_ctx) {
            report.per_context_gca[ctx] =
                static_cast<double>(counts.first) / static_cast<double>(counts.second);
        }
        double sum = 0.0;
        for (double v : window.values) sum += v;
        report.apa = window.values.empty() ? 0.0 : sum / static_cast<double>(window.values.size());
        return report;
    };

    if (!introduce_next()) return finish(Termination::data_exhausted);

    while (true) {
        // Scheduled context changes happen on the ask counter, invisibly to
        // the learner.
        while (schedule_pos + 1 < schedule.size() &&
               schedule[schedule_pos + 1].second <= asks_total) {
            ++schedule_pos;
            active_context = schedule[schedule_pos].first;
            TeachingEvent sw;
            sw.kind = TeachingEvent::Kind::context_switch;
            log(std::move(sw));
        }

        // Round-robin over known categories, skipping exhausted pools.
        Pool* ask_pool = nullptr;
        std::string ask_label;
        for (std::size_t step = 0; step < known.size(); ++step) {
            const std::string& candidate = known[(round_robin + step) % known.size()];
            Pool* pool = pool_of(candidate);
            if (pool != nullptr && !pool->exhausted()) {
                ask_pool = pool;
                ask_label = candidate;
                round_robin = (round_robin + step + 1) % known.size();
                break;
            }
        }
        if (ask_pool == nullptr) return finish(Termination::data_exhausted);

        const GlobalFeature& instance = ask_pool->draw();
        const auto prediction = memory.classify(instance, config.metric, config.tau_unknown);
        const std::string predicted = prediction ? prediction->label : std::string{};
        const bool correct = predicted == ask_label;

        TeachingEvent ask;
        ask.kind = TeachingEvent::Kind::ask;
        ask.true_label = ask_label;
        ask.predicted_label = predicted;
        ask.correct = correct;
        log(std::move(ask));
        ++asks_total;
        ++asks_since_intro;
        asked_since_intro.insert(ask_label);
        window.asks.push_back(correct);

        if (!correct) {
            memory.teach(ask_label, instance);
            TeachingEvent corr;
            corr.kind = TeachingEvent::Kind::correct;
            corr.true_label = ask_label;
            log(std::move(corr));
        }

        const std::size_t k = known.size();
        const std::size_t window_len = static_cast<std::size_t>(config.window_factor) * k;
        if (window.asks.size() >= window_len) {
            const double accuracy = window.compute(window_len);
            // Categories whose pools are exhausted can never be asked again;
            // they do not block the coverage requirement.
            bool covered = true;
            for (const auto& label : known) {
                if (asked_since_intro.count(label)) continue;
                Pool* pool = pool_of(label);
                if (pool != nullptr && !pool->exhausted()) {
                    covered = false;
                    break;
                }
            }
            if (covered && accuracy >= config.intro_threshold) {
                if (next_intro == intro_order.size()) return finish(Termination::all_learned);
                if (!introduce_next()) return finish(Termination::data_exhausted);
                continue;
            }
        }

        if (asks_since_intro >= static_cast<std::uint64_t>(config.max_stall) * known.size()) {
            return finish(Termination::breakpoint_stall);
        }
    }
}

double compute_gca(const std::vector<TeachingEvent>& events) {
    std::uint64_t asks = 0, correct = 0;
    for (const auto& e : events) {
        if (e.kind != TeachingEvent::Kind::ask) continue;
        ++asks;
        if (e.correct.value_or(false)) ++correct;
    }
    if (asks == 0) throw NoPredictions("compute_gca: no ask events");
    return static_cast<double>(correct) / static_cast<double>(asks);
}

double compute_apa(const std::vector<TeachingEvent>& events, const ProtocolConfig& config) {
    std::size_t known = 0;
    std::deque<bool> asks;
    std::vector<double> values;
    for (const auto& e : events) {
        if (e.kind == TeachingEvent::Kind::introduce) {
            ++known;
        } else if (e.kind == TeachingEvent::Kind::ask) {
            asks.push_back(e.correct.value_or(false));
            const std::size_t window = static_cast<std::size_t>(config.window_factor) * known;
            if (window > 0 && asks.size() >= window) {
                std::size_t correct = 0;
                for (std::size_t i = asks.size() - window; i < asks.size(); ++i) {
                    if (asks[i]) ++correct;
                }
                values.push_back(static_cast<double>(correct) / static_cast<double>(window));
            }
        }
    }
    if (values.empty()) throw NoWindows("compute_apa: no full accuracy window in the event log");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& std_out) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    std_out = std::sqrt(sq / static_cast<double>(xs.size()));
}

} // namespace

Aggregate summarize(const std::vector<ExperimentReport>& reports) {
    if (reports.empty()) throw ConfigInvalid("summarize: no reports");
    Aggregate agg;
    agg.runs = reports.size();
    std::vector<double> gca, apa, learned, qc, instances;
    for (const auto& r : reports) {
        gca.push_back(r.gca);
        apa.push_back(r.apa);
        learned.push_back(static_cast<double>(r.learned_categories));
        qc.push_back(static_cast<double>(r.qc_iterations));
        instances.push_back(r.avg_instances_per_category);
    }
    mean_std(gca, agg.gca_mean, agg.gca_std);
    mean_std(apa, agg.apa_mean, agg.apa_std);
    mean_std(learned, agg.learned_mean, agg.learned_std);
    mean_std(qc, agg.qc_mean, agg.qc_std);
    mean_std(instances, agg.instances_mean, agg.instances_std);
    return agg;
}

namespace {

nlohmann::json config_to_json(const ProtocolConfig& config) {
    nlohmann::json doc;
    doc["intro_threshold"] = config.intro_threshold;
    doc["window_factor"] = config.window_factor;
    doc["max_stall"] = config.max_stall;
    doc["seed"] = config.seed;
    doc["metric"] = metric_name(config.metric);
    if (std::isinf(config.tau_unknown)) {
        doc["tau_unknown"] = "inf";
    } else {
        doc["tau_unknown"] = config.tau_unknown;
    }
    nlohmann::json schedule = nlohmann::json::array();
    for (const auto& [ctx, start] : config.context_schedule) {
        schedule.push_back({{"context", ctx}, {"start", start}});
    }
    doc["context_schedule"] = std::move(schedule);
    return doc;
}

} // namespace

nlohmann::json ExperimentReport::to_json(const ProtocolConfig& config) const {
    nlohmann::json doc;
    doc["format"] = "orthoview-report";
    doc["version"] = 1;
    doc["config"] = config_to_json(config);
    doc["learned_categories"] = learned_categories;
    doc["qc_iterations"] = qc_iterations;
    doc["avg_instances_per_category"] = avg_instances_per_category;
    doc["gca"] = gca;
    doc["apa"] = apa;
    doc["termination"] = termination_name(termination);
    doc["per_context_gca"] = per_context_gca;
    return doc;
}

std::string events_to_jsonl(const std::vector<TeachingEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += e.to_json().dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<TeachingEvent> events_from_jsonl(const std::string& text) {
    std::vector<TeachingEvent> events;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        events.push_back(TeachingEvent::from_json(nlohmann::json::parse(line)));
    }
    return events;
}

} // namespace orthoview
