#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orthoview/dataset.hpp"
#include "orthoview/grasp.hpp"
#include "orthoview/memory.hpp"
#include "orthoview/protocol.hpp"

namespace fs = std::filesystem;
using namespace orthoview;

namespace {

bool log_enabled() {
    const char* env = std::getenv("ORTHOVIEW_LOG");
    if (env == nullptr) return false;
    const std::string v(env);
    return !v.empty() && v != "0" && v != "quiet";
}

void log_info(const std::string& msg) {
    if (log_enabled()) std::cerr << "[orthoview] " << msg << "\n";
}

void write_text_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << body;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_tau(const std::string& text) {
    if (text == "inf" || text == "infinite" || text == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw ConfigInvalid("bad tau value '" + text + "'");
    }
}

// ---------------------------------------------------------------------------
// protocol run configuration: flat `key = value` file plus flag overrides
// ---------------------------------------------------------------------------

struct RunConfig {
    fs::path dataset_root;
    std::map<std::string, fs::path> context_roots;
    fs::path out_dir = ".";
    std::vector<std::uint64_t> seeds;
    FeatureConfig features;
    ProtocolConfig protocol;
    bool external_features = false;
    std::size_t external_dim = 0;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset_root") {
        cfg.dataset_root = value;
    } else if (key.starts_with("context_root.")) {
        cfg.context_roots[key.substr(std::string("context_root.").size())] = value;
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
    } else if (key == "resolution") {
        cfg.features.resolution_w = cfg.features.resolution_h = std::stoi(value);
    } else if (key == "blocks") {
        cfg.features.blocks = std::stoi(value);
    } else if (key == "metric") {
        cfg.protocol.metric = metric_from_name(value);
    } else if (key == "tau_unknown") {
        cfg.protocol.tau_unknown = parse_tau(value);
    } else if (key == "intro_threshold") {
        cfg.protocol.intro_threshold = std::stod(value);
    } else if (key == "window_factor") {
        cfg.protocol.window_factor = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "max_stall") {
        cfg.protocol.max_stall = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "external_features") {
        cfg.external_features = (value == "true" || value == "1" || value == "yes");
    } else if (key == "external_dim") {
        cfg.external_dim = std::stoull(value);
    } else if (key == "context_schedule") {
        cfg.protocol.context_schedule.clear();
        for (const auto& entry : split_list(value)) {
            const auto colon = entry.rfind(':');
            if (colon == std::string::npos) {
                throw ConfigInvalid("context_schedule entry '" + entry + "' wants ctx:start");
            }
            cfg.protocol.context_schedule.emplace_back(
                entry.substr(0, colon), std::stoull(entry.substr(colon + 1)));
        }
    } else {
        throw ConfigInvalid("unknown config key '" + key + "'");
    }
}

RunConfig load_run_config(const fs::path& path) {
    RunConfig cfg;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw ConfigInvalid(path.string() + ":" + std::to_string(lineno) +
                                    ": expected key = value");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string::npos) return std::string{};
            const auto last = s.find_last_not_of(" \t\r");
            return s.substr(first, last - first + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigInvalid(path.string() + ":" + std::to_string(lineno) + ": empty key");
        }
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_feature(const fs::path& input, fs::path out, const FeatureConfig& config,
                const std::string& pgm_prefix, const std::string& csv_prefix) {
    const PointCloud cloud = read_cloud_file(input);
    const PipelineResult pipeline = run_pipeline(cloud, config);
    if (out.empty()) out = fs::path(input).replace_extension(".feat");
    write_text_file(out, feature_to_text(pipeline.feature.values));
    log_info("wrote " + out.string() + " (" + std::to_string(pipeline.feature.dim()) +
             " values)");
    for (int v = 0; v < 3; ++v) {
        const std::string name = view_name(pipeline.grids[v].view);
        if (!pgm_prefix.empty()) {
            write_text_file(pgm_prefix + "." + name + ".pgm", grid_to_pgm(pipeline.grids[v]));
        }
        if (!csv_prefix.empty()) {
            write_text_file(csv_prefix + "." + name + ".csv", grid_to_csv(pipeline.grids[v]));
        }
    }
    return 0;
}

std::string summary_row(const std::string& seed, const std::string& termination,
                        const std::string& learned, const std::string& qc,
                        const std::string& instances, const std::string& gca,
                        const std::string& apa) {
    return seed + "," + termination + "," + learned + "," + qc + "," + instances + "," + gca +
           "," + apa + "\n";
}

int cmd_protocol(RunConfig cfg) {
    if (cfg.seeds.empty()) throw ConfigInvalid("protocol: no seeds configured");
    cfg.features.validate();

    Dataset dataset;
    if (!cfg.context_roots.empty()) {
        for (const auto& [ctx, root] : cfg.context_roots) {
            dataset.contexts[ctx] = load_feature_directory(root, cfg.features,
                                                           cfg.external_features,
                                                           cfg.external_dim);
        }
    } else {
        if (cfg.dataset_root.empty()) throw ConfigInvalid("protocol: dataset_root not set");
        dataset = Dataset::single(load_feature_directory(
            cfg.dataset_root, cfg.features, cfg.external_features, cfg.external_dim));
    }

    fs::create_directories(cfg.out_dir);
    std::vector<ExperimentReport> reports;
    std::string csv = "seed,termination,learned_categories,qc_iterations,"
                      "avg_instances_per_category,gca,apa\n";
    for (const std::uint64_t seed : cfg.seeds) {
        ProtocolConfig pc = cfg.protocol;
        pc.seed = seed;
        const ExperimentReport report = run_experiment(dataset, pc);
        const std::string stem = "seed" + std::to_string(seed);
        write_text_file(cfg.out_dir / (stem + ".events.jsonl"), events_to_jsonl(report.events));
        write_text_file(cfg.out_dir / (stem + ".report.json"),
                        report.to_json(pc).dump(2) + "\n");
        csv += summary_row(std::to_string(seed), termination_name(report.termination),
                           std::to_string(report.learned_categories),
                           std::to_string(report.qc_iterations),
                           shortest(report.avg_instances_per_category), shortest(report.gca),
                           shortest(report.apa));
        log_info(stem + ": " + std::string(termination_name(report.termination)) + ", " +
                 std::to_string(report.learned_categories) + " categories, gca " +
                 shortest(report.gca));
        reports.push_back(report);
    }
    const Aggregate agg = summarize(reports);
    csv += summary_row("mean", "", shortest(agg.learned_mean), shortest(agg.qc_mean),
                       shortest(agg.instances_mean), shortest(agg.gca_mean),
                       shortest(agg.apa_mean));
    csv += summary_row("std", "", shortest(agg.learned_std), shortest(agg.qc_std),
                       shortest(agg.instances_std), shortest(agg.gca_std),
                       shortest(agg.apa_std));
    write_text_file(cfg.out_dir / "summary.csv", csv);
    std::cout << "wrote " << (cfg.out_dir / "summary.csv").string() << " ("
              << cfg.seeds.size() << " runs)\n";
    return 0;
}

int cmd_teach_repl(const FeatureConfig& config, Metric metric, double tau,
                   const fs::path& memory_file) {
    CategoryMemory memory;
    if (!memory_file.empty() && fs::exists(memory_file)) {
        memory = CategoryMemory::from_json(nlohmann::json::parse(read_text_file(memory_file)));
    }
    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream in(line);
        std::string cmd;
        in >> cmd;
        if (cmd.empty()) continue;
        try {
            if (cmd == "quit" || cmd == "exit") {
                break;
            } else if (cmd == "teach") {
                std::string label, file;
                in >> label >> file;
                if (label.empty() || file.empty()) throw ConfigInvalid("usage: teach <label> <file>");
                memory.teach(label, global_feature(read_cloud_file(file), config));
                std::cout << "taught " << label << " (" << memory.instances(label).size()
                          << " instances)\n";
            } else if (cmd == "ask") {
                std::string file;
                in >> file;
                if (file.empty()) throw ConfigInvalid("usage: ask <file>");
                const auto pred =
                    memory.classify(global_feature(read_cloud_file(file), config), metric, tau);
                if (!pred) {
                    std::cout << "unknown\n";
                } else {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "%.4f", pred->distance);
                    std::cout << pred->label << " (distance " << buf << ")\n";
                }
            } else if (cmd == "forget") {
                std::string label;
                in >> label;
                if (label.empty()) throw ConfigInvalid("usage: forget <label>");
                memory.forget(label);
                std::cout << "forgot " << label << "\n";
            } else if (cmd == "stats") {
                const MemoryStats s = memory.stats();
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.2f", s.avg_instances_per_category);
                std::cout << s.per_label.size() << " categories, " << s.total_instances
                          << " instances, avg " << buf;
                for (const auto& [label, count] : s.per_label) {
                    std::cout << " " << label << ":" << count;
                }
                std::cout << "\n";
            } else if (cmd == "save") {
                std::string file;
                in >> file;
                if (file.empty()) throw ConfigInvalid("usage: save <file>");
                write_text_file(file, memory.to_json().dump(2) + "\n");
                std::cout << "saved " << file << "\n";
            } else if (cmd == "load") {
                std::string file;
                in >> file;
                if (file.empty()) throw ConfigInvalid("usage: load <file>");
                memory = CategoryMemory::from_json(nlohmann::json::parse(read_text_file(file)));
                std::cout << "loaded " << file << " (" << memory.category_count()
                          << " categories)\n";
            } else {
                std::cout << "error: unknown command '" << cmd << "'\n";
            }
        } catch (const UnknownLabel&) {
            std::cout << "error: unknown label\n";
        } catch (const Error& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

TemplateStore open_store(const fs::path& path, const FeatureConfig& config) {
    if (fs::exists(path)) {
        return TemplateStore::from_json(nlohmann::json::parse(read_text_file(path)));
    }
    return TemplateStore(config);
}

int cmd_grasp_learn(const fs::path& store_path, const fs::path& cloud_path,
                    const std::string& label, const std::vector<double>& pose,
                    const FeatureConfig& config) {
    TemplateStore store = open_store(store_path, config);
    GripperPose world;
    world.position = {pose[0], pose[1], pose[2]};
    world.orientation = Eigen::Quaterniond(pose[3], pose[4], pose[5], pose[6]);
    if (world.orientation.norm() < 1e-9) throw ConfigInvalid("zero quaternion");
    world.orientation.normalize();
    store.learn(read_cloud_file(cloud_path), label, world);
    write_text_file(store_path, store.to_json().dump(2) + "\n");
    std::cout << "stored " << label << " (" << store.size() << " templates)\n";
    return 0;
}

int cmd_grasp_query(const fs::path& store_path, const fs::path& cloud_path, double tau,
                    const FeatureConfig& config) {
    const TemplateStore store = open_store(store_path, config);
    const auto match = store.recognize(read_cloud_file(cloud_path), tau);
    if (!match) {
        std::cerr << "not familiar (no template within tau)\n";
        return 1;
    }
    const auto& p = match->world_pose.position;
    const auto& q = match->world_pose.orientation;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g",
                  match->affordance_label.c_str(), p.x(), p.y(), p.z(), q.w(), q.x(), q.y(),
                  q.z(), match->similarity);
    std::cout << buf << "\n";
    return 0;
}

int cmd_genset(const fs::path& out_dir, std::size_t categories, std::size_t instances,
               std::size_t points, std::uint64_t seed, const std::string& format) {
    const std::string ext = "." + format;
    format_from_extension("x" + ext); // validates
    const auto dataset = synthetic_category_clouds(categories, instances, points, seed);
    for (const auto& [label, clouds] : dataset) {
        fs::create_directories(out_dir / label);
        for (std::size_t i = 0; i < clouds.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%03zu%s", label.c_str(), i, ext.c_str());
            write_cloud_file(clouds[i], out_dir / label / name);
        }
    }
    std::cout << "wrote " << dataset.size() << " categories x " << instances
              << " instances under " << out_dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthoview: open-ended 3D object category learning from orthographic views"};
    app.require_subcommand(1);

    FeatureConfig feat;
    int resolution = 64;
    std::string metric_name_arg = "cosine";
    std::string tau_arg = "inf";

    auto add_feature_flags = [&](CLI::App* cmd) {
        cmd->add_option("--resolution", resolution, "view grid resolution (NxN)");
        cmd->add_option("--blocks", feat.blocks, "descriptor blocks per axis");
    };

    // feature
    fs::path feature_input, feature_out;
    std::string pgm_prefix, csv_prefix;
    CLI::App* feature_cmd = app.add_subcommand("feature", "extract a global feature from a cloud");
    feature_cmd->add_option("input", feature_input, "point cloud (.pcd/.ply/.xyz)")->required();
    feature_cmd->add_option("--out", feature_out, "output .feat path");
    feature_cmd->add_option("--pgm", pgm_prefix, "also write <prefix>.<view>.pgm images");
    feature_cmd->add_option("--csv", csv_prefix, "also write <prefix>.<view>.csv grids");
    add_feature_flags(feature_cmd);

    // protocol
    fs::path protocol_config_path, protocol_out;
    std::vector<std::uint64_t> protocol_seeds;
    double threshold = -1.0;
    int window_factor = -1, max_stall = -1;
    bool external_features = false;
    CLI::App* protocol_cmd =
        app.add_subcommand("protocol", "run simulated-teacher experiments over a dataset");
    protocol_cmd->add_option("--config", protocol_config_path, "key = value run configuration")
        ->required();
    protocol_cmd->add_option("--out", protocol_out, "output directory (overrides config)");
    protocol_cmd->add_option("--seed", protocol_seeds, "seeds (override config)");
    protocol_cmd->add_option("--threshold", threshold, "introduction accuracy threshold");
    protocol_cmd->add_option("--window-factor", window_factor, "accuracy window factor");
    protocol_cmd->add_option("--max-stall", max_stall, "stall factor (asks per known category)");
    protocol_cmd->add_option("--metric", metric_name_arg, "euclidean|cosine|chisquare");
    protocol_cmd->add_option("--tau-unknown", tau_arg, "rejection threshold or 'inf'");
    protocol_cmd->add_flag("--external-features", external_features,
                           "dataset holds precomputed per-view .feat files");
    add_feature_flags(protocol_cmd);

    // teach
    fs::path memory_file;
    CLI::App* teach_cmd = app.add_subcommand("teach", "interactive teach/ask session on stdin");
    teach_cmd->add_option("--memory", memory_file, "memory snapshot to load if present");
    teach_cmd->add_option("--metric", metric_name_arg, "euclidean|cosine|chisquare");
    teach_cmd->add_option("--tau-unknown", tau_arg, "rejection threshold or 'inf'");
    add_feature_flags(teach_cmd);

    // grasp
    CLI::App* grasp_cmd = app.add_subcommand("grasp", "grasp template learning and retrieval");
    grasp_cmd->require_subcommand(1);
    fs::path store_path, grasp_cloud;
    std::string grasp_label;
    std::vector<double> grasp_pose;
    double tau_familiar = 0.25;
    CLI::App* grasp_learn = grasp_cmd->add_subcommand("learn", "store a demonstrated grasp");
    grasp_learn->add_option("--store", store_path, "template store JSON")->required();
    grasp_learn->add_option("--label", grasp_label, "affordance label")->required();
    grasp_learn->add_option("--pose", grasp_pose, "px py pz qw qx qy qz (world frame)")
        ->expected(7)
        ->required();
    grasp_learn->add_option("cloud", grasp_cloud, "demonstration cloud")->required();
    add_feature_flags(grasp_learn);
    CLI::App* grasp_query = grasp_cmd->add_subcommand("query", "retrieve a grasp for a cloud");
    grasp_query->add_option("--store", store_path, "template store JSON")->required();
    grasp_query->add_option("--tau", tau_familiar, "familiarity threshold");
    grasp_query->add_option("cloud", grasp_cloud, "query cloud")->required();
    add_feature_flags(grasp_query);

    // genset
    fs::path genset_out;
    std::size_t gen_categories = 10, gen_instances = 30, gen_points = 1500;
    std::uint64_t gen_seed = 0;
    std::string gen_format = "pcd";
    CLI::App* genset_cmd =
        app.add_subcommand("genset", "write a synthetic category dataset to disk");
    genset_cmd->add_option("--out", genset_out, "dataset root directory")->required();
    genset_cmd->add_option("--categories", gen_categories, "number of categories (<= 10)");
    genset_cmd->add_option("--instances", gen_instances, "instances per category");
    genset_cmd->add_option("--points", gen_points, "points per instance");
    genset_cmd->add_option("--seed", gen_seed, "dataset seed");
    genset_cmd->add_option("--format", gen_format, "pcd|ply|xyz");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        feat.resolution_w = feat.resolution_h = resolution;
        if (feature_cmd->parsed()) {
            feat.validate();
            return cmd_feature(feature_input, feature_out, feat, pgm_prefix, csv_prefix);
        }
        if (protocol_cmd->parsed()) {
            RunConfig cfg = load_run_config(protocol_config_path);
            if (protocol_cmd->count("--resolution")) {
                cfg.features.resolution_w = cfg.features.resolution_h = resolution;
            }
            if (protocol_cmd->count("--blocks")) cfg.features.blocks = feat.blocks;
            if (!protocol_out.empty()) cfg.out_dir = protocol_out;
            if (!protocol_seeds.empty()) cfg.seeds = protocol_seeds;
            if (threshold >= 0.0) cfg.protocol.intro_threshold = threshold;
            if (window_factor > 0) {
                cfg.protocol.window_factor = static_cast<std::uint32_t>(window_factor);
            }
            if (max_stall > 0) cfg.protocol.max_stall = static_cast<std::uint32_t>(max_stall);
            if (protocol_cmd->count("--metric")) {
                cfg.protocol.metric = metric_from_name(metric_name_arg);
            }
            if (protocol_cmd->count("--tau-unknown")) {
                cfg.protocol.tau_unknown = parse_tau(tau_arg);
            }
            if (external_features) cfg.external_features = true;
            return cmd_protocol(std::move(cfg));
        }
        if (teach_cmd->parsed()) {
            feat.validate();
            return cmd_teach_repl(feat, metric_from_name(metric_name_arg), parse_tau(tau_arg),
                                  memory_file);
        }
        if (grasp_learn->parsed()) {
            feat.validate();
            return cmd_grasp_learn(store_path, grasp_cloud, grasp_label, grasp_pose, feat);
        }
        if (grasp_query->parsed()) {
            feat.validate();
            return cmd_grasp_query(store_path, grasp_cloud, tau_familiar, feat);
        }
        if (genset_cmd->parsed()) {
            return cmd_genset(genset_out, gen_categories, gen_instances, gen_points, gen_seed,
                              gen_format);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
