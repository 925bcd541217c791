// btprint: passive Bluetooth classic device-type fingerprinting.
//
// Subcommands: synth, train, classify, evaluate, inspect.
// Exit codes: 0 success/identified, 2 unreadable input, 3 degenerate
// dataset or empty grid, 4 unidentified.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "btprint/btsnoop.hpp"
#include "btprint/canonical.hpp"
#include "btprint/demux.hpp"
#include "btprint/jsonutil.hpp"
#include "btprint/metrics.hpp"
#include "btprint/selection.hpp"
#include "btprint/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace btprint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnreadable = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitUnidentified = 4;

struct RunConfig {
    std::vector<std::string> filter_names;     // empty = full grid
    std::vector<std::string> algorithm_names;  // empty = all
    double split_fraction = 0.66;
    std::uint64_t seed = 1;
    double threshold = 0.5;
    std::string t_max = "p99";  // "p99" or seconds
    std::string estimator = "kde";
    bool resubstitution = false;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());

    std::vector<FilterSpec> filters() const {
        if (filter_names.empty()) return default_filter_grid();
        std::vector<FilterSpec> out;
        for (const std::string& n : filter_names) out.push_back(FilterSpec::from_name(n));
        return out;
    }

    std::vector<AlgorithmId> algorithms() const {
        if (algorithm_names.empty())
            return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
        std::vector<AlgorithmId> out;
        for (const std::string& n : algorithm_names) out.push_back(algorithm_from_string(n));
        return out;
    }

    SelectionConfig selection() const {
        SelectionConfig c;
        c.split_fraction = split_fraction;
        c.resubstitution = resubstitution;
        c.t_max_policy = t_max == "p99" ? TMaxPolicy::p99()
                                        : TMaxPolicy::fixed(double_from_string(t_max));
        c.estimator = estimator == "histogram" ? DensityEstimator::histogram
                                               : DensityEstimator::gaussian_kde;
        c.jobs = jobs;
        return c;
    }

    json to_json() const {
        json j;
        json fn = json::array();
        for (const FilterSpec& f : filters()) fn.push_back(f.name());
        j["filters"] = std::move(fn);
        json an = json::array();
        for (AlgorithmId a : algorithms()) an.push_back(to_string(a));
        j["algorithms"] = std::move(an);
        j["split_fraction"] = split_fraction;
        j["seed"] = seed;
        j["threshold"] = threshold;
        j["t_max_policy"] = t_max;
        j["estimator"] = estimator;
        j["resubstitution"] = resubstitution;
        return j;
    }
};

void add_config_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--filters", cfg.filter_names,
                    "Comma-separated filter names, e.g. RFCOMM-10,all-all (default: full grid)")
        ->delimiter(',');
    cmd->add_option("--algorithms", cfg.algorithm_names,
                    "Comma-separated algorithm names (default: all)")
        ->delimiter(',');
    cmd->add_option("--split", cfg.split_fraction, "Training fraction (default 0.66)");
    cmd->add_option("--seed", cfg.seed, "Master seed (env BTPRINT_SEED overrides)");
    cmd->add_option("--threshold", cfg.threshold, "Unidentified confidence threshold");
    cmd->add_option("--t-max", cfg.t_max, "Signature grid bound: p99 or seconds");
    cmd->add_option("--jobs", cfg.jobs, "Worker threads for the grid");
    cmd->add_option("--estimator", cfg.estimator, "Density estimator: kde or histogram")
        ->check(CLI::IsMember({"kde", "histogram"}));
    cmd->add_flag("--resubstitution", cfg.resubstitution,
                  "Score each cell on its own training signatures");
}

void apply_seed_env(RunConfig& cfg) {
    if (const char* env = std::getenv("BTPRINT_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw Error(std::string("BTPRINT_SEED is not an integer: ") + env);
        }
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

bool looks_like_btsnoop(std::string_view bytes) {
    return bytes.size() >= 8 && bytes.substr(0, 8) == std::string_view("btsnoop\0", 8);
}

/// Loads one capture file (btsnoop or canonical JSONL), time-ordered.
std::vector<PacketRecord> load_capture(const fs::path& path, DemuxStats* stats = nullptr) {
    const std::string bytes = read_file(path);
    if (looks_like_btsnoop(bytes)) {
        const auto raw = parse_btsnoop(
            std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
        return demux_protocols(raw, path.stem().string(), stats);
    }
    auto records = read_canonical(bytes);
    std::stable_sort(records.begin(), records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                         return a.timestamp_us < b.timestamp_us;
                     });
    return records;
}

/// Labels file {"<filename>": "<class>"} resolved against captures_dir.
std::vector<LabeledSession> load_labeled_sessions(const fs::path& captures_dir,
                                                  const fs::path& labels_file) {
    const json labels = json::parse(read_file(labels_file));
    if (!labels.is_object()) throw Error("labels file must be a JSON object");
    std::vector<LabeledSession> sessions;
    for (const auto& [filename, cls] : labels.items()) {
        LabeledSession s;
        s.session_id = fs::path(filename).stem().string();
        s.label = cls.get<std::string>();
        s.packets = load_capture(captures_dir / filename);
        sessions.push_back(std::move(s));
    }
    return sessions;
}

json grid_to_json(const SelectionResult& result, const RunConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["run_config"] = cfg.to_json();
    j["elected_algorithm"] = to_string(result.best);
    json cells = json::array();
    for (const GridCell& c : result.grid) {
        json jc;
        jc["algorithm"] = to_string(c.algorithm);
        jc["filter"] = c.filter.name();
        jc["accuracy"] = c.accuracy ? json(*c.accuracy) : json(nullptr);
        jc["train_count"] = c.train_count;
        jc["validation_count"] = c.validation_count;
        jc["t_max"] = double_to_string(c.t_max);
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);

    // Best filters of the elected algorithm, accuracy in percent.
    std::vector<const GridCell*> elected;
    for (const GridCell& c : result.grid)
        if (c.algorithm == result.best && c.accuracy) elected.push_back(&c);
    std::stable_sort(elected.begin(), elected.end(),
                     [](const GridCell* a, const GridCell* b) {
                         return *a->accuracy > *b->accuracy;
                     });
    json top10 = json::array();
    for (std::size_t i = 0; i < elected.size() && i < 10; ++i)
        top10.push_back({{"filter", elected[i]->filter.name()},
                         {"accuracy_percent", *elected[i]->accuracy * 100.0}});
    j["top10"] = std::move(top10);
    return j;
}

int cmd_train(const fs::path& captures_dir, const fs::path& labels_file, const fs::path& out_dir,
              const RunConfig& cfg, bool pretty) {
    std::vector<LabeledSession> sessions;
    try {
        sessions = load_labeled_sessions(captures_dir, labels_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }

    try {
        const auto algorithms = cfg.algorithms();
        const auto filters = cfg.filters();
        const SelectionConfig sel = cfg.selection();
        const SelectionResult result = pick_best(sessions, algorithms, filters, cfg.seed, sel);

        // Best filter of the elected algorithm; refit on that cell's full
        // training split with the cell's own seed, so the saved model is the
        // one the grid measured.
        const GridCell* best_cell = nullptr;
        for (const GridCell& c : result.grid)
            if (c.algorithm == result.best && c.accuracy &&
                (!best_cell || *c.accuracy > *best_cell->accuracy))
                best_cell = &c;
        if (!best_cell) throw NoValidCells("elected algorithm has no valid cell");

        const FilterData fd = prepare_filter_data(sessions, best_cell->filter, cfg.seed, sel);
        const TrainedModel model =
            fit(result.best, fd.train,
                derive_seed(cfg.seed, best_cell->filter.name(), to_string(result.best)));
        const EvaluationReport report = evaluate(model, fd.validation);

        fs::create_directories(out_dir);
        json model_json = json::parse(model_to_json(model));
        model_json["run_config"] = cfg.to_json();
        write_file(out_dir / "model.json", model_json.dump(2) + "\n");
        write_file(out_dir / "grid.json", grid_to_json(result, cfg).dump(2) + "\n");
        json report_json = json::parse(report_to_json(report));
        report_json["run_config"] = cfg.to_json();
        write_file(out_dir / "report.json", report_json.dump(2) + "\n");
        json signatures_json = json::parse(signature_batch_to_json(fd.train.signatures));
        signatures_json["run_config"] = cfg.to_json();
        write_file(out_dir / "signatures.json", signatures_json.dump(2) + "\n");

        json summary;
        summary["algorithm"] = to_string(result.best);
        summary["filter"] = best_cell->filter.name();
        summary["validation_accuracy"] = report.accuracy;
        summary["bundle"] = out_dir.string();
        std::cout << summary.dump() << "\n";
        if (pretty) std::cout << report_to_table(report);
        return kExitOk;
    } catch (const DegenerateDataset& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const NoValidCells& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const TooFewSessions& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }
}

int cmd_classify(const fs::path& capture, const fs::path& bundle, double threshold) {
    TrainedModel model;
    try {
        model = model_from_json(read_file(bundle / "model.json"));
    } catch (const std::exception& e) {
        std::cerr << "error: cannot load model bundle: " << e.what() << "\n";
        return kExitUnreadable;
    }
    std::vector<PacketRecord> records;
    try {
        records = load_capture(capture);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }

    const ClassificationOutcome outcome = classify_unknown(model, records, threshold);
    json verdict;
    verdict["session"] = capture.stem().string();
    if (outcome.kind == ClassificationOutcome::Kind::identified) {
        verdict["verdict"] = "identified";
        verdict["label"] = outcome.label;
        verdict["confidence"] = outcome.confidence;
    } else {
        verdict["verdict"] = "unidentified";
        verdict["reason"] = outcome.reason;
    }
    std::cout << verdict.dump() << "\n";
    return outcome.kind == ClassificationOutcome::Kind::identified ? kExitOk
                                                                   : kExitUnidentified;
}

int cmd_evaluate(const fs::path& captures_dir, const fs::path& labels_file,
                 const fs::path& bundle, const RunConfig& cfg, bool pretty) {
    TrainedModel model;
    std::vector<LabeledSession> sessions;
    try {
        model = model_from_json(read_file(bundle / "model.json"));
        sessions = load_labeled_sessions(captures_dir, labels_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }

    try {
        Dataset ds;
        ds.class_names = model.class_names;
        std::size_t skipped = 0;
        for (const LabeledSession& s : sessions) {
            IatVector iat = extract_iat(apply_filter(s.packets, model.filter));
            iat.session_id = s.session_id;
            if (iat.values.size() < 2) {
                ++skipped;
                continue;
            }
            const DensityCurve dd = density_distribution(iat, model.t_max,
                                                         cfg.selection().estimator);
            ds.signatures.push_back(to_features(dd, s.label, model.filter, s.session_id));
        }
        if (skipped > 0)
            std::cerr << "note: " << skipped
                      << " session(s) had too few packets after filtering and were skipped\n";
        const EvaluationReport report = evaluate(model, ds);
        json j = json::parse(report_to_json(report));
        j["run_config"] = cfg.to_json();
        j["skipped_sessions"] = skipped;
        std::cout << j.dump(2) << "\n";
        if (pretty) std::cout << report_to_table(report);
        return kExitOk;
    } catch (const EmptyDataset& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    }
}

int cmd_synth(const std::string& fleet_spec, std::size_t sessions_per_profile,
              std::size_t messages, std::uint64_t seed, const fs::path& out_dir,
              const std::string& format) {
    std::vector<DeviceProfile> fleet;
    try {
        fleet = fleet_spec == "builtin" ? default_fleet() : fleet_from_json(read_file(fleet_spec));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }

    fs::create_directories(out_dir);
    json labels;
    for (const DeviceProfile& profile : fleet) {
        for (std::size_t i = 0; i < sessions_per_profile; ++i) {
            const std::uint64_t session_seed =
                derive_seed(seed, profile.name, std::to_string(i));
            // "about N messages": jitter the count a little per session
            const std::size_t n =
                messages > 20 ? messages + session_seed % 21 - 10 : messages;
            auto session = generate_session(profile, n, session_seed);

            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "-s%03zu", i);
            const std::string stem = profile.name + suffix;
            std::string filename;
            if (format == "jsonl") {
                filename = stem + ".jsonl";
                for (PacketRecord& r : session) r.session_id = stem;
                write_file(out_dir / filename, write_canonical(session));
            } else {
                filename = stem + ".btsnoop";
                const auto bytes = emit_btsnoop(session);
                write_file(out_dir / filename,
                           std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                            bytes.size()));
            }
            labels[filename] = profile.name;
        }
    }
    write_file(out_dir / "labels.json", labels.dump(2) + "\n");

    json summary;
    summary["profiles"] = fleet.size();
    summary["sessions_per_profile"] = sessions_per_profile;
    summary["out"] = out_dir.string();
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

int cmd_inspect(const fs::path& capture) {
    try {
        DemuxStats stats;
        const auto records = load_capture(capture, &stats);
        json counts;
        for (Protocol p :
             {Protocol::HCI_ACL, Protocol::L2CAP, Protocol::RFCOMM, Protocol::SDP,
              Protocol::OTHER}) {
            std::size_t n = 0;
            for (const PacketRecord& r : records)
                if (r.protocol == p) ++n;
            counts[std::string(to_string(p))] = n;
        }
        json j;
        j["file"] = capture.string();
        j["records"] = records.size();
        j["protocols"] = std::move(counts);
        if (!records.empty())
            j["duration_us"] = records.back().timestamp_us - records.front().timestamp_us;
        j["demux"] = {{"malformed_l2cap", stats.malformed_l2cap},
                      {"signaling_pdus", stats.signaling_pdus},
                      {"continuation_fragments", stats.continuation_fragments},
                      {"abandoned_reassemblies", stats.abandoned_reassemblies}};
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive Bluetooth classic device-type fingerprinting"};
    app.require_subcommand(1);

    RunConfig cfg;
    bool pretty = false;

    auto* synth = app.add_subcommand("synth", "Generate synthetic capture sessions");
    std::string fleet_spec = "builtin";
    std::size_t sessions_per_profile = 40;
    std::size_t messages = 300;
    std::string synth_format = "btsnoop";
    fs::path synth_out = "captures";
    synth->add_option("--fleet", fleet_spec, "Fleet JSON file, or 'builtin'");
    synth->add_option("--sessions", sessions_per_profile, "Sessions per profile (default 40)");
    synth->add_option("--messages", messages, "Messages per session (default ~300)");
    synth->add_option("--seed", cfg.seed, "Master seed (env BTPRINT_SEED overrides)");
    synth->add_option("--format", synth_format, "btsnoop or jsonl")
        ->check(CLI::IsMember({"btsnoop", "jsonl"}));
    synth->add_option("--out", synth_out, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Run the algorithm-election grid and save a model");
    fs::path train_captures, train_labels, train_out = "bundle";
    train->add_option("captures_dir", train_captures, "Directory of capture files")->required();
    train->add_option("labels_file", train_labels, "JSON {\"<filename>\": \"<class>\"}")
        ->required();
    train->add_option("--out", train_out, "Bundle output directory")->required();
    add_config_flags(train, cfg);
    train->add_flag("--pretty", pretty, "Also print the metric table");

    auto* classify = app.add_subcommand("classify", "Classify one capture against a bundle");
    fs::path classify_capture, classify_bundle;
    classify->add_option("capture", classify_capture, "Capture file")->required();
    classify->add_option("bundle", classify_bundle, "Model bundle directory")->required();
    classify->add_option("--threshold", cfg.threshold, "Confidence threshold (default 0.5)");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a bundle on labeled captures");
    fs::path eval_captures, eval_labels, eval_bundle;
    evaluate->add_option("captures_dir", eval_captures, "Directory of capture files")->required();
    evaluate->add_option("labels_file", eval_labels, "JSON labels file")->required();
    evaluate->add_option("bundle", eval_bundle, "Model bundle directory")->required();
    evaluate->add_option("--estimator", cfg.estimator, "kde or histogram")
        ->check(CLI::IsMember({"kde", "histogram"}));
    evaluate->add_flag("--pretty", pretty, "Also print the metric table");

    auto* inspect = app.add_subcommand("inspect", "Summarize a capture file");
    fs::path inspect_capture;
    inspect->add_option("capture", inspect_capture, "Capture file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        apply_seed_env(cfg);
        if (synth->parsed())
            return cmd_synth(fleet_spec, sessions_per_profile, messages, cfg.seed, synth_out,
                             synth_format);
        if (train->parsed())
            return cmd_train(train_captures, train_labels, train_out, cfg, pretty);
        if (classify->parsed())
            return cmd_classify(classify_capture, classify_bundle, cfg.threshold);
        if (evaluate->parsed())
            return cmd_evaluate(eval_captures, eval_labels, eval_bundle, cfg, pretty);
        if (inspect->parsed()) return cmd_inspect(inspect_capture);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    }
    return kExitOk;
}
