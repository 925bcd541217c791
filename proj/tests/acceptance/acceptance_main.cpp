// Acceptance suite: every criterion prints one PASS/FAIL line; the exit
// code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "btprint/btsnoop.hpp"
#include "btprint/canonical.hpp"
#include "btprint/demux.hpp"
#include "btprint/metrics.hpp"
#include "btprint/selection.hpp"
#include "btprint/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace btprint;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << ": criterion " << criterion << " — " << detail
              << "\n";
    if (!pass) ++failures;
}

std::size_t jobs() {
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<LabeledSession> fleet_sessions(const std::vector<DeviceProfile>& fleet,
                                           std::size_t sessions_per_profile,
                                           std::size_t messages, std::uint64_t seed) {
    std::vector<LabeledSession> sessions;
    for (const DeviceProfile& p : fleet)
        for (std::size_t i = 0; i < sessions_per_profile; ++i) {
            const std::uint64_t s = derive_seed(seed, p.name, std::to_string(i));
            LabeledSession ls;
            ls.label = p.name;
            ls.session_id = p.name + "-s" + std::to_string(i);
            ls.packets = generate_session(p, messages + s % 21 - 10, s);
            sessions.push_back(std::move(ls));
        }
    return sessions;
}

struct BestCell {
    const GridCell* cell = nullptr;
    TrainedModel model;
    EvaluationReport validation_report;
};

BestCell refit_best(const std::vector<LabeledSession>& sessions, const SelectionResult& result,
                    std::uint64_t seed, const SelectionConfig& config) {
    BestCell best;
    for (const GridCell& c : result.grid)
        if (c.algorithm == result.best && c.accuracy &&
            (!best.cell || *c.accuracy > *best.cell->accuracy))
            best.cell = &c;
    const FilterData fd = prepare_filter_data(sessions, best.cell->filter, seed, config);
    best.model = fit(result.best, fd.train,
                     derive_seed(seed, best.cell->filter.name(), to_string(result.best)));
    best.validation_report = evaluate(best.model, fd.validation);
    return best;
}

// ---------------------------------------------------------------- 1
void criterion_1_end_to_end() {
    const auto started = std::chrono::steady_clock::now();

    const auto sessions = fleet_sessions(default_fleet(), 40, 300, 1001);
    const auto algorithms = kAllAlgorithms;
    const auto filters = default_filter_grid();
    SelectionConfig config;
    config.jobs = jobs();

    const SelectionResult result =
        pick_best(sessions, algorithms, filters, 7, config);
    const BestCell best = refit_best(sessions, result, 7, config);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const double acc = best.validation_report.accuracy;
    const double prec = best.validation_report.weighted_avg.precision;
    const double rec = best.validation_report.weighted_avg.recall;

    std::ostringstream detail;
    detail << "end-to-end: elected " << to_string(result.best) << " on "
           << best.cell->filter.name() << ", accuracy " << acc << ", weighted precision "
           << prec << ", recall " << rec << ", " << algorithms.size() << "x" << filters.size()
           << " grid in " << int(elapsed) << "s";
    report(1,
           acc >= 0.95 && prec >= 0.95 && rec >= 0.95 && elapsed < 300.0 &&
               algorithms.size() >= 8 && filters.size() >= 10,
           detail.str());
}

// ---------------------------------------------------------------- 2
void criterion_2_election() {
    std::vector<GridCell> grid;
    const char* filters[5] = {"all-all", "all-10", "all-200", "RFCOMM-all", "RFCOMM-10"};
    const AlgorithmId algs[4] = {AlgorithmId::CartTree, AlgorithmId::GaussianNaiveBayes,
                                 AlgorithmId::OneR, AlgorithmId::RandomForest};
    double filler = 0.40;
    for (AlgorithmId a : algs)
        for (const char* f : filters) {
            GridCell c;
            c.algorithm = a;
            c.filter = FilterSpec::from_name(f);
            c.accuracy = filler;
            filler += 0.01;
            grid.push_back(c);
        }
    // plant RandomForest at the top 3 accuracies; ceil(0.15*20) = 3
    grid[15].accuracy = 0.99;
    grid[16].accuracy = 0.98;
    grid[17].accuracy = 0.97;
    const bool planted_ok = elect(grid) == AlgorithmId::RandomForest;

    for (GridCell& c : grid) c.accuracy = 0.9;
    const AlgorithmId first = elect(grid);
    bool tied_ok = true;
    for (int i = 0; i < 10; ++i) tied_ok = tied_ok && elect(grid) == first;

    report(2, planted_ok && tied_ok,
           std::string("election: planted top-3 grid elects RandomForest (") +
               (planted_ok ? "yes" : "no") + "), all-tied grid is stable across 10 reruns (" +
               (tied_ok ? "yes" : "no") + ", winner " + std::string(to_string(first)) + ")");
}

// ---------------------------------------------------------------- 3
void criterion_3_metric_oracle() {
    std::mt19937_64 gen(515);
    std::size_t checked = 0, mismatches = 0;
    for (int round = 0; round < 25; ++round) {
        const std::size_t n_classes = 2 + gen() % 5;
        const std::size_t n = 6 + gen() % 50;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < n_classes; ++c) names.push_back("c" + std::to_string(c));
        ConfusionMatrix m(names);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = gen() % n_classes, p = gen() % n_classes;
            m.add(t, p);
            pairs.emplace_back(t, p);
        }
        const EvaluationReport r = report_from_matrix(m);

        for (std::size_t c = 0; c < n_classes; ++c) {
            double tp = 0, fp = 0, fn = 0, tn = 0;
            for (auto [t, p] : pairs) {
                if (t == c && p == c)
                    ++tp;
                else if (t != c && p == c)
                    ++fp;
                else if (t == c && p != c)
                    ++fn;
                else
                    ++tn;
            }
            const double tp_rate = tp + fn > 0 ? tp / (tp + fn) : 0.0;
            const double fp_rate = fp + tn > 0 ? fp / (fp + tn) : 0.0;
            const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
            const double f_measure =
                precision + tp_rate > 0 ? 2 * precision * tp_rate / (precision + tp_rate) : 0.0;
            const double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
            const double mcc = denom > 0 ? (tp * tn - fp * fn) / denom : 0.0;

            auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
            if (!close(r.per_class[c].tp_rate, tp_rate) ||
                !close(r.per_class[c].fp_rate, fp_rate) ||
                !close(r.per_class[c].precision, precision) ||
                !close(r.per_class[c].recall, tp_rate) ||
                !close(r.per_class[c].f_measure, f_measure) ||
                !close(r.per_class[c].mcc, mcc))
                ++mismatches;
            ++checked;
        }
    }
    report(3, mismatches == 0,
           "metric oracle: " + std::to_string(checked) +
               " class rows across 25 random matrices, mismatches beyond 1e-12: " +
               std::to_string(mismatches));
}

// ---------------------------------------------------------------- 4
void criterion_4_normalization() {
    const auto fleet = default_fleet();
    std::mt19937_64 gen(808);
    const FilterSpec f = FilterSpec::from_name("all-all");
    std::size_t bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const DeviceProfile& p = fleet[gen() % fleet.size()];
        const std::size_t n = 50 + gen() % 350;
        const auto session = generate_session(p, n, gen());
        IatVector iat = extract_iat(session);
        const double t_max = percentile(iat.values, 99.0);
        const Signature s =
            to_features(density_distribution(iat, t_max), p.name, f, "s" + std::to_string(i));
        double sum = 0.0;
        for (double v : s.features) sum += v;
        if (s.features.size() != 300 || std::abs(sum - 1.0) > 1e-9) ++bad;
    }
    report(4, bad == 0,
           "signature normalization: 1000 random sessions, violations: " + std::to_string(bad));
}

// ---------------------------------------------------------------- 5
void criterion_5_round_trip_and_fuzz() {
    const auto fleet = default_fleet();
    std::size_t mismatched_sessions = 0;
    for (int i = 0; i < 200; ++i) {
        const DeviceProfile& p = fleet[i % fleet.size()];
        const auto session = generate_session(p, 120, derive_seed(4242, p.name,
                                                                  std::to_string(i)));
        const auto out = demux_protocols(parse_btsnoop(emit_btsnoop(session)), "rt");
        bool same = out.size() == session.size();
        for (std::size_t k = 0; same && k < out.size(); ++k)
            same = out[k].timestamp_us == session[k].timestamp_us &&
                   out[k].protocol == session[k].protocol &&
                   out[k].length_bytes == session[k].length_bytes;
        if (!same) ++mismatched_sessions;
    }

    const auto base = emit_btsnoop(generate_session(fleet[0], 120, 99));
    std::mt19937_64 gen(7777);
    std::size_t crashes = 0;
    for (int i = 0; i < 10000; ++i) {
        std::vector<std::uint8_t> mutated = base;
        switch (gen() % 5) {
            case 0:  // flip a handful of bytes
                for (int k = 0; k < 1 + int(gen() % 8); ++k)
                    mutated[gen() % mutated.size()] ^= std::uint8_t(1 + gen() % 255);
                break;
            case 1:  // truncate
                mutated.resize(gen() % mutated.size());
                break;
            case 2:  // append junk
                for (int k = 0; k < int(gen() % 64); ++k)
                    mutated.push_back(std::uint8_t(gen()));
                break;
            case 3: {  // stomp a length/flag word
                if (mutated.size() >= 4) {
                    const std::size_t off = gen() % (mutated.size() - 3);
                    for (int k = 0; k < 4; ++k) mutated[off + k] = std::uint8_t(gen());
                }
                break;
            }
            case 4: {  // cut a slice out of the middle
                if (mutated.size() > 40) {
                    const std::size_t at = 16 + gen() % (mutated.size() - 32);
                    const std::size_t len = 1 + gen() % 16;
                    mutated.erase(mutated.begin() + long(at),
                                  mutated.begin() + long(std::min(at + len, mutated.size())));
                }
                break;
            }
        }
        try {
            demux_protocols(parse_btsnoop(mutated), "fuzz");
        } catch (const Error&) {
            // typed rejection is the contract
        } catch (...) {
            ++crashes;
        }
    }
    report(5, mismatched_sessions == 0 && crashes == 0,
           "parser: 200 sessions round-tripped (" + std::to_string(200 - mismatched_sessions) +
               "/200), 10000 mutated files, crashes: " + std::to_string(crashes));
}

// ---------------------------------------------------------------- 6 & 7 (CLI)
void criteria_6_and_7_cli() {
    const fs::path work = fs::temp_directory_path() / "btprint_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path caps = work / "caps";

    auto run = [](const std::string& args) {
        const std::string cmd =
            std::string(BTPRINT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    bool ok6 = false, ok7 = false;
    std::string detail6 = "cli runs failed", detail7 = "cli runs failed";
    if (run("synth --out " + caps.string() + " --sessions 5 --messages 80 --seed 33") == 0) {
        const std::string train = "train " + caps.string() + " " +
                                  (caps / "labels.json").string() +
                                  " --algorithms RandomForest,GaussianNaiveBayes --seed 12 ";
        if (run(train + "--out " + (work / "b1").string()) == 0 &&
            run(train + "--out " + (work / "b2").string()) == 0) {
            // 6: the default grid covers every protocol x length combination
            const json grid = json::parse(slurp(work / "b1" / "grid.json"));
            std::set<std::string> seen;
            for (const json& cell : grid.at("cells"))
                seen.insert(cell.at("filter").get<std::string>());
            std::set<std::string> expected;
            for (const FilterSpec& f : default_filter_grid()) expected.insert(f.name());
            ok6 = seen == expected && expected.size() == 35 && expected.count("RFCOMM-10") &&
                  expected.count("all-all");
            detail6 = "grid.json names " + std::to_string(seen.size()) +
                      "/35 protocol-length filters, canonical naming";

            // 7: byte-identical reruns
            ok7 = slurp(work / "b1" / "report.json") == slurp(work / "b2" / "report.json") &&
                  !slurp(work / "b1" / "report.json").empty();
            detail7 = std::string("cmd_train reruns: report.json byte-identical (") +
                      (ok7 ? "yes" : "no") + ")";
        }
    }
    report(6, ok6, detail6);
    report(7, ok7, detail7);
}

// ---------------------------------------------------------------- 8
void criterion_8_degradation() {
    auto fleet = default_fleet();
    // Merge: the second profile becomes a near-identical copy of the first
    // (1% weight shift on the lead mixture component).
    const std::string merged_name = fleet[1].name;
    fleet[1] = fleet[0];
    fleet[1].name = merged_name;
    fleet[1].iat_model[0].weight -= 0.01;
    fleet[1].iat_model[1].weight += 0.01;

    const auto sessions = fleet_sessions(fleet, 16, 150, 2024);
    const std::vector<AlgorithmId> algorithms{
        AlgorithmId::RandomForest, AlgorithmId::GaussianNaiveBayes, AlgorithmId::CartTree};
    const std::vector<FilterSpec> filters{
        FilterSpec::from_name("all-all"),   FilterSpec::from_name("all-10"),
        FilterSpec::from_name("all-200"),   FilterSpec::from_name("RFCOMM-all"),
        FilterSpec::from_name("RFCOMM-10"), FilterSpec::from_name("L2CAP-all")};
    SelectionConfig config;
    config.jobs = jobs();
    const SelectionResult result = pick_best(sessions, algorithms, filters, 5, config);
    const BestCell best = refit_best(sessions, result, 5, config);
    const EvaluationReport& r = best.validation_report;

    double avg_mcc = 0.0;
    for (const ClassMetrics& cm : r.per_class) avg_mcc += cm.mcc;
    avg_mcc /= double(r.per_class.size());

    double merged_a = 0.0, merged_b = 0.0;
    for (std::size_t c = 0; c < r.class_names.size(); ++c) {
        if (r.class_names[c] == fleet[0].name) merged_a = r.per_class[c].mcc;
        if (r.class_names[c] == merged_name) merged_b = r.per_class[c].mcc;
    }
    std::ostringstream detail;
    detail << "degradation: merged classes MCC " << merged_a << " / " << merged_b
           << " vs fleet average " << avg_mcc;
    report(8, merged_a < avg_mcc && merged_b < avg_mcc, detail.str());
}

}  // namespace

int main() {
    criterion_1_end_to_end();
    criterion_2_election();
    criterion_3_metric_oracle();
    criterion_4_normalization();
    criterion_5_round_trip_and_fuzz();
    criteria_6_and_7_cli();
    criterion_8_degradation();
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures;
}
