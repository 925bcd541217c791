#include "btprint/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "learner_impl.hpp"

namespace btprint {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = 1;
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j)
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (std::thread& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::string> sorted_class_names(std::span<const LabeledSession> sessions) {
    std::set<std::string> names;
    for (const LabeledSession& s : sessions) names.insert(s.label);
    return {names.begin(), names.end()};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view a, std::string_view b) {
    std::uint64_t h = splitmix64(seed ^ fnv1a(a));
    if (!b.empty()) h = splitmix64(h ^ fnv1a(b));
    return h;
}

std::pair<Dataset, Dataset> split_train_validation(const Dataset& ds, double fraction,
                                                   std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split fraction must be in (0,1)");
    ds.validate();

    Dataset train, validation;
    train.class_names = ds.class_names;
    validation.class_names = ds.class_names;

    // Classes are processed in sorted-name order with per-class generators,
    // so the partition does not depend on class_names ordering.
    std::vector<std::string> order = ds.class_names;
    std::sort(order.begin(), order.end());
    for (const std::string& cls : order) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.signatures.size(); ++i)
            if (*ds.signatures[i].label == cls) idx.push_back(i);
        if (idx.size() < 2)
            throw TooFewSessions("class " + cls + " has " + std::to_string(idx.size()) +
                                 " sessions, need at least 2");
        detail::Rng rng(derive_seed(seed, cls));
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(idx.size()) - 1e-9));
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_train ? train : validation).signatures.push_back(ds.signatures[idx[k]]);
    }
    return {std::move(train), std::move(validation)};
}

FilterData prepare_filter_data(std::span<const LabeledSession> sessions, const FilterSpec& f,
                               std::uint64_t seed, const SelectionConfig& config) {
    FilterData fd;
    const std::vector<std::string> class_names = sorted_class_names(sessions);
    fd.train.class_names = class_names;
    fd.validation.class_names = class_names;
    fd.usable_per_class.assign(class_names.size(), 0);

    struct Usable {
        const LabeledSession* session;
        IatVector iat;
    };
    std::vector<Usable> usable;
    for (const LabeledSession& s : sessions) {
        IatVector iat = extract_iat(apply_filter(s.packets, f));
        iat.session_id = s.session_id;
        if (iat.values.size() < 2) continue;  // no density is definable
        auto it = std::find(class_names.begin(), class_names.end(), s.label);
        ++fd.usable_per_class[static_cast<std::size_t>(it - class_names.begin())];
        usable.push_back({&s, std::move(iat)});
    }

    fd.valid = !usable.empty();
    for (std::size_t c : fd.usable_per_class)
        if (c == 0) fd.valid = false;
    if (!fd.valid) return fd;

    // Stratified split over usable sessions; a 1-session class goes wholly
    // to training. Per-class generators keep the partition independent of
    // evaluation order.
    std::vector<std::size_t> train_idx, val_idx;
    for (const std::string& cls : class_names) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < usable.size(); ++i)
            if (usable[i].session->label == cls) idx.push_back(i);
        detail::Rng rng(derive_seed(seed, f.name(), cls));
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(
            std::ceil(config.split_fraction * static_cast<double>(idx.size()) - 1e-9));
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_train ? train_idx : val_idx).push_back(idx[k]);
    }
    if (config.resubstitution) {
        train_idx.clear();
        val_idx.clear();
        for (std::size_t i = 0; i < usable.size(); ++i) {
            train_idx.push_back(i);
            val_idx.push_back(i);
        }
    }
    if (val_idx.empty()) {
        fd.valid = false;
        return fd;
    }

    // The signature grid's upper bound comes from the training split only
    // and is frozen for validation and prediction alike.
    if (config.t_max_policy.kind == TMaxPolicy::Kind::fixed) {
        fd.t_max = config.t_max_policy.fixed_seconds;
    } else {
        std::vector<double> pooled;
        for (std::size_t i : train_idx)
            pooled.insert(pooled.end(), usable[i].iat.values.begin(),
                          usable[i].iat.values.end());
        fd.t_max = percentile(std::move(pooled), 99.0);
    }

    auto signature_of = [&](const Usable& u) {
        const DensityCurve dd = density_distribution(u.iat, fd.t_max, config.estimator);
        return to_features(dd, u.session->label, f, u.session->session_id);
    };
    for (std::size_t i : train_idx) fd.train.signatures.push_back(signature_of(usable[i]));
    for (std::size_t i : val_idx) fd.validation.signatures.push_back(signature_of(usable[i]));
    return fd;
}

AlgorithmId elect(std::span<const GridCell> grid) {
    std::vector<const GridCell*> valid;
    for (const GridCell& c : grid)
        if (c.accuracy) valid.push_back(&c);
    if (valid.empty()) throw NoValidCells("every grid cell is degenerate");

    const auto keep = static_cast<std::size_t>(
        std::ceil(0.15 * static_cast<double>(valid.size())));
    std::stable_sort(valid.begin(), valid.end(), [](const GridCell* a, const GridCell* b) {
        return *a->accuracy > *b->accuracy;
    });
    const double cut = *valid[keep - 1]->accuracy;

    // Ties at the cut are kept in full.
    std::map<AlgorithmId, std::size_t> freq;
    std::map<AlgorithmId, double> best_acc;
    for (const GridCell* c : valid) {
        if (*c->accuracy < cut) break;
        ++freq[c->algorithm];
        auto [it, inserted] = best_acc.try_emplace(c->algorithm, *c->accuracy);
        if (!inserted) it->second = std::max(it->second, *c->accuracy);
    }

    // Most frequent wins; ties go to the higher best accuracy, then to the
    // lower AlgorithmId (the map iterates in id order, so the earlier entry
    // keeps the seat on a full tie).
    AlgorithmId winner{};
    std::size_t winner_freq = 0;
    double winner_best = -1.0;
    bool have = false;
    for (const auto& [alg, count] : freq) {
        const double acc = best_acc.at(alg);
        if (!have || count > winner_freq || (count == winner_freq && acc > winner_best)) {
            winner = alg;
            winner_freq = count;
            winner_best = acc;
            have = true;
        }
    }
    return winner;
}

SelectionResult pick_best(std::span<const LabeledSession> sessions,
                          std::span<const AlgorithmId> algorithms,
                          std::span<const FilterSpec> filters, std::uint64_t seed,
                          const SelectionConfig& config) {
    if (algorithms.empty() || filters.empty())
        throw Error("pick_best needs at least one algorithm and one filter");
    if (sorted_class_names(sessions).size() < 2)
        throw DegenerateDataset("pick_best needs at least 2 classes");

    std::vector<FilterData> per_filter(filters.size());
    parallel_for(filters.size(), config.jobs, [&](std::size_t i) {
        per_filter[i] = prepare_filter_data(sessions, filters[i], seed, config);
    });

    SelectionResult result;
    result.grid.resize(algorithms.size() * filters.size());
    parallel_for(result.grid.size(), config.jobs, [&](std::size_t cell_idx) {
        const std::size_t a = cell_idx / filters.size();
        const std::size_t fi = cell_idx % filters.size();
        const FilterData& fd = per_filter[fi];

        GridCell cell;
        cell.algorithm = algorithms[a];
        cell.filter = filters[fi];
        cell.t_max = fd.t_max;
        cell.train_count = fd.train.signatures.size();
        cell.validation_count = fd.validation.signatures.size();
        if (fd.valid) {
            const TrainedModel model =
                fit(algorithms[a], fd.train,
                    derive_seed(seed, filters[fi].name(), to_string(algorithms[a])));
            cell.accuracy = evaluate(model, fd.validation).accuracy;
        }
        result.grid[cell_idx] = std::move(cell);
    });

    result.best = elect(result.grid);
    return result;
}

ClassificationOutcome classify_unknown(const TrainedModel& m,
                                       std::span<const PacketRecord> session,
                                       double threshold) {
    std::vector<PacketRecord> ordered(session.begin(), session.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                         return a.timestamp_us < b.timestamp_us;
                     });

    ClassificationOutcome out;
    IatVector iat = extract_iat(apply_filter(ordered, m.filter));
    if (iat.values.size() < 2) {
        out.kind = ClassificationOutcome::Kind::unidentified;
        out.reason = "insufficient_data";
        return out;
    }
    const DensityCurve dd = density_distribution(iat, m.t_max);
    const Signature s = to_features(dd, std::nullopt, m.filter, iat.session_id);
    const Prediction pred = predict(m, s);
    if (pred.confidence < threshold) {
        out.kind = ClassificationOutcome::Kind::unidentified;
        out.reason = "low_confidence";
        return out;
    }
    out.kind = ClassificationOutcome::Kind::identified;
    out.label = pred.label;
    out.confidence = pred.confidence;
    return out;
}

}  // namespace btprint
