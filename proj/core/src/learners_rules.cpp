#include <algorithm>
#include <map>

#include "learner_impl.hpp"

namespace btprint::detail {

using nlohmann::json;

namespace {

constexpr std::size_t kOneRMinBucket = 6;
constexpr std::size_t kTableBins = 8;
constexpr std::size_t kTableMaxFeatures = 5;

std::size_t majority(const std::vector<std::size_t>& counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[best]) best = c;
    return best;
}

/// Single-feature interval rule. Interval i covers values up to
/// upper_bounds[i]; the last interval is unbounded.
struct OneRParams final : ModelParameters {
    std::size_t n_classes = 0;
    std::size_t feature = 0;
    std::vector<double> upper_bounds;   // size = intervals - 1
    std::vector<std::size_t> labels;    // size = intervals

    std::vector<double> class_scores(std::span<const double> x) const override {
        const double v = x[feature];
        std::size_t i = 0;
        while (i < upper_bounds.size() && v > upper_bounds[i]) ++i;
        std::vector<double> scores(n_classes, 0.0);
        scores[labels[i]] = 1.0;
        return scores;
    }

    std::string params_json() const override {
        json j;
        j["min_bucket"] = kOneRMinBucket;
        j["n_classes"] = n_classes;
        j["feature"] = feature;
        j["upper_bounds"] = doubles_to_json(upper_bounds);
        j["labels"] = labels;
        return j.dump();
    }
};

struct OneRRule {
    std::vector<double> bounds;
    std::vector<std::size_t> labels;
    std::size_t errors = 0;
};

OneRRule one_r_for_feature(const FitInput& in, std::size_t feature) {
    const std::size_t n = in.n();
    std::vector<std::pair<double, std::size_t>> pairs(n);
    for (std::size_t i = 0; i < n; ++i) pairs[i] = {in.x(i, feature), in.y[i]};
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    // Holte-style partition: close an interval once its majority class has
    // at least min_bucket instances and the value changes.
    std::vector<std::vector<std::size_t>> interval_counts;
    std::vector<double> bounds;
    std::vector<std::size_t> counts(in.n_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[pairs[i].second];
        const bool can_close = i + 1 < n && pairs[i + 1].first != pairs[i].first;
        if (can_close && counts[majority(counts)] >= kOneRMinBucket) {
            interval_counts.push_back(counts);
            bounds.push_back(0.5 * (pairs[i].first + pairs[i + 1].first));
            std::fill(counts.begin(), counts.end(), 0);
        }
    }
    interval_counts.push_back(counts);

    // Merge neighbors that elect the same class.
    OneRRule rule;
    for (std::size_t i = 0; i < interval_counts.size(); ++i) {
        const std::size_t label = majority(interval_counts[i]);
        if (!rule.labels.empty() && rule.labels.back() == label) {
            // Drop the boundary between the runs; keep this interval's own.
            if (i < bounds.size())
                rule.bounds.back() = bounds[i];
            else
                rule.bounds.pop_back();
        } else {
            rule.labels.push_back(label);
            if (i < bounds.size()) rule.bounds.push_back(bounds[i]);
        }
        std::size_t total = 0;
        for (std::size_t c : interval_counts[i]) total += c;
        rule.errors += total - interval_counts[i][label];
    }
    return rule;
}

/// Exact-match lookup over discretized selected features.
struct DecisionTableParams final : ModelParameters {
    std::size_t n_classes = 0;
    std::vector<std::size_t> features;
    std::vector<double> mins, maxs;  // aligned with features
    std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> cells;
    std::vector<std::size_t> global_counts;

    std::uint8_t bin_of(double v, std::size_t slot) const {
        const double lo = mins[slot], hi = maxs[slot];
        if (!(hi > lo)) return 0;
        const double t = (v - lo) / (hi - lo) * static_cast<double>(kTableBins);
        if (t <= 0.0) return 0;
        if (t >= static_cast<double>(kTableBins)) return kTableBins - 1;
        return static_cast<std::uint8_t>(t);
    }

    std::vector<std::uint8_t> key_of(std::span<const double> x) const {
        std::vector<std::uint8_t> key(features.size());
        for (std::size_t s = 0; s < features.size(); ++s) key[s] = bin_of(x[features[s]], s);
        return key;
    }

    std::vector<double> class_scores(std::span<const double> x) const override {
        auto it = cells.find(key_of(x));
        const std::vector<std::size_t>& counts = it != cells.end() ? it->second : global_counts;
        std::vector<double> scores(n_classes, 0.0);
        scores[majority(counts)] = 1.0;
        return scores;
    }

    std::string params_json() const override {
        json j;
        j["bins"] = kTableBins;
        j["max_features"] = kTableMaxFeatures;
        j["n_classes"] = n_classes;
        j["features"] = features;
        j["min"] = doubles_to_json(mins);
        j["max"] = doubles_to_json(maxs);
        j["global_counts"] = global_counts;
        json cj = json::array();
        for (const auto& [key, counts] : cells) {
            json e;
            e["key"] = key;
            e["counts"] = counts;
            cj.push_back(std::move(e));
        }
        j["cells"] = std::move(cj);
        return j.dump();
    }
};

}  // namespace

ParamsPtr fit_one_r(const FitInput& in) {
    auto p = std::make_shared<OneRParams>();
    p->n_classes = in.n_classes;
    OneRRule best;
    bool have = false;
    for (std::size_t f = 0; f < in.dim; ++f) {
        OneRRule rule = one_r_for_feature(in, f);
        if (!have || rule.errors < best.errors) {
            best = std::move(rule);
            p->feature = f;
            have = true;
        }
    }
    p->upper_bounds = std::move(best.bounds);
    p->labels = std::move(best.labels);
    return p;
}

ParamsPtr fit_decision_table(const FitInput& in) {
    auto p = std::make_shared<DecisionTableParams>();
    const std::size_t n = in.n();
    p->n_classes = in.n_classes;
    p->global_counts.assign(in.n_classes, 0);
    for (std::size_t i = 0; i < n; ++i) ++p->global_counts[in.y[i]];

    std::vector<double> all_mins(in.dim), all_maxs(in.dim);
    for (std::size_t f = 0; f < in.dim; ++f) {
        double lo = in.x(0, f), hi = in.x(0, f);
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, in.x(i, f));
            hi = std::max(hi, in.x(i, f));
        }
        all_mins[f] = lo;
        all_maxs[f] = hi;
    }

    // Greedy forward selection on resubstitution accuracy of the table.
    auto table_hits = [&](const std::vector<std::size_t>& feats) {
        DecisionTableParams probe;
        probe.n_classes = in.n_classes;
        probe.features = feats;
        for (std::size_t f : feats) {
            probe.mins.push_back(all_mins[f]);
            probe.maxs.push_back(all_maxs[f]);
        }
        std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> cells;
        for (std::size_t i = 0; i < n; ++i) {
            auto key = probe.key_of(in.row(i));
            auto& counts = cells[key];
            if (counts.empty()) counts.assign(in.n_classes, 0);
            ++counts[in.y[i]];
        }
        std::size_t hits = 0;
        for (const auto& [key, counts] : cells) hits += counts[majority(counts)];
        return std::pair(hits, std::move(cells));
    };

    std::vector<std::size_t> selected;
    std::size_t best_hits = p->global_counts[majority(p->global_counts)];
    while (selected.size() < kTableMaxFeatures) {
        std::size_t best_f = in.dim;
        std::size_t round_hits = best_hits;
        for (std::size_t f = 0; f < in.dim; ++f) {
            if (std::find(selected.begin(), selected.end(), f) != selected.end()) continue;
            auto candidate = selected;
            candidate.push_back(f);
            const auto [hits, cells] = table_hits(candidate);
            if (hits > round_hits) {
                round_hits = hits;
                best_f = f;
            }
        }
        if (best_f == in.dim) break;  // no strict improvement
        selected.push_back(best_f);
        best_hits = round_hits;
    }

    p->features = selected;
    for (std::size_t f : selected) {
        p->mins.push_back(all_mins[f]);
        p->maxs.push_back(all_maxs[f]);
    }
    p->cells = table_hits(selected).second;
    return p;
}

ParamsPtr rules_params_from_json(AlgorithmId id, const json& j) {
    if (id == AlgorithmId::OneR) {
        auto p = std::make_shared<OneRParams>();
        p->n_classes = j.at("n_classes").get<std::size_t>();
        p->feature = j.at("feature").get<std::size_t>();
        p->upper_bounds = doubles_from_json(j.at("upper_bounds"));
        p->labels = j.at("labels").get<std::vector<std::size_t>>();
        return p;
    }
    auto p = std::make_shared<DecisionTableParams>();
    p->n_classes = j.at("n_classes").get<std::size_t>();
    p->features = j.at("features").get<std::vector<std::size_t>>();
    p->mins = doubles_from_json(j.at("min"));
    p->maxs = doubles_from_json(j.at("max"));
    p->global_counts = j.at("global_counts").get<std::vector<std::size_t>>();
    for (const json& e : j.at("cells"))
        p->cells[e.at("key").get<std::vector<std::uint8_t>>()] =
            e.at("counts").get<std::vector<std::size_t>>();
    return p;
}

}  // namespace btprint::detail
