#include <algorithm>
#include <cmath>

#include "learner_impl.hpp"

namespace btprint::detail {

using nlohmann::json;

namespace {

constexpr std::size_t kCartMinLeaf = 2;
constexpr std::size_t kForestTrees = 100;
constexpr double kGiniEps = 1e-12;

/// Flat binary tree; leaves carry the training class distribution.
struct Tree {
    struct Node {
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0;   // 0 = leaf (root is never a child)
        std::size_t right = 0;
        std::vector<double> distribution;  // leaves only
    };
    std::vector<Node> nodes;

    const std::vector<double>& leaf_distribution(std::span<const double> x) const {
        std::size_t i = 0;
        while (nodes[i].left != 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].distribution;
    }

    json to_json() const {
        json arr = json::array();
        for (const Node& n : nodes) {
            json jn;
            if (n.left != 0) {
                jn["feature"] = n.feature;
                jn["threshold"] = double_to_string(n.threshold);
                jn["left"] = n.left;
                jn["right"] = n.right;
            } else {
                jn["distribution"] = doubles_to_json(n.distribution);
            }
            arr.push_back(std::move(jn));
        }
        return arr;
    }

    static Tree from_json(const json& arr) {
        Tree t;
        for (const json& jn : arr) {
            Node n;
            if (jn.contains("feature")) {
                n.feature = jn.at("feature").get<std::size_t>();
                n.threshold = double_from_string(jn.at("threshold").get<std::string>());
                n.left = jn.at("left").get<std::size_t>();
                n.right = jn.at("right").get<std::size_t>();
            } else {
                n.distribution = doubles_from_json(jn.at("distribution"));
            }
            t.nodes.push_back(std::move(n));
        }
        return t;
    }
};

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;  // weighted child gini
};

/// Best (feature, threshold) over candidate features by weighted child
/// Gini. Thresholds are midpoints between consecutive distinct values; a
/// candidate is valid when both sides hold at least min_leaf rows. Ties keep
/// the first candidate in list order. Scanning stops once `consider`
/// features were examined and some valid split exists, so subset-sampled
/// nodes still split whenever any feature can (constant columns do not
/// blind the node).
Split best_split(const FitInput& in, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& features, std::size_t min_leaf,
                 std::size_t consider) {
    const std::size_t n = rows.size();
    Split best;
    std::vector<std::pair<double, std::size_t>> column(n);
    std::vector<std::size_t> left_counts(in.n_classes), right_counts(in.n_classes);

    for (std::size_t fi = 0; fi < features.size(); ++fi) {
        if (fi >= consider && best.found) break;
        const std::size_t f = features[fi];
        for (std::size_t i = 0; i < n; ++i) column[i] = {in.x(rows[i], f), in.y[rows[i]]};
        std::sort(column.begin(), column.end());

        std::fill(left_counts.begin(), left_counts.end(), 0);
        std::fill(right_counts.begin(), right_counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) ++right_counts[column[i].second];

        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left_counts[column[i].second];
            --right_counts[column[i].second];
            if (column[i].first == column[i + 1].first) continue;
            const std::size_t n_left = i + 1, n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double score = (static_cast<double>(n_left) * gini(left_counts, n_left) +
                                  static_cast<double>(n_right) * gini(right_counts, n_right)) /
                                 static_cast<double>(n);
            if (!best.found || score < best.score - kGiniEps) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (column[i].first + column[i + 1].first);
                best.score = score;
            }
        }
    }
    return best;
}

std::vector<double> distribution_of(const FitInput& in, const std::vector<std::size_t>& rows) {
    std::vector<double> dist(in.n_classes, 0.0);
    for (std::size_t r : rows) dist[in.y[r]] += 1.0;
    for (double& v : dist) v /= static_cast<double>(rows.size());
    return dist;
}

/// Recursive CART construction. feature_picker selects the candidate
/// feature set per node (all features, or a random subset for forests).
template <typename FeaturePicker>
void grow(Tree& tree, std::size_t node_idx, const FitInput& in, std::vector<std::size_t> rows,
          std::size_t min_leaf, std::size_t max_depth, std::size_t depth, std::size_t consider,
          FeaturePicker&& feature_picker) {
    std::vector<std::size_t> counts(in.n_classes, 0);
    for (std::size_t r : rows) ++counts[in.y[r]];
    const double node_gini = gini(counts, rows.size());

    auto make_leaf = [&]() { tree.nodes[node_idx].distribution = distribution_of(in, rows); };

    if (node_gini <= 0.0 || rows.size() < 2 * min_leaf || depth >= max_depth) {
        make_leaf();
        return;
    }
    const Split split = best_split(in, rows, feature_picker(), min_leaf, consider);
    if (!split.found || split.score >= node_gini - kGiniEps) {
        make_leaf();
        return;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
        (in.x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[node_idx].feature = split.feature;
    tree.nodes[node_idx].threshold = split.threshold;
    const std::size_t left = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[node_idx].left = left;
    grow(tree, left, in, std::move(left_rows), min_leaf, max_depth, depth + 1, consider,
         feature_picker);
    const std::size_t right = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[node_idx].right = right;
    grow(tree, right, in, std::move(right_rows), min_leaf, max_depth, depth + 1, consider,
         feature_picker);
}

std::vector<std::size_t> all_features(std::size_t dim) {
    std::vector<std::size_t> f(dim);
    for (std::size_t i = 0; i < dim; ++i) f[i] = i;
    return f;
}

struct TreeParams final : ModelParameters {
    Tree tree;
    bool stump = false;

    std::vector<double> class_scores(std::span<const double> x) const override {
        return tree.leaf_distribution(x);
    }

    std::string params_json() const override {
        json j;
        j["criterion"] = "gini";
        if (stump) {
            j["max_depth"] = 1;
        } else {
            j["min_leaf"] = kCartMinLeaf;
        }
        j["nodes"] = tree.to_json();
        return j.dump();
    }
};

struct ForestParams final : ModelParameters {
    std::vector<Tree> trees;
    std::size_t n_classes = 0;
    std::size_t features_per_split = 0;

    std::vector<double> class_scores(std::span<const double> x) const override {
        // Vote fractions: each tree casts one hard vote.
        std::vector<double> votes(n_classes, 0.0);
        for (const Tree& t : trees) {
            const std::vector<double>& dist = t.leaf_distribution(x);
            votes[argmax(dist)] += 1.0;
        }
        for (double& v : votes) v /= static_cast<double>(trees.size());
        return votes;
    }

    std::string params_json() const override {
        json j;
        j["n_trees"] = trees.size();
        j["features_per_split"] = features_per_split;
        j["n_classes"] = n_classes;
        json arr = json::array();
        for (const Tree& t : trees) arr.push_back(t.to_json());
        j["trees"] = std::move(arr);
        return j.dump();
    }
};

}  // namespace

ParamsPtr fit_decision_stump(const FitInput& in) {
    auto p = std::make_shared<TreeParams>();
    p->stump = true;
    p->tree.nodes.emplace_back();
    std::vector<std::size_t> rows(in.n());
    for (std::size_t i = 0; i < in.n(); ++i) rows[i] = i;
    const auto features = all_features(in.dim);
    grow(p->tree, 0, in, std::move(rows), 1, 1, 0, in.dim, [&]() { return features; });
    return p;
}

ParamsPtr fit_cart_tree(const FitInput& in) {
    auto p = std::make_shared<TreeParams>();
    p->tree.nodes.emplace_back();
    std::vector<std::size_t> rows(in.n());
    for (std::size_t i = 0; i < in.n(); ++i) rows[i] = i;
    const auto features = all_features(in.dim);
    grow(p->tree, 0, in, std::move(rows), kCartMinLeaf, std::size_t(-1), 0, in.dim,
         [&]() { return features; });
    return p;
}

ParamsPtr fit_random_forest(const FitInput& in, Rng& rng) {
    auto p = std::make_shared<ForestParams>();
    p->n_classes = in.n_classes;
    p->features_per_split =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(in.dim))));

    std::vector<std::size_t> pool = all_features(in.dim);
    for (std::size_t t = 0; t < kForestTrees; ++t) {
        Rng tree_rng(rng.u64());
        std::vector<std::size_t> rows(in.n());
        for (std::size_t i = 0; i < in.n(); ++i) rows[i] = tree_rng.index(in.n());

        Tree tree;
        tree.nodes.emplace_back();
        // Fresh feature order per node; the splitter examines the first
        // features_per_split and keeps scanning only while none can split.
        auto picker = [&]() {
            tree_rng.shuffle(pool);
            return pool;
        };
        grow(tree, 0, in, std::move(rows), 1, std::size_t(-1), 0, p->features_per_split,
             picker);
        p->trees.push_back(std::move(tree));
    }
    return p;
}

ParamsPtr trees_params_from_json(AlgorithmId id, const json& j) {
    if (id == AlgorithmId::RandomForest) {
        auto p = std::make_shared<ForestParams>();
        p->n_classes = j.at("n_classes").get<std::size_t>();
        p->features_per_split = j.at("features_per_split").get<std::size_t>();
        for (const json& t : j.at("trees")) p->trees.push_back(Tree::from_json(t));
        return p;
    }
    auto p = std::make_shared<TreeParams>();
    p->stump = id == AlgorithmId::DecisionStump;
    p->tree = Tree::from_json(j.at("nodes"));
    return p;
}

}  // namespace btprint::detail
