#include <doctest.h>

#include <cmath>
#include <random>

#include "btprint/learners.hpp"

using namespace btprint;

namespace {

Signature make_signature(std::vector<std::pair<std::size_t, double>> entries,
                         std::optional<std::string> label, const std::string& session = "s") {
    Signature s;
    s.features.assign(kSignatureBins, 0.0);
    for (auto [idx, v] : entries) s.features[idx] = v;
    s.label = std::move(label);
    s.filter = FilterSpec::from_name("all-all");
    s.t_max = 1.0;
    s.session_id = session;
    return s;
}

/// Two classes as disjoint point masses: bin 0 vs bin 299.
Dataset point_mass_dataset(std::size_t per_class = 6) {
    Dataset ds;
    ds.class_names = {"a", "b"};
    for (std::size_t i = 0; i < per_class; ++i) {
        ds.signatures.push_back(make_signature({{0, 1.0}}, "a", "a" + std::to_string(i)));
        ds.signatures.push_back(make_signature({{299, 1.0}}, "b", "b" + std::to_string(i)));
    }
    return ds;
}

}  // namespace

TEST_CASE("every algorithm memorizes the disjoint point-mass dataset") {
    const Dataset ds = point_mass_dataset();
    for (AlgorithmId alg : kAllAlgorithms) {
        CAPTURE(to_string(alg));
        const TrainedModel m = fit(alg, ds, 7);
        for (const Signature& s : ds.signatures) {
            const Prediction p = predict(m, s);
            CHECK(p.label == *s.label);
            CHECK(p.confidence >= 0.9);
        }
    }
}

TEST_CASE("class scores are a distribution for every algorithm") {
    const Dataset ds = point_mass_dataset();
    const Signature query = make_signature({{0, 0.4}, {150, 0.3}, {299, 0.3}}, std::nullopt);
    for (AlgorithmId alg : kAllAlgorithms) {
        CAPTURE(to_string(alg));
        const TrainedModel m = fit(alg, ds, 3);
        const Prediction p = predict(m, query);
        REQUIRE(p.class_scores.size() == 2);
        double sum = 0.0;
        for (double v : p.class_scores) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((p.label == "a" || p.label == "b"));
    }
}

TEST_CASE("single-class datasets are fatal") {
    Dataset ds;
    ds.class_names = {"only"};
    ds.signatures.push_back(make_signature({{0, 1.0}}, "only"));
    ds.signatures.push_back(make_signature({{1, 1.0}}, "only"));
    CHECK_THROWS_AS(fit(AlgorithmId::CartTree, ds, 1), DegenerateDataset);

    Dataset empty;
    CHECK_THROWS_AS(fit(AlgorithmId::OneR, empty, 1), DegenerateDataset);

    Dataset missing = point_mass_dataset();
    missing.class_names.push_back("ghost");
    CHECK_THROWS_AS(fit(AlgorithmId::OneR, missing, 1), DegenerateDataset);
}

TEST_CASE("fitting twice with one seed is byte-identical") {
    const Dataset ds = point_mass_dataset();
    for (AlgorithmId alg :
         {AlgorithmId::CartTree, AlgorithmId::RandomForest, AlgorithmId::MlpOneHidden,
          AlgorithmId::GaussianNaiveBayes, AlgorithmId::DecisionTable}) {
        CAPTURE(to_string(alg));
        CHECK(model_to_json(fit(alg, ds, 7)) == model_to_json(fit(alg, ds, 7)));
    }
}

TEST_CASE("dimension and filter mismatches are rejected") {
    const TrainedModel m = fit(AlgorithmId::GaussianNaiveBayes, point_mass_dataset(), 1);

    Signature short_sig = make_signature({{0, 1.0}}, std::nullopt);
    short_sig.features.resize(299);
    CHECK_THROWS_AS(predict(m, short_sig), DimensionMismatch);

    Signature wrong_filter = make_signature({{0, 1.0}}, std::nullopt);
    wrong_filter.filter = FilterSpec::from_name("RFCOMM-10");
    CHECK_THROWS_AS(predict(m, wrong_filter), FilterMismatch);

    Signature wrong_tmax = make_signature({{0, 1.0}}, std::nullopt);
    wrong_tmax.t_max = 2.0;
    CHECK_THROWS_AS(predict(m, wrong_tmax), FilterMismatch);
}

TEST_CASE("gaussian naive bayes matches the closed-form posterior") {
    // One effective feature: class a at {0.7, 0.9}, class b at {0.1, 0.3}.
    // MLE variances are both 0.01, so the log-odds at query 0.75 are
    // ((0.75-0.2)^2 - (0.75-0.8)^2) / (2 * 0.01) = 15.
    Dataset ds;
    ds.class_names = {"a", "b"};
    ds.signatures.push_back(make_signature({{0, 0.7}}, "a"));
    ds.signatures.push_back(make_signature({{0, 0.9}}, "a"));
    ds.signatures.push_back(make_signature({{0, 0.1}}, "b"));
    ds.signatures.push_back(make_signature({{0, 0.3}}, "b"));

    const TrainedModel m = fit(AlgorithmId::GaussianNaiveBayes, ds, 1);
    const Prediction p = predict(m, make_signature({{0, 0.75}}, std::nullopt));
    CHECK(p.label == "a");
    const double expected = 1.0 / (1.0 + std::exp(-15.0));
    CHECK(p.confidence == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("multinomial naive bayes smooths constant feature columns") {
    Dataset ds = point_mass_dataset(4);
    for (Signature& s : ds.signatures) s.features[150] = 0.5;  // constant column
    const TrainedModel m = fit(AlgorithmId::MultinomialNaiveBayes, ds, 1);
    const Prediction p = predict(m, ds.signatures[0]);
    CHECK(p.label == "a");
}

TEST_CASE("random forest seeds differ but invariants hold") {
    const Dataset ds = point_mass_dataset();
    const TrainedModel m1 = fit(AlgorithmId::RandomForest, ds, 1);
    const TrainedModel m2 = fit(AlgorithmId::RandomForest, ds, 2);
    const Signature query = make_signature({{0, 0.5}, {299, 0.5}}, std::nullopt);
    for (const TrainedModel& m : {m1, m2}) {
        const Prediction p = predict(m, query);
        double sum = 0.0;
        for (double v : p.class_scores) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("models round-trip through JSON with identical predictions") {
    const Dataset ds = point_mass_dataset(4);
    const std::vector<Signature> queries = {
        make_signature({{0, 1.0}}, std::nullopt), make_signature({{299, 1.0}}, std::nullopt),
        make_signature({{0, 0.6}, {299, 0.4}}, std::nullopt)};
    for (AlgorithmId alg : kAllAlgorithms) {
        CAPTURE(to_string(alg));
        const TrainedModel m = fit(alg, ds, 11);
        const std::string encoded = model_to_json(m);
        const TrainedModel back = model_from_json(encoded);
        CHECK(model_to_json(back) == encoded);
        for (const Signature& q : queries) {
            const Prediction a = predict(m, q);
            const Prediction b = predict(back, q);
            CHECK(a.label == b.label);
            CHECK(a.confidence == b.confidence);
        }
    }
}

// Exhaustive reference splitter: same contract as the production trees
// (gini, midpoint thresholds, min_leaf, strict improvement, first-candidate
// ties) but written as a naive re-partitioning enumeration.
namespace {

struct TinyPoint {
    double f0, f1;
    std::size_t y;
};

double brute_gini(const std::vector<std::size_t>& ys) {
    if (ys.empty()) return 0.0;
    std::size_t counts[2] = {0, 0};
    for (std::size_t y : ys) ++counts[y];
    const double n = double(ys.size());
    double g = 1.0;
    for (std::size_t c : counts) g -= (double(c) / n) * (double(c) / n);
    return g;
}

struct BruteNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::unique_ptr<BruteNode> left, right;
    std::size_t label = 0;
    double purity = 0.0;
};

std::unique_ptr<BruteNode> brute_build(const std::vector<TinyPoint>& pts,
                                       std::vector<std::size_t> rows, std::size_t min_leaf,
                                       std::size_t depth, std::size_t max_depth) {
    auto node = std::make_unique<BruteNode>();
    std::vector<std::size_t> ys;
    for (std::size_t r : rows) ys.push_back(pts[r].y);
    std::size_t counts[2] = {0, 0};
    for (std::size_t y : ys) ++counts[y];
    node->label = counts[1] > counts[0] ? 1 : 0;
    node->purity = double(counts[node->label]) / double(rows.size());

    const double node_gini = brute_gini(ys);
    if (node_gini <= 0.0 || rows.size() < 2 * min_leaf || depth >= max_depth) return node;

    bool found = false;
    std::size_t best_f = 0;
    double best_t = 0.0, best_score = 0.0;
    for (std::size_t f = 0; f < 2; ++f) {
        std::vector<double> values;
        for (std::size_t r : rows) values.push_back(f == 0 ? pts[r].f0 : pts[r].f1);
        std::sort(values.begin(), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            if (values[i] == values[i + 1]) continue;
            const double t = 0.5 * (values[i] + values[i + 1]);
            std::vector<std::size_t> ly, ry;
            for (std::size_t r : rows) {
                const double v = f == 0 ? pts[r].f0 : pts[r].f1;
                (v <= t ? ly : ry).push_back(pts[r].y);
            }
            if (ly.size() < min_leaf || ry.size() < min_leaf) continue;
            const double score = (double(ly.size()) * brute_gini(ly) +
                                  double(ry.size()) * brute_gini(ry)) /
                                 double(rows.size());
            if (!found || score < best_score - 1e-12) {
                found = true;
                best_f = f;
                best_t = t;
                best_score = score;
            }
        }
    }
    if (!found || best_score >= node_gini - 1e-12) return node;

    node->leaf = false;
    node->feature = best_f;
    node->threshold = best_t;
    std::vector<std::size_t> lrows, rrows;
    for (std::size_t r : rows) {
        const double v = best_f == 0 ? pts[r].f0 : pts[r].f1;
        (v <= best_t ? lrows : rrows).push_back(r);
    }
    node->left = brute_build(pts, lrows, min_leaf, depth + 1, max_depth);
    node->right = brute_build(pts, rrows, min_leaf, depth + 1, max_depth);
    return node;
}

std::size_t brute_predict(const BruteNode* n, double f0, double f1) {
    while (!n->leaf) n = ((n->feature == 0 ? f0 : f1) <= n->threshold ? n->left : n->right).get();
    return n->label;
}

}  // namespace

TEST_CASE("cart and stump match an exhaustive split search on tiny data") {
    const double coords[4] = {0.1, 0.35, 0.6, 0.85};
    std::mt19937_64 gen(5);
    int checked = 0;
    for (int mask = 1; mask < 15; ++mask) {  // skip the two single-class labelings
        for (int round = 0; round < 4; ++round) {
            std::vector<TinyPoint> pts;
            Dataset ds;
            ds.class_names = {"c0", "c1"};
            for (int i = 0; i < 4; ++i) {
                TinyPoint p;
                p.f0 = coords[(i + round) % 4];
                p.f1 = coords[std::size_t(gen() % 4)];
                p.y = (mask >> i) & 1;
                pts.push_back(p);
                ds.signatures.push_back(make_signature({{0, p.f0}, {1, p.f1}},
                                                       p.y ? "c1" : "c0",
                                                       "p" + std::to_string(i)));
            }

            const TrainedModel cart = fit(AlgorithmId::CartTree, ds, 1);
            const TrainedModel stump = fit(AlgorithmId::DecisionStump, ds, 1);
            const auto brute_cart = brute_build(pts, {0, 1, 2, 3}, 2, 0, std::size_t(-1));
            const auto brute_stump = brute_build(pts, {0, 1, 2, 3}, 1, 0, 1);

            for (double q0 : {0.0, 0.2, 0.5, 0.7, 1.0})
                for (double q1 : {0.05, 0.45, 0.95}) {
                    const Signature q = make_signature({{0, q0}, {1, q1}}, std::nullopt);
                    CHECK(predict(cart, q).label ==
                          ds.class_names[brute_predict(brute_cart.get(), q0, q1)]);
                    CHECK(predict(stump, q).label ==
                          ds.class_names[brute_predict(brute_stump.get(), q0, q1)]);
                    ++checked;
                }
        }
    }
    CHECK(checked > 500);
}
