#include <doctest.h>

#include <cmath>
#include <random>

#include "btprint/metrics.hpp"

using namespace btprint;

namespace {

/// Reference metrics computed from raw (truth, prediction) pairs with
/// freshly written formulas, independent of the matrix code path.
struct BruteMetrics {
    double tp_rate, fp_rate, precision, recall, f_measure, mcc;
};

BruteMetrics brute_for_class(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                             std::size_t cls) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (auto [t, p] : pairs) {
        if (t == cls && p == cls)
            ++tp;
        else if (t != cls && p == cls)
            ++fp;
        else if (t == cls && p != cls)
            ++fn;
        else
            ++tn;
    }
    BruteMetrics b{};
    b.tp_rate = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    b.fp_rate = fp + tn > 0 ? fp / (fp + tn) : 0.0;
    b.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    b.recall = b.tp_rate;
    b.f_measure = b.precision + b.recall > 0
                      ? 2.0 * b.precision * b.recall / (b.precision + b.recall)
                      : 0.0;
    const double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    b.mcc = denom > 0 ? (tp * tn - fp * fn) / denom : 0.0;
    return b;
}

}  // namespace

TEST_CASE("hand-checked binary confusion matrix") {
    // [[2,0],[1,1]]: class 0 has TP=2 FN=0 FP=1 TN=1.
    ConfusionMatrix m({"x", "y"});
    m.add(0, 0, 2);
    m.add(1, 0, 1);
    m.add(1, 1, 1);
    const EvaluationReport r = report_from_matrix(m);

    CHECK(r.per_class[0].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.per_class[0].recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.per_class[0].mcc == doctest::Approx(2.0 / std::sqrt(12.0)).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("perfect predictions score 1.0 everywhere") {
    ConfusionMatrix m({"a", "b", "c"});
    m.add(0, 0, 5);
    m.add(1, 1, 3);
    m.add(2, 2, 7);
    const EvaluationReport r = report_from_matrix(m);
    for (const ClassMetrics& cm : r.per_class) {
        CHECK(cm.tp_rate == 1.0);
        CHECK(cm.fp_rate == 0.0);
        CHECK(cm.precision == 1.0);
        CHECK(cm.f_measure == 1.0);
        CHECK(cm.mcc == 1.0);
    }
    CHECK(r.weighted_avg.precision == 1.0);
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("matrix metrics match the pairwise brute force to 1e-12") {
    std::mt19937_64 gen(2024);
    for (int round = 0; round < 40; ++round) {
        const std::size_t n_classes = 2 + gen() % 5;
        const std::size_t n = 5 + gen() % 60;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < n_classes; ++c) names.push_back("c" + std::to_string(c));
        ConfusionMatrix m(names);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = gen() % n_classes;
            const std::size_t p = gen() % n_classes;
            pairs.emplace_back(t, p);
            m.add(t, p);
        }
        const EvaluationReport r = report_from_matrix(m);

        double correct = 0;
        for (auto [t, p] : pairs)
            if (t == p) ++correct;
        CHECK(r.accuracy == doctest::Approx(correct / double(n)).epsilon(1e-12));

        for (std::size_t c = 0; c < n_classes; ++c) {
            const BruteMetrics b = brute_for_class(pairs, c);
            CHECK(r.per_class[c].tp_rate == doctest::Approx(b.tp_rate).epsilon(1e-12));
            CHECK(r.per_class[c].fp_rate == doctest::Approx(b.fp_rate).epsilon(1e-12));
            CHECK(r.per_class[c].precision == doctest::Approx(b.precision).epsilon(1e-12));
            CHECK(r.per_class[c].recall == doctest::Approx(b.recall).epsilon(1e-12));
            CHECK(r.per_class[c].f_measure == doctest::Approx(b.f_measure).epsilon(1e-12));
            CHECK(r.per_class[c].mcc == doctest::Approx(b.mcc).epsilon(1e-12));
            CHECK(r.per_class[c].recall == r.per_class[c].tp_rate);
        }
    }
}

TEST_CASE("weighted averages are invariant under class permutation") {
    std::mt19937_64 gen(7);
    ConfusionMatrix m({"a", "b", "c"});
    ConfusionMatrix permuted({"c", "a", "b"});  // c->0, a->1, b->2
    const std::size_t map[3] = {1, 2, 0};
    for (int i = 0; i < 60; ++i) {
        const std::size_t t = gen() % 3, p = gen() % 3;
        m.add(t, p);
        permuted.add(map[t], map[p]);
    }
    const EvaluationReport r1 = report_from_matrix(m);
    const EvaluationReport r2 = report_from_matrix(permuted);
    CHECK(r1.weighted_avg.tp_rate == doctest::Approx(r2.weighted_avg.tp_rate).epsilon(1e-12));
    CHECK(r1.weighted_avg.precision ==
          doctest::Approx(r2.weighted_avg.precision).epsilon(1e-12));
    CHECK(r1.weighted_avg.mcc == doctest::Approx(r2.weighted_avg.mcc).epsilon(1e-12));
    CHECK(r1.accuracy == doctest::Approx(r2.accuracy).epsilon(1e-12));
    // per-class rows permute accordingly
    CHECK(r1.per_class[0].precision == doctest::Approx(r2.per_class[1].precision));
}

TEST_CASE("confusion counts are conserved") {
    std::mt19937_64 gen(31);
    ConfusionMatrix m({"a", "b", "c", "d"});
    std::vector<std::size_t> supports(4, 0);
    for (int i = 0; i < 83; ++i) {
        const std::size_t t = gen() % 4;
        m.add(t, gen() % 4);
        ++supports[t];
    }
    CHECK(m.total() == 83);
    const EvaluationReport r = report_from_matrix(m);
    std::size_t sum = 0;
    for (const auto& row : r.confusion)
        for (std::size_t c : row) sum += c;
    CHECK(sum == 83);
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(m.support(c) == supports[c]);
        CHECK(r.per_class[c].support == supports[c]);
    }
}

TEST_CASE("report renders the Weighted Avg. row") {
    ConfusionMatrix m({"a", "b"});
    m.add(0, 0, 3);
    m.add(1, 1, 2);
    m.add(1, 0, 1);
    const EvaluationReport r = report_from_matrix(m);
    const std::string table = report_to_table(r);
    CHECK(table.find("Weighted Avg.") != std::string::npos);
    CHECK(table.find("TP Rate") != std::string::npos);
    const std::string j = report_to_json(r);
    CHECK(j.find("weighted_avg") != std::string::npos);
    CHECK(j.find("confusion") != std::string::npos);
}
