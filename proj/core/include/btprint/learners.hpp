#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "btprint/dataset.hpp"

namespace btprint {

/// The classifier suite: at least two algorithms from each of the four
/// families (Bayes, Functions, Rules, Trees). Enumerator order is the
/// lexicographic order of the names and doubles as the deterministic
/// tie-breaking order.
enum class AlgorithmId : std::uint8_t {
    CartTree,
    DecisionStump,
    DecisionTable,
    GaussianNaiveBayes,
    LinearSvmOvR,
    LogisticRegression,
    MlpOneHidden,
    MultinomialNaiveBayes,
    OneR,
    RandomForest,
};

inline constexpr std::array<AlgorithmId, 10> kAllAlgorithms{
    AlgorithmId::CartTree,      AlgorithmId::DecisionStump,
    AlgorithmId::DecisionTable, AlgorithmId::GaussianNaiveBayes,
    AlgorithmId::LinearSvmOvR,  AlgorithmId::LogisticRegression,
    AlgorithmId::MlpOneHidden,  AlgorithmId::MultinomialNaiveBayes,
    AlgorithmId::OneR,          AlgorithmId::RandomForest,
};

enum class AlgorithmFamily : std::uint8_t { bayes, functions, rules, trees };

std::string_view to_string(AlgorithmId id);
AlgorithmId algorithm_from_string(std::string_view name);
AlgorithmFamily family(AlgorithmId id);
std::string_view to_string(AlgorithmFamily f);

/// Fitted per-algorithm state. Opaque to callers; serializes to JSON with
/// every floating-point value rendered as an exactly round-tripping decimal
/// string.
class ModelParameters {
   public:
    virtual ~ModelParameters() = default;
    /// Per-class scores for a 300-dim feature vector, summing to 1.
    virtual std::vector<double> class_scores(std::span<const double> features) const = 0;
    virtual std::string params_json() const = 0;
};

/// An immutable fitted classifier together with the feature-pipeline
/// settings its signatures were built with.
struct TrainedModel {
    AlgorithmId algorithm = AlgorithmId::CartTree;
    FilterSpec filter;
    double t_max = 0.0;
    std::vector<std::string> class_names;
    std::uint64_t train_seed = 0;
    std::shared_ptr<const ModelParameters> parameters;
};

/// Fits `alg` on `ds`. All stochastic choices (bootstrap resampling, weight
/// init, shuffling) come from a generator seeded with `seed`, so refitting
/// with the same arguments reproduces the parameters exactly.
///
/// Throws DegenerateDataset when ds has a single class or a class without
/// signatures.
TrainedModel fit(AlgorithmId alg, const Dataset& ds, std::uint64_t seed);

struct Prediction {
    std::string label;
    double confidence = 0.0;            // winning class score
    std::vector<double> class_scores;   // aligned with model class_names
};

/// Throws DimensionMismatch when s has != 300 features, FilterMismatch when
/// s was built under a different filter or t_max than the model.
Prediction predict(const TrainedModel& m, const Signature& s);

std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(std::string_view text);

}  // namespace btprint
