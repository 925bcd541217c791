#pragma once

// Private: per-algorithm fitting internals behind the fit/predict surface.

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "btprint/dataset.hpp"
#include "btprint/jsonutil.hpp"
#include "btprint/learners.hpp"

namespace btprint::detail {

/// All stochastic fitting draws go through this wrapper so behavior depends
/// only on the seed, never on library distribution internals.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

   private:
    std::mt19937_64 gen_;
};

/// Training view: signatures with labels resolved to class indices.
struct FitInput {
    const std::vector<Signature>* signatures = nullptr;
    std::vector<std::size_t> y;
    std::size_t n_classes = 0;
    std::size_t dim = 0;

    std::size_t n() const { return y.size(); }
    double x(std::size_t row, std::size_t col) const {
        return (*signatures)[row].features[col];
    }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>((*signatures)[i].features);
    }
};

/// Argmax with ties broken to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Scales scores so they sum to 1; degenerate all-zero input becomes uniform.
void normalize_scores(std::vector<double>& scores);

nlohmann::json doubles_to_json(std::span<const double> v);
std::vector<double> doubles_from_json(const nlohmann::json& j);

using ParamsPtr = std::shared_ptr<const ModelParameters>;

ParamsPtr fit_gaussian_nb(const FitInput& in);
ParamsPtr fit_multinomial_nb(const FitInput& in);
ParamsPtr fit_logistic_regression(const FitInput& in);
ParamsPtr fit_linear_svm(const FitInput& in);
ParamsPtr fit_mlp(const FitInput& in, Rng& rng);
ParamsPtr fit_one_r(const FitInput& in);
ParamsPtr fit_decision_table(const FitInput& in);
ParamsPtr fit_decision_stump(const FitInput& in);
ParamsPtr fit_cart_tree(const FitInput& in);
ParamsPtr fit_random_forest(const FitInput& in, Rng& rng);

ParamsPtr bayes_params_from_json(AlgorithmId id, const nlohmann::json& j);
ParamsPtr linear_params_from_json(AlgorithmId id, const nlohmann::json& j);
ParamsPtr mlp_params_from_json(const nlohmann::json& j);
ParamsPtr rules_params_from_json(AlgorithmId id, const nlohmann::json& j);
ParamsPtr trees_params_from_json(AlgorithmId id, const nlohmann::json& j);

}  // namespace btprint::detail
