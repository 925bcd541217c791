#include "btprint/learners.hpp"

#include <algorithm>

#include "learner_impl.hpp"

namespace btprint {

using nlohmann::json;

namespace detail {

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

void normalize_scores(std::vector<double>& scores) {
    double sum = 0.0;
    for (double s : scores) sum += s;
    if (sum <= 0.0) {
        std::fill(scores.begin(), scores.end(), 1.0 / static_cast<double>(scores.size()));
        return;
    }
    for (double& s : scores) s /= sum;
}

json doubles_to_json(std::span<const double> v) {
    json arr = json::array();
    for (double d : v) arr.push_back(double_to_string(d));
    return arr;
}

std::vector<double> doubles_from_json(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& e : j) out.push_back(double_from_string(e.get<std::string>()));
    return out;
}

}  // namespace detail

std::string_view to_string(AlgorithmId id) {
    switch (id) {
        case AlgorithmId::CartTree: return "CartTree";
        case AlgorithmId::DecisionStump: return "DecisionStump";
        case AlgorithmId::DecisionTable: return "DecisionTable";
        case AlgorithmId::GaussianNaiveBayes: return "GaussianNaiveBayes";
        case AlgorithmId::LinearSvmOvR: return "LinearSvmOvR";
        case AlgorithmId::LogisticRegression: return "LogisticRegression";
        case AlgorithmId::MlpOneHidden: return "MlpOneHidden";
        case AlgorithmId::MultinomialNaiveBayes: return "MultinomialNaiveBayes";
        case AlgorithmId::OneR: return "OneR";
        case AlgorithmId::RandomForest: return "RandomForest";
    }
    throw Error("unknown algorithm id");
}

AlgorithmId algorithm_from_string(std::string_view name) {
    for (AlgorithmId id : kAllAlgorithms)
        if (to_string(id) == name) return id;
    throw Error("unknown algorithm: " + std::string(name));
}

AlgorithmFamily family(AlgorithmId id) {
    switch (id) {
        case AlgorithmId::GaussianNaiveBayes:
        case AlgorithmId::MultinomialNaiveBayes: return AlgorithmFamily::bayes;
        case AlgorithmId::LogisticRegression:
        case AlgorithmId::LinearSvmOvR:
        case AlgorithmId::MlpOneHidden: return AlgorithmFamily::functions;
        case AlgorithmId::OneR:
        case AlgorithmId::DecisionTable: return AlgorithmFamily::rules;
        case AlgorithmId::DecisionStump:
        case AlgorithmId::CartTree:
        case AlgorithmId::RandomForest: return AlgorithmFamily::trees;
    }
    throw Error("unknown algorithm id");
}

std::string_view to_string(AlgorithmFamily f) {
    switch (f) {
        case AlgorithmFamily::bayes: return "Bayes";
        case AlgorithmFamily::functions: return "Functions";
        case AlgorithmFamily::rules: return "Rules";
        case AlgorithmFamily::trees: return "Trees";
    }
    throw Error("unknown family");
}

TrainedModel fit(AlgorithmId alg, const Dataset& ds, std::uint64_t seed) {
    if (ds.signatures.empty()) throw DegenerateDataset("empty dataset");
    ds.validate();
    const auto supports = ds.class_supports();
    for (std::size_t c = 0; c < supports.size(); ++c)
        if (supports[c] == 0)
            throw DegenerateDataset("class without signatures: " + ds.class_names[c]);
    if (ds.class_names.size() < 2) throw DegenerateDataset("need at least 2 classes");

    detail::FitInput in;
    in.signatures = &ds.signatures;
    in.n_classes = ds.class_names.size();
    in.dim = kSignatureBins;
    in.y.resize(ds.signatures.size());
    for (std::size_t i = 0; i < ds.signatures.size(); ++i)
        in.y[i] = ds.class_index(*ds.signatures[i].label);

    detail::Rng rng(seed);
    detail::ParamsPtr params;
    switch (alg) {
        case AlgorithmId::GaussianNaiveBayes: params = detail::fit_gaussian_nb(in); break;
        case AlgorithmId::MultinomialNaiveBayes: params = detail::fit_multinomial_nb(in); break;
        case AlgorithmId::LogisticRegression: params = detail::fit_logistic_regression(in); break;
        case AlgorithmId::LinearSvmOvR: params = detail::fit_linear_svm(in); break;
        case AlgorithmId::MlpOneHidden: params = detail::fit_mlp(in, rng); break;
        case AlgorithmId::OneR: params = detail::fit_one_r(in); break;
        case AlgorithmId::DecisionTable: params = detail::fit_decision_table(in); break;
        case AlgorithmId::DecisionStump: params = detail::fit_decision_stump(in); break;
        case AlgorithmId::CartTree: params = detail::fit_cart_tree(in); break;
        case AlgorithmId::RandomForest: params = detail::fit_random_forest(in, rng); break;
    }

    TrainedModel m;
    m.algorithm = alg;
    m.filter = ds.signatures.front().filter;
    m.t_max = ds.signatures.front().t_max;
    m.class_names = ds.class_names;
    m.train_seed = seed;
    m.parameters = std::move(params);
    return m;
}

Prediction predict(const TrainedModel& m, const Signature& s) {
    if (s.features.size() != kSignatureBins)
        throw DimensionMismatch("signature has " + std::to_string(s.features.size()) +
                                " features, expected " + std::to_string(kSignatureBins));
    if (s.filter != m.filter || s.t_max != m.t_max)
        throw FilterMismatch("signature built under " + s.filter.name() +
                             ", model expects " + m.filter.name());
    Prediction pred;
    pred.class_scores = m.parameters->class_scores(s.features);
    const std::size_t winner = detail::argmax(pred.class_scores);
    pred.label = m.class_names[winner];
    pred.confidence = pred.class_scores[winner];
    return pred;
}

std::string model_to_json(const TrainedModel& m) {
    json j;
    j["schema_version"] = 1;
    j["algorithm"] = to_string(m.algorithm);
    j["filter"] = m.filter.name();
    j["t_max"] = double_to_string(m.t_max);
    j["class_names"] = m.class_names;
    j["seed"] = m.train_seed;
    j["parameters"] = json::parse(m.parameters->params_json());
    return j.dump(2) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
    json j = json::parse(text);
    TrainedModel m;
    m.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    m.filter = FilterSpec::from_name(j.at("filter").get<std::string>());
    m.t_max = double_from_string(j.at("t_max").get<std::string>());
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.train_seed = j.at("seed").get<std::uint64_t>();
    const json& params = j.at("parameters");
    switch (family(m.algorithm)) {
        case AlgorithmFamily::bayes:
            m.parameters = detail::bayes_params_from_json(m.algorithm, params);
            break;
        case AlgorithmFamily::functions:
            m.parameters = m.algorithm == AlgorithmId::MlpOneHidden
                               ? detail::mlp_params_from_json(params)
                               : detail::linear_params_from_json(m.algorithm, params);
            break;
        case AlgorithmFamily::rules:
            m.parameters = detail::rules_params_from_json(m.algorithm, params);
            break;
        case AlgorithmFamily::trees:
            m.parameters = detail::trees_params_from_json(m.algorithm, params);
            break;
    }
    return m;
}

}  // namespace btprint
