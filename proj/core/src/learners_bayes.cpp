#include <algorithm>
#include <cmath>

#include "learner_impl.hpp"

namespace btprint::detail {

using nlohmann::json;

namespace {

/// Softmax over log scores, stable against large negatives.
std::vector<double> softmax_log(std::vector<double> log_scores) {
    const double m = *std::max_element(log_scores.begin(), log_scores.end());
    double sum = 0.0;
    for (double& s : log_scores) {
        s = std::exp(s - m);
        sum += s;
    }
    for (double& s : log_scores) s /= sum;
    return log_scores;
}

struct GaussianNbParams final : ModelParameters {
    std::vector<double> log_prior;                // per class
    std::vector<std::vector<double>> mean;        // [class][feature]
    std::vector<std::vector<double>> variance;    // smoothed

    std::vector<double> class_scores(std::span<const double> x) const override {
        const std::size_t C = log_prior.size();
        std::vector<double> ls(C);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = log_prior[c];
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double v = variance[c][i];
                const double d = x[i] - mean[c][i];
                acc += -0.5 * std::log(2.0 * M_PI * v) - d * d / (2.0 * v);
            }
            ls[c] = acc;
        }
        return softmax_log(std::move(ls));
    }

    std::string params_json() const override {
        json j;
        j["var_smoothing_rel"] = double_to_string(1e-9);
        j["log_prior"] = doubles_to_json(log_prior);
        json means = json::array(), vars = json::array();
        for (const auto& m : mean) means.push_back(doubles_to_json(m));
        for (const auto& v : variance) vars.push_back(doubles_to_json(v));
        j["mean"] = std::move(means);
        j["variance"] = std::move(vars);
        return j.dump();
    }
};

struct MultinomialNbParams final : ModelParameters {
    std::vector<double> log_prior;
    std::vector<std::vector<double>> log_theta;  // [class][feature]

    std::vector<double> class_scores(std::span<const double> x) const override {
        const std::size_t C = log_prior.size();
        std::vector<double> ls(C);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = log_prior[c];
            for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * log_theta[c][i];
            ls[c] = acc;
        }
        return softmax_log(std::move(ls));
    }

    std::string params_json() const override {
        json j;
        j["alpha"] = double_to_string(0.01);
        j["log_prior"] = doubles_to_json(log_prior);
        json thetas = json::array();
        for (const auto& t : log_theta) thetas.push_back(doubles_to_json(t));
        j["log_theta"] = std::move(thetas);
        return j.dump();
    }
};

}  // namespace

ParamsPtr fit_gaussian_nb(const FitInput& in) {
    auto p = std::make_shared<GaussianNbParams>();
    const std::size_t C = in.n_classes, d = in.dim, n = in.n();

    std::vector<std::size_t> counts(C, 0);
    p->mean.assign(C, std::vector<double>(d, 0.0));
    p->variance.assign(C, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[in.y[i]];
        for (std::size_t f = 0; f < d; ++f) p->mean[in.y[i]][f] += in.x(i, f);
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t f = 0; f < d; ++f) p->mean[c][f] /= static_cast<double>(counts[c]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < d; ++f) {
            const double dv = in.x(i, f) - p->mean[in.y[i]][f];
            p->variance[in.y[i]][f] += dv * dv;
        }

    // Smoothing floor keyed to the largest pooled feature variance, so
    // constant columns do not zero out the likelihood.
    double pooled_max = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += in.x(i, f);
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = in.x(i, f) - mu;
            var += dv * dv;
        }
        pooled_max = std::max(pooled_max, var / static_cast<double>(n));
    }
    const double eps = std::max(1e-9 * pooled_max, 1e-18);

    p->log_prior.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        p->log_prior[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
        for (std::size_t f = 0; f < d; ++f)
            p->variance[c][f] = p->variance[c][f] / static_cast<double>(counts[c]) + eps;
    }
    return p;
}

ParamsPtr fit_multinomial_nb(const FitInput& in) {
    constexpr double kAlpha = 0.01;  // matched to area-normalized feature scale
    auto p = std::make_shared<MultinomialNbParams>();
    const std::size_t C = in.n_classes, d = in.dim, n = in.n();

    std::vector<std::size_t> counts(C, 0);
    std::vector<std::vector<double>> feature_mass(C, std::vector<double>(d, 0.0));
    std::vector<double> class_mass(C, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = in.y[i];
        ++counts[c];
        for (std::size_t f = 0; f < d; ++f) {
            feature_mass[c][f] += in.x(i, f);
            class_mass[c] += in.x(i, f);
        }
    }
    p->log_prior.resize(C);
    p->log_theta.assign(C, std::vector<double>(d, 0.0));
    for (std::size_t c = 0; c < C; ++c) {
        p->log_prior[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
        const double denom = class_mass[c] + kAlpha * static_cast<double>(d);
        for (std::size_t f = 0; f < d; ++f)
            p->log_theta[c][f] = std::log((feature_mass[c][f] + kAlpha) / denom);
    }
    return p;
}

ParamsPtr bayes_params_from_json(AlgorithmId id, const json& j) {
    if (id == AlgorithmId::GaussianNaiveBayes) {
        auto p = std::make_shared<GaussianNbParams>();
        p->log_prior = doubles_from_json(j.at("log_prior"));
        for (const json& m : j.at("mean")) p->mean.push_back(doubles_from_json(m));
        for (const json& v : j.at("variance")) p->variance.push_back(doubles_from_json(v));
        return p;
    }
    auto p = std::make_shared<MultinomialNbParams>();
    p->log_prior = doubles_from_json(j.at("log_prior"));
    for (const json& t : j.at("log_theta")) p->log_theta.push_back(doubles_from_json(t));
    return p;
}

}  // namespace btprint::detail
